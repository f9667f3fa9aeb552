import numpy as np
import pytest

from ccstab import wl_closure
from ccstab.graphs import (
    complete,
    cycle,
    disjoint_union,
    heawood,
    petersen,
    rainbow,
    rook44,
    shrikhande,
)


@pytest.fixture(scope="session")
def petersen_cc():
    return wl_closure(rainbow(petersen()))


@pytest.fixture(scope="session")
def heawood_cc():
    return wl_closure(rainbow(heawood()))


@pytest.fixture(scope="session")
def shrikhande_cc():
    return wl_closure(rainbow(shrikhande()))


@pytest.fixture(scope="session")
def rook_cc():
    return wl_closure(rainbow(rook44()))


@pytest.fixture(scope="session")
def union_cc():
    return wl_closure(rainbow(disjoint_union(shrikhande(), rook44())))


def random_pair_coloring(rng, n, colors):
    """A random coloring densified; not necessarily a rainbow."""
    from ccstab.core import from_matrix

    return from_matrix(rng.integers(0, colors, size=(n, n)))
