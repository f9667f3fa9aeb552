import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccstab.core import (
    GroundSet,
    PairColoring,
    canonical_renumber,
    class_index,
    dumps_pair_coloring,
    from_matrix,
    join_partitions,
    loads_pair_coloring,
    validate_rainbow,
)
from ccstab.graphs import complete, cycle, path, rainbow


def colorings(max_n=5, max_colors=4):
    return st.integers(2, max_n).flatmap(
        lambda n: st.lists(
            st.integers(0, max_colors - 1), min_size=n * n, max_size=n * n
        ).map(lambda vals: from_matrix(np.array(vals).reshape(n, n)))
    )


def test_ground_set_rejects_empty():
    with pytest.raises(ValueError):
        GroundSet(0)
    assert GroundSet(3).n == 3


def test_join_idempotent():
    p = rainbow(cycle(5))
    assert join_partitions(p, p).same_partition(p)


def test_join_with_coarser_returns_coarser():
    # discrete vs the two-class coloring on n=2
    discrete = from_matrix(np.arange(4).reshape(2, 2))
    trivial = from_matrix(np.eye(2, dtype=int))
    j = join_partitions(discrete, trivial)
    assert j.same_partition(trivial)


def test_join_of_nested_partitions():
    # p splits {a},{b},{c}; q has {a,b},{c}: join is q
    p = from_matrix(np.array([[0, 1], [1, 2]]))
    q = from_matrix(np.array([[0, 0], [0, 2]]))
    assert join_partitions(p, q).same_partition(q)


def test_join_size_mismatch():
    with pytest.raises(ValueError):
        join_partitions(rainbow(cycle(4)), rainbow(cycle(5)))


@settings(max_examples=60, deadline=None)
@given(colorings(), colorings(), colorings())
def test_join_laws(p, q, r):
    if not (p.n == q.n == r.n):
        return
    ab = join_partitions(p, q)
    ba = join_partitions(q, p)
    assert ab.same_partition(ba)
    assert join_partitions(p, p).same_partition(p)
    left = join_partitions(ab, r)
    right = join_partitions(p, join_partitions(q, r))
    assert left.same_partition(right)


def test_canonical_renumber_fixed_point():
    p = canonical_renumber(rainbow(path(4)))
    assert np.array_equal(canonical_renumber(p).color, p.color)


@settings(max_examples=60, deadline=None)
@given(colorings())
def test_canonical_renumber_properties(p):
    c = canonical_renumber(p)
    # idempotent
    assert np.array_equal(canonical_renumber(c).color, c.color)
    # partition unchanged
    assert c.same_partition(p)
    # renaming-invariant: permute colors, renumber, get the same matrix
    rng = np.random.default_rng(0)
    perm = rng.permutation(p.R)
    q = PairColoring(p.n, p.R, perm[p.color])
    assert np.array_equal(canonical_renumber(q).color, c.color)
    # diagonal-touching colors come first
    diag_colors = set(int(v) for v in c.color.diagonal())
    off = c.color[~np.eye(c.n, dtype=bool)]
    pure_off = set(int(v) for v in off) - diag_colors
    if pure_off:
        assert max(diag_colors) < min(pure_off)


def test_validate_rainbow_graph_coloring():
    rep = validate_rainbow(rainbow(cycle(6)))
    assert rep.ok


def test_validate_rainbow_c1_failure():
    # one class holding a diagonal and an off-diagonal pair
    mat = np.array([[0, 0], [1, 0]])
    rep = validate_rainbow(from_matrix(mat))
    assert not rep.c1_ok
    (i, i2), (r, c) = rep.c1_witness
    assert i == i2 and r != c


def test_validate_rainbow_c2_failure():
    # class of (0,1) != class of (1,0), transpose split across classes
    mat = np.array([
        [0, 1, 1],
        [2, 0, 1],
        [1, 2, 0],
    ])
    p = from_matrix(mat)
    rep = validate_rainbow(p)
    assert rep.c1_ok and not rep.c2_ok
    (a, b), (c, d) = rep.c2_witness
    # witness: two same-class pairs whose transposes have different classes
    assert p.color[a, b] == p.color[c, d]
    assert p.color[b, a] != p.color[d, c]
    # brute scan agrees
    brute = {}
    bad = False
    for i in range(3):
        for j in range(3):
            cc, ct = int(p.color[i, j]), int(p.color[j, i])
            if cc in brute and brute[cc] != ct:
                bad = True
            brute.setdefault(cc, ct)
    assert bad


def test_class_index_sizes():
    p = rainbow(complete(4))
    idx = class_index(p)
    assert int(idx.sizes.sum()) == 16
    assert [len(r) for r, _ in idx.pairs] == [int(s) for s in idx.sizes]


def test_pair_coloring_text_roundtrip():
    p = rainbow(petersen_like())
    text = dumps_pair_coloring(p)
    assert text.startswith(f"m 2 {p.n} {p.R}")
    q = loads_pair_coloring(text)
    assert np.array_equal(q.color, p.color)


def petersen_like():
    return cycle(7)


def test_loads_rejects_bad_header():
    with pytest.raises(ValueError):
        loads_pair_coloring("m 3 2 1\n0 0 0 0\n")
    with pytest.raises(ValueError):
        loads_pair_coloring("m 2 2 2\n0 0 0\n")
    with pytest.raises(ValueError):
        loads_pair_coloring("m 2 2 3\n0 0 0 1\n")  # color 2 unused


def test_refines():
    fine = rainbow(cycle(5))
    coarse = from_matrix(np.eye(5, dtype=int))
    assert fine.refines(coarse)
    assert not coarse.refines(fine)
