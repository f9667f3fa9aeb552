import itertools

import numpy as np
import pytest

from ccstab import validate_cc, wl_closure
from ccstab.core import CapExceeded, PairColoring, from_matrix
from ccstab.graphs import complete, graphs_up_to, heawood, petersen, rainbow
from ccstab.oracles import brute_orbits
from ccstab.wlm import (
    class_multiplicity,
    dumps_mary,
    initial_coloring,
    loads_mary,
    mon_maps,
    project,
    residue,
    to_pair_coloring,
    tuple_pattern,
    validate_mary,
    wlm_closure,
)


def trivial_rainbow(n):
    mat = np.ones((n, n), dtype=np.int64)
    np.fill_diagonal(mat, 0)
    return PairColoring(n, 2, mat)


def test_mon_size():
    assert len(mon_maps(3)) == 27
    assert len(mon_maps(2)) == 4


def test_initial_trivial_patterns():
    # only the equality pattern distinguishes tuples of a trivial rainbow
    ini = initial_coloring(trivial_rainbow(4), 3)
    assert ini.R == 5  # Bell(3)
    pats = {}
    for x in itertools.product(range(4), repeat=3):
        pats.setdefault(tuple_pattern(x), set()).add(int(ini.color[x]))
    assert all(len(v) == 1 for v in pats.values())
    assert len(pats) == 5


def test_initial_heawood_brute_regroup():
    # independent oracle: group triples by (pattern, pair-color matrix,
    # mon-orbit signature) and compare the class count
    rb = rainbow(heawood())
    ini = initial_coloring(rb, 3)
    maps = mon_maps(3)
    c = rb.color
    groups = set()
    for x in itertools.product(range(14), repeat=3):
        sig = []
        for sigma in maps:
            xs = tuple(x[i] for i in sigma)
            sig.append((
                tuple_pattern(xs),
                tuple(int(c[xs[i], xs[j]]) for i in range(3) for j in range(3)),
            ))
        groups.add(tuple(sig))
    assert len(groups) == ini.R


def test_wlm_rejects_bad_arity():
    with pytest.raises(ValueError):
        initial_coloring(trivial_rainbow(3), 5)


def test_kn_triples_match_orbits():
    for n in (3, 4, 5):
        f = wlm_closure(trivial_rainbow(n), 3)
        assert f.R == 5
        orb = brute_orbits(rainbow(complete(n)), max_arity=3)
        labels = orb.triple_orbits
        # same partition of the triple set
        key = f.flat().astype(np.int64) * (labels.max() + 1) + labels
        assert len(np.unique(key)) == f.R == len(np.unique(labels))
        assert validate_mary(f).ok


def test_projection_is_coherent():
    for g in graphs_up_to(5)[::6]:
        f = wlm_closure(rainbow(g), 3)
        p2 = project(f, 2)
        assert validate_cc(to_pair_coloring(p2)).ok


def test_projection_idempotence_identity():
    # pr2 WL2 (pr2 WL3 X) = pr2 WL3 X on a sample (pr2 of a 2-ary closure
    # is the closure itself)
    for g in graphs_up_to(5)[::9]:
        p2 = to_pair_coloring(project(wlm_closure(rainbow(g), 3), 2))
        again = to_pair_coloring(wlm_closure(p2, 2))
        assert again.same_partition(p2)


def test_projection_k3():
    f = wlm_closure(rainbow(complete(3)), 3)
    assert project(f, 2).R == 2


def test_projection_arity_checks():
    f = wlm_closure(trivial_rainbow(3), 3)
    with pytest.raises(ValueError):
        project(f, 3)
    with pytest.raises(ValueError):
        project(f, 1)


def test_residue_singletons_and_order():
    f = wlm_closure(rainbow(heawood()), 3)
    p2 = project(f, 2)
    for alpha in range(14):
        r = residue(f, (alpha,))
        assert r.refines(p2)
        cls = r.color[alpha, alpha]
        assert int((r.color == cls).sum()) == 1


def test_residue_vs_point_extension():
    # res_y WL3 >= (pr2 WL3)_y, Petersen, all alpha
    from ccstab.cc2 import point_extension
    from ccstab.cc2 import build_cc

    f = wlm_closure(rainbow(petersen()), 3)
    base = build_cc(to_pair_coloring(project(f, 2)))
    for alpha in range(10):
        r = residue(f, (alpha,))
        ext = point_extension(base, (alpha,))
        assert to_pair_coloring(r).refines(ext.coloring)


def test_class_multiplicity():
    f = wlm_closure(trivial_rainbow(5), 3)
    diag = int(f.color[2, 2, 2])
    distinct = int(f.color[0, 1, 2])
    assert class_multiplicity(f, diag, 2) == 1
    assert class_multiplicity(f, distinct, 2) == 3  # n - 2


def test_multiplicity_counting_identity():
    # classes sharing a 2-prefix class: multiplicities times the prefix-class
    # size recover the class sizes
    f = wlm_closure(rainbow(heawood()), 3)
    flat = f.flat()
    table = flat.reshape(14 * 14, 14)
    sizes = np.bincount(flat, minlength=f.R)
    for cls in range(f.R):
        n2 = class_multiplicity(f, cls, 2)
        prefixes = len(np.unique(np.nonzero(table == cls)[0]))
        assert n2 * prefixes == sizes[cls]


def test_validate_mary_flags_initial_petersen():
    ini = initial_coloring(rainbow(petersen()), 3)
    rep = validate_mary(ini)
    assert rep.c1_ok and rep.c2_ok and not rep.c3_ok
    assert rep.c3_witness is not None


def test_validate_mary_c2_failure():
    # merge a class with a non-class sigma-image: start from a valid
    # closure and merge two classes whose transform behavior differs
    f = wlm_closure(trivial_rainbow(3), 3)
    col = f.color.copy()
    # class of (0,0,0)-type (all equal) merged with all-distinct class
    a = int(f.color[0, 0, 0])
    b = int(f.color[0, 1, 2])
    col[col == b] = a
    _, dense = np.unique(col, return_inverse=True)
    from ccstab.wlm import MaryColoring
    broken = MaryColoring(3, 3, int(dense.max()) + 1, dense.reshape(3, 3, 3))
    rep = validate_mary(broken)
    assert not rep.ok
    assert not (rep.c1_ok and rep.c2_ok)


def test_closure_laws_mary():
    for g in graphs_up_to(4):
        rb = rainbow(g)
        f = wlm_closure(rb, 3)
        ini = initial_coloring(rb, 3)
        assert f.flat().max() >= ini.flat().max() or f.R >= ini.R
        key = f.flat().astype(np.int64) * ini.R + ini.flat()
        assert len(np.unique(key)) == f.R  # extensive: f refines c0
        assert validate_mary(f).ok


def test_isomorphism_invariant_histograms():
    from ccstab.graphs import relabel

    g = petersen()
    f = wlm_closure(rainbow(g), 3)
    h = wlm_closure(rainbow(relabel(g, np.random.default_rng(3).permutation(10))), 3)
    assert np.array_equal(
        np.sort(np.bincount(f.flat(), minlength=f.R)),
        np.sort(np.bincount(h.flat(), minlength=h.R)),
    )


def test_mary_roundtrip():
    f = wlm_closure(rainbow(complete(4)), 3)
    text = dumps_mary(f)
    g = loads_mary(text)
    assert g.m == 3 and g.same_partition(f)
    with pytest.raises(ValueError):
        loads_mary("m 3 2 1\n0 0 0 0\n")


def test_wlm4_small():
    # trivial rainbow: only equality patterns; n=3 misses the all-distinct one
    f = wlm_closure(trivial_rainbow(3), 4)
    assert validate_mary(f).ok
    assert f.R == 14  # Bell(4) - 1
    f = wlm_closure(trivial_rainbow(4), 4)
    assert f.R == 15  # Bell(4)
