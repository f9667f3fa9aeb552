import numpy as np
import pytest

from ccstab import wl_closure
from ccstab.core import CapExceeded
from ccstab.graphs import (
    complete,
    disjoint_union,
    graphs_up_to,
    heawood,
    petersen,
    rainbow,
    rook44,
    shrikhande,
)
from ccstab.oracles import brute_orbits
from ccstab.stab import (
    Diverged,
    ExtensionCache,
    deep_stab,
    n_alpha_count,
    n_y_count,
    paired_deep_stab,
    sesquiclosure,
    sigma,
    sim_classes,
)
from ccstab.wlm import project, to_pair_coloring, wlm_closure


def test_sim1_kn_single_class():
    cc = wl_closure(rainbow(complete(5)))
    assert sim_classes(cc, 1).class_count == 1


def test_sim1_union_splits(union_cc):
    s1 = sim_classes(union_cc, 1)
    assert s1.class_count == 2
    # the split is the two 16-point components
    labels = s1.labels
    assert len(np.unique(labels[:16])) == 1
    assert len(np.unique(labels[16:])) == 1
    assert labels[0] != labels[16]


def test_sim3_kn():
    for n in (4, 5):
        cc = wl_closure(rainbow(complete(n)))
        s3 = sim_classes(cc, 3)
        assert s3.class_count == 2  # diagonal, off-diagonal
        # cross-checked against pairwise extension tests
        from ccstab.algiso import extend_point, find_alg_iso
        w = find_alg_iso(cc, cc, {c: c for c in range(cc.rank)})
        assert extend_point(w, (0, 1), (2, 3)) is not None
        assert extend_point(w, (0, 0), (1, 1)) is not None
        assert extend_point(w, (0, 1), (1, 1)) is None


def test_sigma1_kn_identity():
    cc = wl_closure(rainbow(complete(5)))
    out = sigma(cc, 1)
    assert out.coloring.same_partition(cc.coloring)


def test_sigma1_union_splits_fibers(union_cc):
    out = sigma(union_cc, 1)
    assert len(out.fibers) >= 2


def test_sigma2_plane_fixed():
    for q in (2, 3):
        from ccstab.planes import pg2, plane_scheme
        cc = plane_scheme(pg2(q)).cc
        out = sigma(cc, 2)
        assert out.coloring.same_partition(cc.coloring)


def test_sesquiclosure_kn():
    y = sesquiclosure(rainbow(complete(6)))
    assert y.rank == 2


def test_sesquiclosure_plane_fixed():
    from ccstab.planes import pg2, plane_scheme
    for q in (2, 3):
        sch = plane_scheme(pg2(q)).cc
        y = sesquiclosure(sch.coloring)
        assert y.coloring.same_partition(sch.coloring)


def test_sesquiclosure_shrikhande_vs_orbits():
    rb = rainbow(shrikhande())
    y = sesquiclosure(rb)
    assert y.rank == 4
    assert sorted(y.valencies()) == [1, 3, 6, 6]
    # oracle: equals the pair-orbit partition (cap raised: |Aut| = 192)
    orb = brute_orbits(rb, cap=16)
    assert orb.pair_coloring.same_partition(y.coloring)
    assert orb.group_order == 192


def test_deep_stab_kn():
    res = deep_stab(rainbow(complete(4)), (1, 2, 3, 4))
    assert res.cc.rank == 2
    assert res.trace[-1]["rank_before"] == res.trace[-1]["rank_after"]


def test_deep_stab_separates_union():
    res = deep_stab(rainbow(disjoint_union(shrikhande(), rook44())), (1, 2))
    assert len(res.cc.fibers) >= 2


def test_deep_stab_equals_sesquiclosure_on_12():
    for g in graphs_up_to(5)[::8]:
        rb = rainbow(g)
        a = deep_stab(rb, (1, 2)).cc
        b = sesquiclosure(rb)
        assert a.coloring.same_partition(b.coloring)


def test_sandwich_small():
    # pr2 WL3 <= W <= pr2 WL4 on a small sample
    for g in graphs_up_to(5)[::5]:
        rb = rainbow(g)
        w = deep_stab(rb, (1, 2, 3, 4)).cc.coloring
        low = to_pair_coloring(project(wlm_closure(rb, 3), 2))
        high = to_pair_coloring(project(wlm_closure(rb, 4), 2))
        assert w.refines(low)
        assert high.refines(w)


def test_n_alpha_k4():
    cc = wl_closure(rainbow(complete(4)))
    cache = ExtensionCache(cc)
    assert n_alpha_count(cc, (0, 1), 2, cache) == 2  # n - 2
    assert n_alpha_count(cc, (0, 1), 0, cache) >= 1


def test_n_y_always_positive(petersen_cc):
    cache = ExtensionCache(petersen_cc)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = tuple(rng.integers(0, 10, 2))
        y = tuple(rng.integers(0, 10, 2))
        assert n_y_count(petersen_cc, x, y, cache) >= 1


def test_n_y_relabeling_invariance(petersen_cc):
    # n_y(x) = n_{y^g}(x^g) for automorphisms g from the oracle
    orb = brute_orbits(rainbow(petersen()))
    cache = ExtensionCache(petersen_cc)
    g = next(p for p in orb.generators if not np.array_equal(p, np.arange(10)))
    rng = np.random.default_rng(1)
    for _ in range(6):
        x = tuple(int(v) for v in rng.integers(0, 10, 2))
        y = tuple(int(v) for v in rng.integers(0, 10, 2))
        gx = (int(g[x[0]]), int(g[x[1]]))
        gy = (int(g[y[0]]), int(g[y[1]]))
        assert n_y_count(petersen_cc, x, y, cache) == n_y_count(petersen_cc, gx, gy, cache)


def test_sigma_preserves_automorphisms():
    for g in graphs_up_to(5)[::11]:
        rb = rainbow(g)
        cc = wl_closure(rb)
        orb = brute_orbits(rb)
        cache = ExtensionCache(cc)
        for i in (1, 2, 3, 4):
            out = sigma(cc, i, cache=cache).coloring.color
            for perm in orb.generators:
                assert np.array_equal(out[np.ix_(perm, perm)], out)


def test_sesquiclosure_closure_laws():
    for g in graphs_up_to(5)[::8]:
        rb = rainbow(g)
        y = sesquiclosure(rb)
        assert y.coloring.refines(rb)
        z = sesquiclosure(y.coloring)
        assert z.coloring.same_partition(y.coloring)


def test_sesquiclosure_between_wl_and_pr2wl3():
    for g in graphs_up_to(5)[::7]:
        rb = rainbow(g)
        y = sesquiclosure(rb)
        cc = wl_closure(rb)
        assert y.coloring.refines(cc.coloring)
        p2 = to_pair_coloring(project(wlm_closure(rb, 3), 2))
        assert p2.refines(y.coloring)


def test_sigma_order_randomization():
    # the fixed point is order-independent on the probe set (logged open
    # question; compared, not assumed)
    rng = np.random.default_rng(5)
    for g in graphs_up_to(5)[::13]:
        rb = rainbow(g)
        ref = deep_stab(rb, (1, 2, 3, 4)).cc
        order = tuple(rng.permutation([1, 2, 3, 4]))
        # emulate a scrambled application order by repeated single sigmas
        from ccstab.cc2 import build_cc
        cur = wl_closure(rb)
        for _ in range(8):
            before = cur.rank
            for i in order:
                cur = sigma(cur, i)
            if cur.rank == before:
                break
        assert cur.coloring.same_partition(ref.coloring)


def test_paired_diverges_on_shri_rook():
    with pytest.raises(Diverged):
        paired_deep_stab(rainbow(shrikhande()), rainbow(rook44()), (1, 2))


def test_strict_multiset_mode_refines():
    for g in graphs_up_to(5)[::10]:
        rb = rainbow(g)
        default = deep_stab(rb, (1, 2)).cc
        strict = deep_stab(rb, (1, 2), strict=True).cc
        assert strict.coloring.refines(default.coloring)


def test_two_point_cap():
    import os
    big = rainbow(complete(70))
    with pytest.raises(CapExceeded):
        deep_stab(big, (3,))


def test_trace_structure():
    res = deep_stab(rainbow(shrikhande()), (1, 2))
    assert all(
        {"iteration", "sigma", "rank_before", "rank_after"} <= set(t)
        for t in res.trace
    )
    grew = [t for t in res.trace if t["rank_after"] > t["rank_before"]]
    assert grew  # Shrikhande strictly grows under sigma_2
