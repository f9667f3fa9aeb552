import numpy as np
import pytest

from ccstab import (
    intersect_cc,
    intersection_numbers,
    parabolic_report,
    point_extension,
    restrict,
    tensor_square,
    two_closure,
    two_extension,
    validate_cc,
    wl_closure,
)
from ccstab.cc2 import build_cc, cc_report
from ccstab.core import CapExceeded, from_matrix
from ccstab.graphs import (
    complete,
    cycle,
    disjoint_union,
    graphs_up_to,
    heawood,
    path,
    petersen,
    rainbow,
    shrikhande,
)
from ccstab.oracles import brute_orbits


def test_k4_closure_rank2():
    cc = wl_closure(rainbow(complete(4)))
    assert cc.rank == 2
    assert cc.valencies() == [1, 3]


def test_petersen_closure_equals_orbits(petersen_cc):
    # oracle route: the pair-orbit partition of Aut
    orb = brute_orbits(rainbow(petersen()))
    assert petersen_cc.rank == 3
    assert petersen_cc.valencies() == [1, 3, 6]
    assert orb.pair_coloring.same_partition(petersen_cc.coloring)
    assert validate_cc(petersen_cc.coloring).ok


def test_heawood_closure_rank4(heawood_cc):
    assert heawood_cc.rank == 4
    assert [int(v) for v in heawood_cc.left_valency] == [1, 6, 3, 4]


def test_intersection_numbers_k4():
    cc = wl_closure(rainbow(complete(4)))
    t = intersection_numbers(cc)
    edge = 1  # canonical order: diagonal first
    assert t[edge, edge, edge] == 2


def test_intersection_numbers_petersen(petersen_cc):
    t = intersection_numbers(petersen_cc)
    edge = int(petersen_cc.coloring.color[
        np.nonzero(rainbow(petersen()).color == 1)[0][0],
        np.nonzero(rainbow(petersen()).color == 1)[1][0],
    ])
    # triangle-free: adjacent pairs have no common neighbors
    assert t[edge, edge, edge] == 0
    # direct count oracle
    adj = rainbow(petersen()).color == 1
    a, b = map(int, np.argwhere(adj)[0])
    assert int((adj[a] & adj[:, b]).sum()) == 0


def test_intersection_numbers_pg22(heawood_cc):
    # two distinct points lie on exactly one common line (and dually)
    t = intersection_numbers(heawood_cc)
    s1, s2 = 1, 2  # same-kind, incident (canonical class order)
    assert t[s2, s2, s1] == 1
    # independent count over the built plane
    from ccstab.planes import pg2
    p = pg2(2)
    inc = p.incidence()
    common = inc.astype(int) @ inc.astype(int).T
    off = common[~np.eye(7, dtype=bool)]
    assert off.min() == off.max() == 1


def test_validate_cc_trivial():
    triv = from_matrix(np.eye(4, dtype=int))
    assert validate_cc(triv).ok


def test_validate_cc_path_witness():
    rep = validate_cc(rainbow(path(3)))
    assert rep.c1_ok and rep.c2_ok and not rep.c3_ok
    r, s, t, (a, b), (a2, b2) = rep.c3_witness
    p = rainbow(path(3))
    assert p.color[a, b] == t and p.color[a2, b2] == t
    count1 = sum(1 for g in range(3) if p.color[a, g] == r and p.color[g, b] == s)
    count2 = sum(1 for g in range(3) if p.color[a2, g] == r and p.color[g, b2] == s)
    assert count1 != count2


def test_closure_outputs_validate():
    for g in graphs_up_to(5)[::7]:
        cc = wl_closure(rainbow(g))
        assert validate_cc(cc.coloring).ok


def test_restrict_full_is_identity(petersen_cc):
    r = restrict(petersen_cc, np.arange(10))
    assert r.coloring.same_partition(petersen_cc.coloring)


def test_restrict_union_component():
    cc = wl_closure(rainbow(disjoint_union(complete(3), complete(4))))
    assert len(cc.fibers) == 2
    k3_fiber = next(f for f in cc.fibers if len(f) == 3)
    sub = restrict(cc, k3_fiber)
    assert sub.rank == 2 and sub.n == 3


def test_restrict_rejects_non_fiber_union():
    cc = wl_closure(rainbow(disjoint_union(complete(3), complete(4))))
    with pytest.raises(ValueError):
        restrict(cc, [0, 1])


def test_tensor_square_rank_multiplies():
    two = from_matrix(np.eye(2, dtype=int))
    cc = build_cc(two)
    sq = tensor_square(cc)
    assert sq.rank == 4 and sq.n == 4


def test_tensor_square_definition_k3():
    # ((x1,x2),(y1,y2)) and ((u1,u2),(v1,v2)) share a class iff the base
    # classes agree componentwise; checked exhaustively on K3
    cc = wl_closure(rainbow(complete(3)))
    sq = tensor_square(cc)
    c = cc.coloring.color
    s = sq.coloring.color
    import itertools
    for x1, x2, y1, y2, u1, u2, v1, v2 in itertools.product(range(3), repeat=8):
        same_sq = s[x1 * 3 + x2, y1 * 3 + y2] == s[u1 * 3 + u2, v1 * 3 + v2]
        same_base = c[x1, y1] == c[u1, v1] and c[x2, y2] == c[u2, v2]
        assert same_sq == same_base


def test_tensor_square_pg22(heawood_cc):
    sq = tensor_square(heawood_cc)
    assert sq.rank == 16
    assert validate_cc(sq.coloring).ok


def test_point_extension_kn_rank5():
    for n in (4, 5, 6):
        cc = wl_closure(rainbow(complete(n)))
        ext = point_extension(cc, (0,))
        assert ext.rank == 5
        # oracle: orbit partition of the stabilizer
        from ccstab.graphs import graph
        colored = graph(n, complete(n).edges, colors=[1] + [0] * (n - 1))
        orb = brute_orbits(rainbow(colored))
        assert orb.pair_coloring.same_partition(ext.coloring)


def test_point_extension_shrikhande_fibers(shrikhande_cc):
    ext = point_extension(shrikhande_cc, (3,))
    assert len(ext.fibers) == 4


def test_two_extension_k3():
    cc = wl_closure(rainbow(complete(3)))
    res = two_extension(cc)
    rep = parabolic_report(res)
    assert rep["classes_inside"] >= 1
    assert validate_cc(res.extension.coloring).ok


def test_two_closure_ge_base():
    cc = wl_closure(rainbow(cycle(5)))
    bar = two_closure(cc)
    assert bar.coloring.refines(cc.coloring)


def test_parabolic_report_rejects_non_extension():
    # K9's off-diagonal class holds pairs inside and outside e, so e is not
    # a union of classes there
    fake_ext = wl_closure(rainbow(complete(9)))
    base = wl_closure(rainbow(complete(3)))
    from ccstab.cc2 import TwoExtensionResult
    with pytest.raises(ValueError):
        parabolic_report(TwoExtensionResult(fake_ext, base))


def test_parabolic_of_tensor_square_is_union(petersen_cc):
    # over a scheme, e is a parabolic of the bare tensor square already
    sq = tensor_square(petersen_cc)
    from ccstab.cc2 import TwoExtensionResult
    rep = parabolic_report(TwoExtensionResult(sq, petersen_cc))
    assert rep["classes_inside"] == petersen_cc.rank


def test_intersect_cc_identity(petersen_cc):
    out = intersect_cc(petersen_cc, petersen_cc)
    assert out.coloring.same_partition(petersen_cc.coloring)


def test_intersect_cc_with_discrete(petersen_cc):
    discrete = build_cc(from_matrix(np.arange(100).reshape(10, 10)), validate=True)
    out = intersect_cc(discrete, petersen_cc)
    assert out.coloring.same_partition(petersen_cc.coloring)


def test_intersect_point_extensions(petersen_cc):
    a = point_extension(petersen_cc, (0,))
    b = point_extension(petersen_cc, (7,))
    out = intersect_cc(a, b)
    assert validate_cc(out.coloring).ok
    assert out.coloring.refines(petersen_cc.coloring)


def test_closure_operator_laws():
    for g in graphs_up_to(5)[::5]:
        rb = rainbow(g)
        cc = wl_closure(rb)
        assert cc.coloring.refines(rb)
        assert wl_closure(cc.coloring).coloring.same_partition(cc.coloring)
    # monotone: closure of a finer input refines closure of a coarser one
    fine = rainbow(cycle(6))
    coarse = from_matrix(np.eye(6, dtype=int))
    assert wl_closure(fine).coloring.refines(wl_closure(coarse).coloring)


def test_closure_preserves_automorphisms():
    for g in graphs_up_to(5)[::6]:
        rb = rainbow(g)
        cc = wl_closure(rb)
        orb = brute_orbits(rb)
        col = cc.coloring.color
        for perm in orb.generators:
            assert np.array_equal(col[np.ix_(perm, perm)], col)
        # closure is coarser than the orbit partition
        assert orb.pair_coloring.refines(cc.coloring)


def test_cap_exceeded():
    big = from_matrix(np.eye(600, dtype=int))
    with pytest.raises(CapExceeded):
        wl_closure(big)


def test_cc_report_shape(heawood_cc):
    rep = cc_report(heawood_cc)
    assert rep["rank"] == 4
    assert rep["valencies"] == [1, 6, 3, 4]
    assert rep["fibers"] == [14]
