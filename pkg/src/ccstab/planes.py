"""Finite projective planes: construction of the Desarguesian planes PG(2,q)
for prime powers q <= 9, ingestion of arbitrary planes from line lists,
incidence graphs, the rank-4 plane scheme on points + lines, and the
regression report for the two-extension / one-point-extension structure.

Ground-set convention: points come first (0..p-1), lines after (p..2p-1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cc2 import (
    CoherentConfiguration,
    build_cc,
    parabolic_report,
    point_extension,
    two_extension,
    validate_cc,
    wl_closure,
)
from .core import CapExceeded, PairColoring, caps, from_matrix


_IRREDUCIBLE = {  # fixed modulus per prime power, low-degree coefficients first
    4: (2, (1, 1, 1)),    # x^2 + x + 1 over GF(2)
    8: (2, (1, 1, 0, 1)),  # x^3 + x + 1 over GF(2)
    9: (3, (1, 0, 1)),    # x^2 + 1 over GF(3)
}

SUPPORTED_ORDERS = (2, 3, 4, 5, 7, 8, 9)


class FiniteField:
    """GF(q) as explicit addition/multiplication tables; the field axioms
    are checked on construction."""

    def __init__(self, q):
        if q in (2, 3, 5, 7):
            self.q = q
            grid = np.arange(q)
            self.add = (grid[:, None] + grid[None, :]) % q
            self.mul = (grid[:, None] * grid[None, :]) % q
        elif q in _IRREDUCIBLE:
            p, modulus = _IRREDUCIBLE[q]
            k = len(modulus) - 1
            self.q = q
            # element i has base-p digits (low degree first): i = a0 + a1 p + ...
            elems = [tuple((i // p ** j) % p for j in range(k)) for i in range(q)]
            index = {e: i for i, e in enumerate(elems)}
            self.add = np.zeros((q, q), dtype=np.int64)
            self.mul = np.zeros((q, q), dtype=np.int64)
            for i, a in enumerate(elems):
                for j, b in enumerate(elems):
                    self.add[i, j] = index[tuple((x + y) % p for x, y in zip(a, b))]
                    prod = [0] * (2 * k - 1)
                    for s, x in enumerate(a):
                        for t, y in enumerate(b):
                            prod[s + t] = (prod[s + t] + x * y) % p
                    for deg in range(len(prod) - 1, k - 1, -1):
                        c = prod[deg]
                        if c:
                            prod[deg] = 0
                            for t in range(k + 1):
                                prod[deg - k + t] = (prod[deg - k + t] - c * modulus[t]) % p
                    self.mul[i, j] = index[tuple(prod[:k])]
        else:
            raise ValueError(f"unsupported field order {q} (supported: {SUPPORTED_ORDERS})")
        self._check_axioms()

    def _check_axioms(self):
        q, add, mul = self.q, self.add, self.mul
        if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
            raise AssertionError("field tables not commutative")
        if not (np.array_equal(add[0], np.arange(q)) and np.array_equal(mul[1], np.arange(q))):
            raise AssertionError("missing additive/multiplicative identity")
        for a in range(q):
            if 0 not in add[a]:
                raise AssertionError(f"{a} has no additive inverse")
            if a != 0 and 1 not in mul[a]:
                raise AssertionError(f"{a} has no multiplicative inverse")
        for a in range(q):
            for b in range(q):
                for c in range(q):
                    if add[add[a, b], c] != add[a, add[b, c]]:
                        raise AssertionError(f"addition not associative at {(a, b, c)}")
                    if mul[mul[a, b], c] != mul[a, mul[b, c]]:
                        raise AssertionError(f"multiplication not associative at {(a, b, c)}")
                    if mul[a, add[b, c]] != add[mul[a, b], mul[a, c]]:
                        raise AssertionError(f"distributivity fails at {(a, b, c)}")


@dataclass(frozen=True)
class IncidenceStructure:
    """A finite projective plane: p = q^2+q+1 points, lines as point sets."""

    n_points: int
    lines: tuple  # tuple of sorted point tuples

    @property
    def q(self):
        return len(self.lines[0]) - 1

    @property
    def n(self):
        """Size of the scheme ground set: points + lines."""
        return self.n_points + len(self.lines)

    def incidence(self):
        mat = np.zeros((self.n_points, len(self.lines)), dtype=bool)
        for j, line in enumerate(self.lines):
            mat[list(line), j] = True
        return mat


class PlaneError(ValueError):
    pass


def validate_plane(n_points, lines):
    """Check the projective-plane axioms; raises PlaneError with a witness
    on the first violation."""
    if not lines:
        raise PlaneError("no lines")
    sizes = {len(set(line)) for line in lines}
    if len(sizes) != 1:
        raise PlaneError(f"line size not constant: {sorted(sizes)}")
    k = sizes.pop()
    q = k - 1
    if q < 2:
        raise PlaneError(f"line size {k} < 3 (degenerate)")
    expect = q * q + q + 1
    if n_points != expect or len(lines) != expect:
        raise PlaneError(
            f"wrong counts for order {q}: {n_points} points / {len(lines)} lines "
            f"(expected {expect} each)"
        )
    for line in lines:
        if any(not 0 <= v < n_points for v in line):
            raise PlaneError(f"line {line} has out-of-range points")
    inc = np.zeros((n_points, len(lines)), dtype=bool)
    for j, line in enumerate(lines):
        inc[list(line), j] = True
    degrees = inc.sum(axis=1)
    if not np.all(degrees == q + 1):
        v = int(np.nonzero(degrees != q + 1)[0][0])
        raise PlaneError(f"point {v} lies on {int(degrees[v])} lines, expected {q + 1}")
    copoint = inc.astype(np.int64) @ inc.T.astype(np.int64)
    off = copoint[~np.eye(n_points, dtype=bool)]
    if off.min() != 1 or off.max() != 1:
        bad = np.nonzero((copoint != 1) & ~np.eye(n_points, dtype=bool))
        u, v = int(bad[0][0]), int(bad[1][0])
        raise PlaneError(f"points {u},{v} lie on {int(copoint[u, v])} common lines")
    coline = inc.T.astype(np.int64) @ inc.astype(np.int64)
    offl = coline[~np.eye(len(lines), dtype=bool)]
    if offl.min() != 1 or offl.max() != 1:
        bad = np.nonzero((coline != 1) & ~np.eye(len(lines), dtype=bool))
        u, v = int(bad[0][0]), int(bad[1][0])
        raise PlaneError(f"lines {u},{v} share {int(coline[u, v])} points")
    # a quadrilateral: four points, no three collinear
    l0 = list(lines[0])
    a, b = l0[0], l0[1]
    rest = [v for v in range(n_points) if v not in set(lines[0])]
    for c in rest:
        for d in rest:
            if c >= d:
                continue
            pts = [a, b, c, d]
            if all(copoint[u, v] == 1 for u, v in itertools.combinations(pts, 2)):
                triple_ok = True
                for tri in itertools.combinations(pts, 3):
                    if any(all(p in set(line) for p in tri) for line in lines):
                        triple_ok = False
                        break
                if triple_ok:
                    return q
    raise PlaneError("no quadrilateral found (degenerate structure)")


def make_plane(n_points, lines) -> IncidenceStructure:
    lines = tuple(tuple(sorted(set(int(v) for v in line))) for line in lines)
    validate_plane(n_points, lines)
    return IncidenceStructure(n_points, lines)


def pg2(q) -> IncidenceStructure:
    """The Desarguesian plane: points are the projective classes of
    GF(q)^3 minus zero, lines the kernels of the linear forms."""
    if q not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {q} (supported: {SUPPORTED_ORDERS})")
    f = FiniteField(q)
    pts = []
    for v in itertools.product(range(q), repeat=3):
        if any(v):
            first = next(x for x in v if x)
            if first == 1:  # normalized representative
                pts.append(v)
    index = {v: i for i, v in enumerate(pts)}
    lines = []
    for form in pts:
        line = [
            index[v] for v in pts
            if f.add[f.add[f.mul[form[0], v[0]], f.mul[form[1], v[1]]], f.mul[form[2], v[2]]] == 0
        ]
        lines.append(tuple(sorted(line)))
    return make_plane(len(pts), lines)


def dual_plane(p: IncidenceStructure) -> IncidenceStructure:
    """Swap the roles of points and lines via the incidence transpose."""
    inc = p.incidence()
    lines = [tuple(sorted(np.nonzero(inc[v])[0].tolist())) for v in range(p.n_points)]
    return make_plane(len(p.lines), lines)


# --- file format: optional "plane <q>" header, then one line of point ids per plane line

def loads_plane(text: str) -> IncidenceStructure:
    declared = None
    lines = []
    n_points = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        row = raw.strip()
        if not row or row.startswith("#"):
            continue
        parts = row.split()
        if parts[0] == "plane":
            declared = int(parts[1])
            continue
        try:
            pts = [int(v) for v in parts]
        except ValueError:
            raise PlaneError(f"line {lineno}: cannot parse {raw!r}") from None
        lines.append(pts)
        n_points = max(n_points, max(pts))
    n_points += 1
    if declared is not None:
        n_points = max(n_points, declared * declared + declared + 1)
    plane = make_plane(n_points, lines)
    if declared is not None and plane.q != declared:
        raise PlaneError(f"declared order {declared} but line size gives {plane.q}")
    return plane


def load_plane(path) -> IncidenceStructure:
    with open(path) as fh:
        return loads_plane(fh.read())


def dumps_plane(p: IncidenceStructure) -> str:
    out = [f"plane {p.q}"]
    out += [" ".join(str(v) for v in line) for line in p.lines]
    return "\n".join(out) + "\n"


def incidence_graph(p: IncidenceStructure) -> PairColoring:
    """The 3-class rainbow of the bipartite point-line incidence graph."""
    from .graphs import graph, rainbow

    edges = [
        (v, p.n_points + j)
        for j, line in enumerate(p.lines)
        for v in line
    ]
    return rainbow(graph(p.n, edges, name=f"incidence-q{p.q}"))


@dataclass(frozen=True)
class PlaneScheme:
    """The rank-4 symmetric scheme on points + lines: classes are the
    diagonal (0), distinct same-kind pairs (1), incident pairs (2), and
    non-incident pairs (3)."""

    cc: CoherentConfiguration
    plane: IncidenceStructure

    S0, S1, S2, S3 = 0, 1, 2, 3

    @property
    def coloring(self):
        return self.cc.coloring


def plane_scheme(p: IncidenceStructure) -> PlaneScheme:
    n, np_ = p.n, p.n_points
    inc = p.incidence()
    mat = np.full((n, n), PlaneScheme.S1, dtype=np.int64)
    mat[:np_, np_:] = np.where(inc, PlaneScheme.S2, PlaneScheme.S3)
    mat[np_:, :np_] = mat[:np_, np_:].T
    np.fill_diagonal(mat, PlaneScheme.S0)
    coloring = PairColoring(n, 4, mat)
    rep = validate_cc(coloring)
    if not rep.ok:
        raise PlaneError(f"plane scheme is not coherent: {rep.summary()}")
    return PlaneScheme(build_cc(coloring), p)


def _sorted_fibers(ext: CoherentConfiguration, q):
    """Extension fibers in the (1, q^2+q, q+1, q^2) order."""
    want = [1, q * q + q, q + 1, q * q]
    if sorted(len(f) for f in ext.fibers) != sorted(want):
        raise PlaneError(
            f"one-point extension fiber sizes {sorted(len(f) for f in ext.fibers)} "
            f"!= {sorted(want)}"
        )
    out = []
    used = set()
    for size in want:
        i = next(j for j, f in enumerate(ext.fibers) if len(f) == size and j not in used)
        used.add(i)
        out.append(ext.fibers[i])
    return out


def one_point_block_table(ext: CoherentConfiguration, q):
    fibs = _sorted_fibers(ext, q)
    table = np.zeros((4, 4), dtype=np.int64)
    col = ext.coloring.color
    for i in range(4):
        for j in range(4):
            table[i, j] = len(np.unique(col[np.ix_(fibs[i], fibs[j])]))
    return table


def one_point_class_names(scheme: PlaneScheme, ext: CoherentConfiguration) -> dict:
    """q-independent names for the classes of a one-point extension of a
    plane scheme: (left fiber, right fiber, parent scheme class, role),
    where the role separates the collinear split inside the same-kind
    block.  Names are comparable across different orders, which is what the
    cross-q intersection-number checks key on."""
    q = scheme.plane.q
    fibs = _sorted_fibers(ext, q)
    fiber_idx = np.empty(ext.n, dtype=np.int64)
    for i, f in enumerate(fibs):
        fiber_idx[f] = i
    base = scheme.cc.coloring.color
    extc = ext.coloring.color
    names = {}
    for cls in range(ext.rank):
        rows, cols = np.nonzero(extc == cls)
        i, j = int(fiber_idx[rows[0]]), int(fiber_idx[cols[0]])
        k = int(base[rows[0], cols[0]])
        role = ""
        if i == j == 1 and k == PlaneScheme.S1:
            role = "collinear" if int(ext.left_valency[cls]) == q - 1 else "skew"
        name = (i, j, k, role)
        if name in names:
            raise PlaneError(f"one-point class name {name} is not unique")
        names[name] = cls
    return names


def collinearity_identity_check(scheme: PlaneScheme, alpha=0) -> bool:
    """The collinear-with-alpha relation of X_alpha equals the composition
    of the incidence relations through the lines on alpha, minus the
    diagonal: r = (s_122 . s_221) \\ 1_{alpha s_1}."""
    cc = scheme.cc
    base = cc.coloring.color
    n = cc.n
    ext = point_extension(cc, (alpha,))
    s1_set = np.nonzero(base[alpha] == PlaneScheme.S1)[0]
    s2_set = np.nonzero(base[alpha] == PlaneScheme.S2)[0]
    a_block = (base[np.ix_(s1_set, s2_set)] == PlaneScheme.S2)   # s_122
    b_block = (base[np.ix_(s2_set, s1_set)] == PlaneScheme.S2)   # s_221
    comp = a_block @ b_block
    np.fill_diagonal(comp, False)
    # r from the extension: the class of a collinear-with-alpha pair
    inc = scheme.plane.incidence()
    r_expect = np.zeros((len(s1_set), len(s1_set)), dtype=bool)
    pos = {v: i for i, v in enumerate(s1_set)}
    if alpha < scheme.plane.n_points:
        through = np.nonzero(inc[alpha])[0]
        for line_j in through:
            members = [v for v in np.nonzero(inc[:, line_j])[0] if v != alpha]
            for u, v in itertools.permutations(members, 2):
                r_expect[pos[u], pos[v]] = True
    else:
        on_alpha = set(scheme.plane.lines[alpha - scheme.plane.n_points])
        for pt in on_alpha:
            lines_thru = [
                scheme.plane.n_points + j
                for j in np.nonzero(inc[pt])[0]
                if scheme.plane.n_points + j != alpha
            ]
            for u, v in itertools.permutations(lines_thru, 2):
                r_expect[pos[u], pos[v]] = True
    if not np.array_equal(comp.astype(bool), r_expect):
        return False
    # and r is a single class of X_alpha
    sub = ext.coloring.color[np.ix_(s1_set, s1_set)]
    return len(np.unique(sub[r_expect])) == 1


def plane_report(p: IncidenceStructure, with_two_extension="auto") -> dict:
    """The regression report for one plane: scheme data, the two-extension
    rank with the parabolic row counts, and the one-point extension
    structure (rank, fiber sizes, block table, identities)."""
    scheme = plane_scheme(p)
    q = p.q
    report = {
        "q": q,
        "scheme_rank": scheme.cc.rank,
        "valencies": [int(v) for v in scheme.cc.left_valency],
    }
    ext1 = point_extension(scheme.cc, (0,))
    fibs = _sorted_fibers(ext1, q)
    report["one_point_rank"] = ext1.rank
    report["one_point_fiber_sizes"] = [len(f) for f in fibs]
    report["one_point_block_table"] = one_point_block_table(ext1, q).tolist()
    report["collinearity_identity_check"] = collinearity_identity_check(scheme)

    run_two = with_two_extension is True or (with_two_extension == "auto" and q <= 4)
    if run_two and scheme.cc.n <= caps()["two_ext_n"]:
        res = two_extension(scheme.cc)
        par = parabolic_report(res)
        report["two_extension_rank"] = res.extension.rank
        report["parabolic_counts"] = par["row_counts"]
        report["parabolic_classes_inside"] = par["classes_inside"]
        # Eq. (070123x): X_alpha equals the Gamma-restriction of the
        # 2-extension pulled back through f_alpha: (beta, alpha) -> beta
        n = scheme.cc.n
        gamma = np.arange(n) * n + 0
        sub = res.extension.coloring.color[np.ix_(gamma, gamma)]
        report["eq_070123x_check"] = bool(
            from_matrix(sub).same_partition(ext1.coloring)
        )
    else:
        report["two_extension_skipped"] = (
            f"two-extension not computed (q={q}, with_two_extension={with_two_extension!r}); "
            "pass with_two_extension=True to force"
        )
    return report
