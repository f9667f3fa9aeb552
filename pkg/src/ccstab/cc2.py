"""Coherent configurations and the classical (2-dimensional) WL closure.

A coherent configuration is a pair coloring whose diagonal is a union of
classes, whose classes are closed under transposition, and whose triple
counts c_{r,s}^t = |a r  ∩  b s*| are constant over the pairs (a, b) of each
class t.  The closure engine iterates the triple-count refinement until the
color count stabilizes; its fixed points are exactly the coherent
configurations, so closure outputs are coherent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import refine
from .core import (
    CapExceeded,
    PairColoring,
    canonical_renumber,
    check_cap,
    from_matrix,
    join_partitions,
    validate_rainbow,
)


@dataclass(frozen=True)
class CoherentConfiguration:
    coloring: PairColoring
    fibers: list                 # list of point index arrays
    fiber_of: np.ndarray         # point -> fiber index
    supports: np.ndarray         # (R, 2) left/right fiber index per class
    left_valency: np.ndarray     # per class: |alpha s| on the left support
    right_valency: np.ndarray
    iterations: int = 0

    @property
    def n(self):
        return self.coloring.n

    @property
    def rank(self):
        return self.coloring.R

    def class_sizes(self):
        return np.bincount(self.coloring.color.ravel(), minlength=self.rank)

    def is_homogeneous(self):
        return len(self.fibers) == 1

    def valencies(self):
        """Sorted left valencies; for schemes these are the usual valencies."""
        return sorted(int(v) for v in self.left_valency)


def build_cc(p: PairColoring, iterations=0, validate=False) -> CoherentConfiguration:
    """Attach fiber/support/valency structure to a validated pair coloring.

    With validate=True the full (C1)-(C3) check runs first; otherwise only
    the structural consistency of fibers, supports and valencies is enforced
    (closure outputs are coherent by construction).
    """
    if validate:
        rep = validate_cc(p)
        if not rep.ok:
            raise ValueError(f"not a coherent configuration: {rep.summary()}")
    n, R = p.n, p.R
    diag = p.color.diagonal()
    diag_colors = np.unique(diag)
    off = p.color[~np.eye(n, dtype=bool)]
    if off.size and np.intersect1d(diag_colors, np.unique(off)).size:
        raise ValueError("diagonal and off-diagonal classes overlap (C1 fails)")
    color_to_fiber = {int(c): i for i, c in enumerate(diag_colors)}
    fiber_of = np.array([color_to_fiber[int(c)] for c in diag], dtype=np.int64)
    fibers = [np.nonzero(fiber_of == i)[0] for i in range(len(diag_colors))]

    flat = p.color.ravel()
    rows = np.repeat(np.arange(n), n)
    cols = np.tile(np.arange(n), n)
    supports = np.empty((R, 2), dtype=np.int64)
    for side, pts in ((0, rows), (1, cols)):
        fib = fiber_of[pts]
        lo = np.full(R, n + 1, dtype=np.int64)
        hi = np.full(R, -1, dtype=np.int64)
        np.minimum.at(lo, flat, fib)
        np.maximum.at(hi, flat, fib)
        if not np.array_equal(lo, hi):
            raise ValueError("a class crosses a fiber product (not coherent)")
        supports[:, side] = lo
    sizes = np.bincount(flat, minlength=R)
    left_sizes = np.array([len(fibers[f]) for f in supports[:, 0]])
    right_sizes = np.array([len(fibers[f]) for f in supports[:, 1]])
    if np.any(sizes % left_sizes) or np.any(sizes % right_sizes):
        raise ValueError("class size not divisible by support size (not coherent)")
    return CoherentConfiguration(
        p, fibers, fiber_of, supports,
        sizes // left_sizes, sizes // right_sizes, iterations,
    )


def wl_closure(x: PairColoring, distinguished=()) -> CoherentConfiguration:
    """Coherent closure WL(X, T): the minimal coherent configuration whose
    relations include every class of x and every distinguished pair set."""
    check_cap("pair_n", x.n)
    return _closure(x, distinguished)


def _closure(x, distinguished=()):
    keys = refine.closure_keys(x.color, distinguished)
    colors, r0 = refine.shared_colors_from_keys([keys])
    res = refine.refine_joint(colors, r0)
    out = canonical_renumber(PairColoring(x.n, res.R, res.colors[0].astype(np.int64)))
    return build_cc(out, iterations=res.rounds)


@dataclass(frozen=True)
class CCReport:
    c1_ok: bool
    c2_ok: bool
    c3_ok: bool
    c1_witness: tuple | None = None
    c2_witness: tuple | None = None
    c3_witness: tuple | None = None  # (r, s, t, (a,b), (a2,b2))

    @property
    def ok(self):
        return self.c1_ok and self.c2_ok and self.c3_ok

    def summary(self):
        bits = []
        for name, ok, wit in (
            ("C1", self.c1_ok, self.c1_witness),
            ("C2", self.c2_ok, self.c2_witness),
            ("C3", self.c3_ok, self.c3_witness),
        ):
            bits.append(f"{name} {'ok' if ok else f'FAIL {wit}'}")
        return "; ".join(bits)


def validate_cc(p: PairColoring) -> CCReport:
    """Check (C1)-(C3); on a (C3) failure the witness names two pairs of one
    class whose triple counts differ for some color pair (r, s)."""
    rb = validate_rainbow(p)
    res = refine.refine_joint([p.color], p.R, max_rounds=1)
    c3_witness = None
    if res.R != p.R:
        c3_witness = _c3_witness(p)
    return CCReport(rb.c1_ok, rb.c2_ok, c3_witness is None,
                    rb.c1_witness, rb.c2_witness, c3_witness)


def _c3_witness(p):
    n, R = p.n, p.R
    c = p.color.astype(np.int64)
    reps = {}
    for a in range(n):
        codes = np.sort(c[a, None, :].T * R + c[:, :], axis=0)  # (gamma, b)
        for b in range(n):
            t = int(c[a, b])
            sig = codes[:, b].tobytes()
            if t in reps and reps[t][0] != sig:
                prev_sig, (a2, b2) = reps[t]
                prev = np.frombuffer(prev_sig, dtype=np.int64)
                cur = codes[:, b]
                diff = np.setxor1d(prev, cur)
                code = int(diff[0])
                return (code // R, code % R, t, (a2, b2), (a, b))
            reps.setdefault(t, (sig, (a, b)))
    return None


@dataclass(frozen=True)
class IntersectionTensor:
    tensor: np.ndarray  # (R, R, R): tensor[r, s, t] = c_{r,s}^t
    spot_checked: bool = True

    def __getitem__(self, key):
        return self.tensor[key]


def intersection_numbers(cc: CoherentConfiguration) -> IntersectionTensor:
    """The full tensor c_{r,s}^t, computed at one representative pair per
    class and spot-checked at a second; the valency identity
    sum_t n_t c_{r,s}^t = n_r n_s (matching supports) is asserted."""
    p = cc.coloring
    n, R = p.n, p.R
    c = p.color.astype(np.int64)
    tensor = np.zeros((R, R, R), dtype=np.int64)
    first = {}
    second = {}
    flat = c.ravel()
    order = np.argsort(flat, kind="stable")
    sizes = np.bincount(flat, minlength=R)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    for t in range(R):
        lo = bounds[t]
        first[t] = (int(order[lo]) // n, int(order[lo]) % n)
        mid = int(order[(bounds[t] + bounds[t + 1]) // 2])
        second[t] = (mid // n, mid % n)
    for t in range(R):
        a, b = first[t]
        tensor[:, :, t] = np.bincount(c[a, :] * R + c[:, b], minlength=R * R).reshape(R, R)
        a2, b2 = second[t]
        check = np.bincount(c[a2, :] * R + c[:, b2], minlength=R * R).reshape(R, R)
        if not np.array_equal(tensor[:, :, t], check):
            raise ValueError(
                f"triple counts differ between representatives of class {t} "
                f"({first[t]} vs {second[t]}): input is not coherent"
            )
    nl = cc.left_valency
    lhs = np.einsum("rst,t->rs", tensor, nl)
    compose = cc.supports[:, 1][:, None] == cc.supports[:, 0][None, :]
    expect = np.where(compose, nl[:, None] * nl[None, :], 0)
    if not np.array_equal(lhs, expect):
        raise ValueError("valency identity sum_t n_t c_{r,s}^t = n_r n_s failed")
    return IntersectionTensor(tensor)


def restrict(cc: CoherentConfiguration, delta) -> CoherentConfiguration:
    """Restriction to a homogeneity set (a union of fibers)."""
    delta = np.asarray(sorted(set(int(d) for d in np.asarray(delta).ravel())))
    hit = np.unique(cc.fiber_of[delta])
    covered = np.concatenate([cc.fibers[f] for f in hit])
    if len(covered) != len(delta) or not np.array_equal(np.sort(covered), delta):
        raise ValueError("restriction set is not a union of fibers")
    sub = cc.coloring.color[np.ix_(delta, delta)]
    return build_cc(from_matrix(sub))


def tensor_square(cc: CoherentConfiguration) -> CoherentConfiguration:
    """The configuration on Omega^2 with classes r (x) s; rank is rank^2."""
    check_cap("two_ext_n", cc.n)
    c = cc.coloring.color.astype(np.int64)
    n, R = cc.n, cc.rank
    ones = np.ones((n, n), dtype=np.int64)
    big = np.kron(c * R, ones) + np.kron(ones, c)
    return build_cc(PairColoring(n * n, R * R, big))


def point_extension(cc: CoherentConfiguration, y) -> CoherentConfiguration:
    """m-point extension: the closure with each singleton (y_i, y_i)
    distinguished."""
    y = tuple(int(v) for v in (y if np.iterable(y) else (y,)))
    if any(not 0 <= v < cc.n for v in y):
        raise ValueError(f"extension points {y} out of range")
    check_cap("pair_n", cc.n)
    keys = refine.extension_keys(cc.coloring.color, y)
    colors, r0 = refine.shared_colors_from_keys([keys])
    res = refine.refine_joint(colors, r0)
    out = canonical_renumber(PairColoring(cc.n, res.R, res.colors[0].astype(np.int64)))
    return build_cc(out, iterations=res.rounds)


@dataclass(frozen=True)
class TwoExtensionResult:
    extension: CoherentConfiguration  # on Omega^2
    base: CoherentConfiguration       # on Omega

    @property
    def rank(self):
        return self.extension.rank


def two_extension(cc: CoherentConfiguration) -> TwoExtensionResult:
    """Closure of the tensor square with the diagonal distinguished."""
    check_cap("two_ext_n", cc.n)
    tsq = tensor_square(cc)
    n = cc.n
    diag_idx = np.arange(n) * n + np.arange(n)
    mask = np.zeros((n * n, n * n), dtype=bool)
    mask[np.ix_(diag_idx, diag_idx)] = np.eye(n, dtype=bool)
    ext = _closure(tsq.coloring, [mask])
    return TwoExtensionResult(ext, cc)


def two_closure(cc: CoherentConfiguration) -> CoherentConfiguration:
    """Restriction of the 2-extension to the diagonal, mapped back to Omega
    through (a, a) -> a.  Always >= the input configuration."""
    ext = two_extension(cc).extension
    n = cc.n
    diag_idx = np.arange(n) * n + np.arange(n)
    sub = ext.coloring.color[np.ix_(diag_idx, diag_idx)]
    out = build_cc(from_matrix(sub))
    if not out.coloring.refines(cc.coloring):
        raise AssertionError("2-closure lost classes of the input")
    return out


def parabolic_report(res: TwoExtensionResult) -> dict:
    """Classes of the 2-extension inside the parabolic e whose classes are
    Omega x {a}, grouped by the size of {a, b, g} and the base relations
    among its distinct elements.

    Row counts follow the taxonomy: singleton; two distinct elements; three
    distinct with all pairwise base relations equal; three distinct, mixed.
    """
    ext, base = res.extension, res.base
    n = base.n
    N = n * n
    color = ext.coloring.color
    second = np.tile(np.arange(N) % n, (N, 1))
    in_e = second == second.T
    inside = np.unique(color[in_e])
    outside = np.unique(color[~in_e]) if n > 1 else np.array([], dtype=int)
    if np.intersect1d(inside, outside).size:
        bad = int(np.intersect1d(inside, outside)[0])
        raise ValueError(
            f"e is not a union of classes (class {bad} crosses it): "
            "input is not a 2-extension"
        )
    rows = []
    bc = base.coloring.color
    for cls in inside:
        flat = np.nonzero((color == cls) & in_e)
        pq = (int(flat[0][0]), int(flat[1][0]))
        beta, alpha = divmod(pq[0], n)
        gamma = pq[1] // n
        members = sorted({alpha, beta, gamma})
        pair_colors = tuple(sorted(
            int(bc[u, v]) for u, v in
            [(u, v) for u, v in
             [(members[i], members[j])
              for i in range(len(members)) for j in range(i + 1, len(members))]]
        ))
        rows.append({
            "class": int(cls),
            "set_size": len(members),
            "base_pattern": pair_colors,
            "representative": {"alpha": alpha, "beta": beta, "gamma": gamma},
        })
    counts = [0, 0, 0, 0]
    for row in rows:
        if row["set_size"] == 1:
            counts[0] += 1
        elif row["set_size"] == 2:
            counts[1] += 1
        elif len(set(row["base_pattern"])) == 1:
            counts[2] += 1
        else:
            counts[3] += 1
    return {
        "classes_inside": len(rows),
        "row_counts": counts,
        "rows": rows,
        "rank": ext.rank,
    }


def intersect_cc(a: CoherentConfiguration, b: CoherentConfiguration) -> CoherentConfiguration:
    """Intersection of coherent configurations: the join of their partitions
    (which is again coherent; asserted here)."""
    if a.n != b.n:
        raise ValueError(f"ground set mismatch: {a.n} != {b.n}")
    joined = join_partitions(a.coloring, b.coloring)
    return build_cc(joined, validate=True)


def cc_report(cc: CoherentConfiguration, with_tensor=False) -> dict:
    report = {
        "rank": cc.rank,
        "fibers": [len(f) for f in cc.fibers],
        "valencies": [int(v) for v in cc.left_valency],
        "iterations": cc.iterations,
    }
    if with_tensor:
        report["intersection_numbers"] = intersection_numbers(cc).tensor.tolist()
    return report
