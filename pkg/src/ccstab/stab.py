"""Depth-1 stabilization: the equivalences ~1..~4, the refinement operators
sigma_i, their fixed point W, and the sesquiclosure (the sigma_{1,2} fixed
point).

The point of contact with point extensions is the joint refinement engine:
all one-point (or two-point) extensions of a configuration are refined in a
single shared-naming run.  The identity algebraic automorphism then has an
aa'-extension exactly when the final censuses of the two extension
structures agree, and the count n_y(x) becomes a lookup: the number of y'
whose extension census matches y's and whose final color at the cell x
equals y's.

Running two configurations through the same pipeline (every stage compared
census-by-census) decides equivalence: any divergence is a certificate that
no suitable algebraic isomorphism exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import refine
from .cc2 import CoherentConfiguration, build_cc
from .core import PairColoring, canonical_renumber, check_cap

_SIGMA_INDICES = (1, 2, 3, 4)


class Diverged(Exception):
    """A paired run found a census divergence (inequivalence certificate)."""

    def __init__(self, stage, round_index, census_a, census_b):
        self.stage = stage
        self.round_index = round_index
        self.census_a = census_a
        self.census_b = census_b
        super().__init__(f"censuses diverge at {stage}, round {round_index}")

    def certificate(self):
        a = np.asarray(self.census_a)
        b = np.asarray(self.census_b)
        width = max(len(a), len(b))
        a = np.pad(a, (0, width - len(a)))
        b = np.pad(b, (0, width - len(b)))
        diffs = np.nonzero(a != b)[0][:8]
        return {
            "stage": self.stage,
            "round": self.round_index,
            "diverging_colors": [
                {"color": int(c), "count_a": int(a[c]), "count_b": int(b[c])}
                for c in diffs
            ],
        }


def _canonical_labels(byte_keys):
    order = {b: i for i, b in enumerate(sorted(set(byte_keys)))}
    return np.array([order[b] for b in byte_keys], dtype=np.int64)


def _final_census_labels(res, n_jobs):
    keys = [
        np.bincount(res.colors[j].ravel(), minlength=res.R).astype(np.int64).tobytes()
        for j in range(n_jobs)
    ]
    return _canonical_labels(keys), keys


@dataclass
class PointExtensionData:
    """Joint refinement of every one-point extension of one or two sides."""

    colors: list       # per side: (n, n, n) int32, shared ids
    labels: list       # per side: (n,) census labels (shared across sides)
    census_bytes: list # per side: list of n census byte keys
    R: int


@dataclass
class PairExtensionData:
    """Joint refinement of every two-point extension; jobs indexed by the
    flat pair a*n+b."""

    colors: list  # per side: (n*n, n, n) int32
    labels: list  # per side: (n*n,)
    R: int


def _point_jobs(colors_list):
    n = colors_list[0].shape[0]
    jobs = (
        refine.extension_keys(side_colors, (a,))
        for side_colors in colors_list
        for a in range(n)
    )
    flats, r0 = refine.shared_colors_from_keys(jobs)
    res = refine.refine_joint(flats, r0)
    labels, keys = _final_census_labels(res, len(colors_list) * n)
    per_side_colors, per_side_labels, per_side_keys = [], [], []
    for s in range(len(colors_list)):
        per_side_colors.append(np.stack(res.colors[s * n:(s + 1) * n]))
        per_side_labels.append(labels[s * n:(s + 1) * n])
        per_side_keys.append(keys[s * n:(s + 1) * n])
    return PointExtensionData(per_side_colors, per_side_labels, per_side_keys, res.R)


def _pair_jobs(colors_list):
    n = colors_list[0].shape[0]
    check_cap("two_ext_n", n)
    jobs = (
        refine.extension_keys(side_colors, (a, b))
        for side_colors in colors_list
        for a in range(n)
        for b in range(n)
    )
    flats, r0 = refine.shared_colors_from_keys(jobs)
    res = refine.refine_joint(flats, r0)
    labels, _ = _final_census_labels(res, len(colors_list) * n * n)
    per_side_colors, per_side_labels = [], []
    for s in range(len(colors_list)):
        per_side_colors.append(np.stack(res.colors[s * n * n:(s + 1) * n * n]))
        per_side_labels.append(labels[s * n * n:(s + 1) * n * n])
    return PairExtensionData(per_side_colors, per_side_labels, res.R)


def _count_table(values, group_of_row):
    """values: (rows, cols) ints; count[r, c] = #{r' : group(r') == group(r)
    and values[r', c] == values[r, c]}."""
    rows, cols = values.shape
    key = group_of_row[:, None].astype(np.int64) * (int(values.max()) + 1) + values
    flat = key * cols + np.arange(cols)[None, :]
    u, counts = np.unique(flat, return_counts=True)
    return counts[np.searchsorted(u, flat)]


def _value_set_rows(table, strict):
    """Per column: the sorted value vector (strict) or the canonical padded
    value set (default); returned as (cols, rows) signature rows."""
    s = np.sort(table, axis=0)
    if not strict:
        dup = np.vstack([np.zeros((1, s.shape[1]), dtype=bool), s[1:] == s[:-1]])
        s = np.where(dup, -1, s)
        s = np.sort(s, axis=0)
    return np.ascontiguousarray(s.T)


def _label_rows(old_list, sig_list):
    """Shared labels for (old color | signature) rows across sides."""
    interner = refine._RowInterner()
    return [
        interner.assign(old.astype(np.int64), sigs)
        for old, sigs in zip(old_list, sig_list)
    ]


@dataclass(frozen=True)
class SimClasses:
    """Classes of the equivalence ~i, with their distinguished relations."""

    i: int
    labels: np.ndarray  # (n,) for i=1, else (n, n)
    class_count: int

    def relations(self):
        """The family T_i as boolean pair-set masks."""
        out = []
        n = len(self.labels) if self.i == 1 else self.labels.shape[0]
        for c in range(self.class_count):
            if self.i == 1:
                mask = np.zeros((n, n), dtype=bool)
                mask[np.arange(n), np.arange(n)] = self.labels == c
            else:
                mask = self.labels == c
            out.append(mask)
        return out


def _dense(labels):
    _, inv = np.unique(labels, return_inverse=True)
    return inv.reshape(labels.shape), int(inv.max()) + 1


def _sim_labels(colors_list, i, strict, point_data=None, pair_data=None):
    """Per-side label matrices of the ~i classes, in a shared label space."""
    n = colors_list[0].shape[0]
    if i in (1, 2) and point_data is None:
        point_data = _point_jobs(colors_list)
    if i in (3, 4) and pair_data is None:
        pair_data = _pair_jobs(colors_list)
    out = []
    if i == 1:
        for s in range(len(colors_list)):
            mat = np.full((n, n), -1, dtype=np.int64)
            mat[np.arange(n), np.arange(n)] = point_data.labels[s]
            out.append(mat)
        return out, point_data, pair_data
    if i == 2:
        olds, sigs = [], []
        for s in range(len(colors_list)):
            values = point_data.colors[s].reshape(n, n * n)
            n_table = _count_table(values, point_data.labels[s])
            olds.append(colors_list[s].ravel())
            sigs.append(_value_set_rows(n_table, strict))
        labelled = _label_rows(olds, sigs)
        out = [lab.reshape(n, n) for lab in labelled]
        return out, point_data, pair_data
    if i == 3:
        out = [pair_data.labels[s].reshape(n, n) for s in range(len(colors_list))]
        return out, point_data, pair_data
    if i == 4:
        olds, sigs = [], []
        for s in range(len(colors_list)):
            values = pair_data.colors[s].reshape(n * n, n * n)
            n_table = _count_table(values, pair_data.labels[s])
            olds.append(pair_data.labels[s])
            sigs.append(_value_set_rows(n_table, strict))
        labelled = _label_rows(olds, sigs)
        out = [lab.reshape(n, n) for lab in labelled]
        return out, point_data, pair_data
    raise ValueError(f"sigma index must be in {_SIGMA_INDICES}, got {i}")


class ExtensionCache:
    """Memoized joint extension refinements of one coherent configuration."""

    def __init__(self, cc: CoherentConfiguration):
        self.cc = cc
        self._point = None
        self._pair = None

    def point(self) -> PointExtensionData:
        if self._point is None:
            self._point = _point_jobs([self.cc.coloring.color])
        return self._point

    def pair(self) -> PairExtensionData:
        if self._pair is None:
            self._pair = _pair_jobs([self.cc.coloring.color])
        return self._pair


def sim_classes(cc: CoherentConfiguration, i, strict=False,
                cache: ExtensionCache | None = None) -> SimClasses:
    """The equivalence ~i on points (i=1) or pairs (i>1) of cc."""
    cache = cache or ExtensionCache(cc)
    point = cache.point() if i in (1, 2) else None
    pair = cache.pair() if i in (3, 4) else None
    labels, _, _ = _sim_labels([cc.coloring.color], i, strict, point, pair)
    if i == 1:
        lab = labels[0].diagonal()
    else:
        lab = labels[0]
    dense, count = _dense(lab)
    return SimClasses(i, dense, count)


def _split_closure(colors_list, label_list):
    """Joint coherent closure of each side split by the (shared) labels."""
    keys = []
    for colors, labels in zip(colors_list, label_list):
        keys.append(np.column_stack([
            np.eye(colors.shape[0], dtype=np.int64).ravel(),
            colors.ravel().astype(np.int64),
            colors.T.ravel().astype(np.int64),
            labels.ravel().astype(np.int64),
            labels.T.ravel().astype(np.int64),
        ]))
    flats, r0 = refine.shared_colors_from_keys(keys)
    return refine.refine_joint(flats, r0)


@dataclass
class StabResult:
    ccs: list            # per side CoherentConfiguration
    shared_colors: list  # per side (n, n) int32 in the shared color space
    R: int
    trace: list          # dicts: iteration, sigma, rank_before, rank_after
    point_data: PointExtensionData | None

    @property
    def cc(self):
        return self.ccs[0]


class _Run:
    def __init__(self, colorings, selected, strict=False):
        selected = tuple(sorted(set(int(i) for i in selected)))
        if not selected or any(i not in _SIGMA_INDICES for i in selected):
            raise ValueError(f"sigma selection must be nonempty within {_SIGMA_INDICES}")
        self.selected = selected
        self.strict = strict
        self.sides = len(colorings)
        self.n = colorings[0].n
        for c in colorings:
            check_cap("pair_n", c.n)
            if c.n != self.n:
                raise ValueError("paired run needs equal ground sets")
        if any(i in selected for i in (3, 4)):
            check_cap("two_ext_n", self.n)
        keys = [refine.closure_keys(c.color) for c in colorings]
        flats, r0 = refine.shared_colors_from_keys(keys)
        res = refine.refine_joint(flats, r0)
        self._guard(res, "closure")
        self.colors = res.colors
        self.R = res.R
        self.trace = []
        self._point = None
        self._pair = None

    def _guard(self, res, stage):
        if self.sides == 2:
            k = refine.first_divergence(res, 0, 1)
            if k is not None:
                raise Diverged(stage, k, res.censuses[k][0], res.censuses[k][1])

    def _labels_guarded(self, i):
        labels, self._point, self._pair = _sim_labels(
            self.colors, i, self.strict, self._point, self._pair
        )
        if self.sides == 2:
            a = np.sort(labels[0].ravel())
            b = np.sort(labels[1].ravel())
            if not np.array_equal(a, b):
                ca = np.bincount(labels[0].ravel() + 1)
                cb = np.bincount(labels[1].ravel() + 1)
                raise Diverged(f"sim_{i}_labels", 0, ca, cb)
        return labels

    def run(self):
        iteration = 0
        while True:
            grew = False
            for i in self.selected:
                iteration += 1
                before = self.R
                labels = self._labels_guarded(i)
                res = _split_closure(self.colors, labels)
                self._guard(res, f"sigma_{i}")
                self.trace.append({
                    "iteration": iteration,
                    "sigma": i,
                    "rank_before": before,
                    "rank_after": res.R,
                })
                if res.R > before:
                    self.colors, self.R = res.colors, res.R
                    self._point = None
                    self._pair = None
                    grew = True
                    break
            if not grew:
                break
        if 1 in self.selected and self._point is None:
            # labels for sigma_1 were computed in the final pass unless only
            # higher sigmas are selected
            self._point = _point_jobs(self.colors)
        return self._result()

    def _result(self):
        ccs = []
        for mat in self.colors:
            p = canonical_renumber(PairColoring(self.n, self.R, mat.astype(np.int64)))
            ccs.append(build_cc(p))
        return StabResult(ccs, self.colors, self.R, self.trace, self._point)


def deep_stab(x: PairColoring, selected=(1, 2, 3, 4), strict=False) -> StabResult:
    """Weisfeiler's depth-1 stabilization: the fixed point of the selected
    sigma operators, applied in ascending order with a restart after every
    strict growth."""
    return _Run([x], selected, strict).run()


def sesquiclosure(x: PairColoring) -> CoherentConfiguration:
    """The smallest sesquiclosed coherent configuration above x: the fixed
    point of sigma_1 and sigma_2 over the coherent closure."""
    return deep_stab(x, selected=(1, 2)).cc


def paired_deep_stab(a: PairColoring, b: PairColoring, selected=(1, 2),
                     strict=False) -> StabResult:
    """Stabilize two structures in one shared color space; raises Diverged
    with a certificate when any stage tells them apart.  The inputs must
    already be colored compatibly (shared class ids)."""
    return _Run([a, b], selected, strict).run()


def sigma(cc: CoherentConfiguration, i, strict=False,
          cache: ExtensionCache | None = None) -> CoherentConfiguration:
    """One application of sigma_i: the coherent closure of cc with the ~i
    classes distinguished."""
    cache = cache or ExtensionCache(cc)
    point = cache.point() if i in (1, 2) else None
    pair = cache.pair() if i in (3, 4) else None
    labels, _, _ = _sim_labels([cc.coloring.color], i, strict, point, pair)
    res = _split_closure([cc.coloring.color], labels)
    out = canonical_renumber(PairColoring(cc.n, res.R, res.colors[0].astype(np.int64)))
    return build_cc(out)


def n_y_count(cc: CoherentConfiguration, x, y,
              cache: ExtensionCache | None = None) -> int:
    """The number of pairs y' with x.y ~ x.y': same two-point-extension
    census as y, same extension color at the cell x."""
    x = tuple(int(v) for v in x)
    y = tuple(int(v) for v in y)
    cache = cache or ExtensionCache(cc)
    data = cache.pair()
    n = cc.n
    job = y[0] * n + y[1]
    value = data.colors[0][job][x[0], x[1]]
    same_class = data.labels[0] == data.labels[0][job]
    values = data.colors[0][:, x[0], x[1]]
    return int(np.count_nonzero(same_class & (values == value)))


def n_alpha_count(cc: CoherentConfiguration, x, alpha,
                  cache: ExtensionCache | None = None) -> int:
    """n_alpha(x) computed from the one-point extensions."""
    x = tuple(int(v) for v in x)
    cache = cache or ExtensionCache(cc)
    data = cache.point()
    value = data.colors[0][alpha][x[0], x[1]]
    same_class = data.labels[0] == data.labels[0][alpha]
    values = data.colors[0][:, x[0], x[1]]
    return int(np.count_nonzero(same_class & (values == value)))
