"""m-ary coherent configurations and the m-dimensional WL refinement.

Colorings of Omega^m (m = 2, 3, 4) are stored as dense flat arrays.  The
initial color of a tuple is determined by its equality pattern together with
the matrix of pair colors; the mon(M)-indexed tuple of the paper's c'
evaluations is a function of those two ingredients, so it is derived rather
than materialized.  Refinement recolors a tuple by its old color plus the
sorted multiset, over all points a, of the m-tuple of colors obtained by
substituting a into each position.

Like the pair engine, everything runs jointly over several same-size
structures with shared signature naming, which is what the equivalence
tests consume.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import PairColoring, check_cap
from .refine import _lexrank, _RowInterner

_ARITY_CAP = {2: "pair_n", 3: "wlm3_n", 4: "wlm4_n"}


@dataclass(frozen=True)
class MaryColoring:
    m: int
    n: int
    R: int
    color: np.ndarray  # shape (n,) * m

    def __post_init__(self):
        c = np.ascontiguousarray(self.color)
        if c.shape != (self.n,) * self.m:
            raise ValueError(f"color shape {c.shape} != {(self.n,) * self.m}")
        c.setflags(write=False)
        object.__setattr__(self, "color", c)

    def flat(self):
        return self.color.ravel()

    def same_partition(self, other: "MaryColoring") -> bool:
        if (self.m, self.n, self.R) != (other.m, other.n, other.R):
            return False
        return bool(np.array_equal(
            canonical_renumber_mary(self).color,
            canonical_renumber_mary(other).color,
        ))

    def refines(self, other: "MaryColoring") -> bool:
        if self.m != other.m or self.n != other.n:
            return False
        key = self.flat().astype(np.int64) * other.R + other.flat()
        return len(np.unique(key)) == self.R


def canonical_renumber_mary(f: MaryColoring) -> MaryColoring:
    """Colors renamed by first occurrence in row-major flat order."""
    flat = f.flat()
    first = np.full(f.R, flat.size, dtype=np.int64)
    first[flat[::-1]] = np.arange(flat.size - 1, -1, -1)
    rename = np.empty(f.R, dtype=np.int64)
    rename[np.argsort(first, kind="stable")] = np.arange(f.R)
    return MaryColoring(f.m, f.n, f.R, rename[flat].reshape(f.color.shape))


def mon_maps(m):
    """All self-maps of {0..m-1} (the paper's mon(M); m^m of them)."""
    return list(itertools.product(range(m), repeat=m))


def tuple_pattern(x):
    """Canonical encoding of the equality pattern of a tuple: the tuple of
    first-occurrence indices (0 <= p_i <= i)."""
    first = {}
    out = []
    for i, v in enumerate(x):
        first.setdefault(v, i)
        out.append(first[v])
    return tuple(out)


def _coords(n, m):
    idx = np.arange(n ** m)
    return [(idx // n ** (m - 1 - i)) % n for i in range(m)]


def _initial_keys(x: PairColoring, m):
    """(n^m, k) key rows: equality bits for i<j plus the m x m pair-color
    matrix, both canonical under shared pair-color naming."""
    coords = _coords(x.n, m)
    cols = []
    for i in range(m):
        for j in range(i + 1, m):
            cols.append((coords[i] == coords[j]).astype(np.int64))
    c = x.color
    for i in range(m):
        for j in range(m):
            cols.append(c[coords[i], coords[j]].astype(np.int64))
    return np.column_stack(cols)


def initial_coloring(x: PairColoring, m) -> MaryColoring:
    """The WL_m starting coloring c0 on Omega^m."""
    f, _ = initial_colorings_joint([x], m)
    return canonical_renumber_mary(f[0])


def initial_colorings_joint(xs, m):
    """Shared-naming initial colorings for several rainbows of one size."""
    if m not in _ARITY_CAP:
        raise ValueError(f"arity must be one of {sorted(_ARITY_CAP)}, got {m}")
    for x in xs:
        check_cap(_ARITY_CAP[m], x.n)
        if x.n != xs[0].n:
            raise ValueError("joint m-ary run needs equal-size structures")
    from .refine import shared_colors_from_keys

    flats, r0 = shared_colors_from_keys([_initial_keys(x, m) for x in xs])
    n = xs[0].n
    return [
        MaryColoring(m, n, r0, flat.astype(np.int64).reshape((n,) * m))
        for flat in flats
    ], r0


def _subst_tuple_rows(A, m, n):
    """(n^m * n, m) rows: row (x, a) holds the colors of x_{i<-a}, i = 1..m."""
    N = n ** m
    out = np.empty((N, n, m), dtype=A.dtype)
    for i in range(m):
        s = np.moveaxis(A, i, -1)
        s = np.expand_dims(s, axis=i)
        out[:, :, i] = np.broadcast_to(s, A.shape + (n,)).reshape(N, n)
    return out.reshape(N * n, m)


@dataclass
class MaryRefineResult:
    colorings: list  # MaryColoring, shared ids
    R: int
    rounds: int
    censuses: list   # per round: list of per-structure bincounts


def refine_mary_joint(colorings, R) -> MaryRefineResult:
    """Joint m-ary refinement to the shared fixed point."""
    m = colorings[0].m
    n = colorings[0].n
    arrays = [f.color.copy() for f in colorings]
    history = [[np.bincount(a.ravel(), minlength=R) for a in arrays]]
    rounds = 0
    while True:
        # shared ids for the substituted m-tuples of colors
        rows = [_subst_tuple_rows(a, m, n) for a in arrays]
        all_rows = np.vstack(rows)
        _, tuple_ids = np.unique(all_rows, axis=0, return_inverse=True)
        tuple_ids = tuple_ids.ravel()
        interner = _RowInterner()
        new_arrays = []
        offset = 0
        for a in arrays:
            N = n ** m
            ids = tuple_ids[offset:offset + N * n].reshape(N, n)
            offset += N * n
            sigs = np.sort(ids, axis=1)
            prov = interner.assign(a.ravel().astype(np.int64), sigs)
            new_arrays.append(prov)
        new_r = len(interner.rows)
        if new_r == R:
            break
        rank = _lexrank(np.vstack(interner.rows))
        arrays = [rank[p].reshape((n,) * m).astype(np.int64) for p in new_arrays]
        R = new_r
        rounds += 1
        history.append([np.bincount(a.ravel(), minlength=R) for a in arrays])
    out = [MaryColoring(m, n, R, a) for a in arrays]
    return MaryRefineResult(out, R, rounds, history)


def wlm_closure(x: PairColoring, m) -> MaryColoring:
    """The m-ary coherent closure WL_m(X): the refinement fixed point over
    the initial coloring."""
    start, r0 = initial_colorings_joint([x], m)
    res = refine_mary_joint(start, r0)
    return canonical_renumber_mary(res.colorings[0])


def wlm_closure_joint(xs, m) -> MaryRefineResult:
    start, r0 = initial_colorings_joint(xs, m)
    return refine_mary_joint(start, r0)


def project(f: MaryColoring, k) -> MaryColoring:
    """k-projection: x is colored by the class set it extends into; distinct
    classes projecting to one set merge."""
    if not 2 <= k < f.m:
        raise ValueError(f"projection arity must satisfy 2 <= k < m, got k={k}")
    table = f.flat().reshape(f.n ** k, f.n ** (f.m - k))
    mins = table.min(axis=1)
    _, dense = np.unique(mins, return_inverse=True)
    out = MaryColoring(k, f.n, int(dense.max()) + 1,
                       dense.reshape((f.n,) * k).astype(np.int64))
    return canonical_renumber_mary(out)


def residue(f: MaryColoring, y) -> MaryColoring:
    """Residue res_y: x is colored by the class of x . y; empty residues
    drop out in the renumbering."""
    y = tuple(int(v) for v in y)
    k = f.m - len(y)
    if k < 2:
        raise ValueError(f"residue arity {k} < 2")
    if any(not 0 <= v < f.n for v in y):
        raise ValueError(f"residue tuple {y} out of range")
    flat_y = 0
    for v in y:
        flat_y = flat_y * f.n + v
    table = f.flat().reshape(f.n ** k, f.n ** (f.m - k))
    col = table[:, flat_y]
    _, dense = np.unique(col, return_inverse=True)
    out = MaryColoring(k, f.n, int(dense.max()) + 1,
                       dense.reshape((f.n,) * k).astype(np.int64))
    return canonical_renumber_mary(out)


def class_multiplicity(f: MaryColoring, cls, k) -> int:
    """n_k(X): how many members of class X share a fixed k-prefix; constant
    over the class (checked at three spread-out representatives)."""
    if not 1 <= k < f.m:
        raise ValueError(f"need 1 <= k < m, got k={k}")
    table = f.flat().reshape(f.n ** k, f.n ** (f.m - k))
    rows, cols = np.nonzero(table == cls)
    if len(rows) == 0:
        raise ValueError(f"class {cls} is empty")
    counts = np.bincount(rows, minlength=table.shape[0])
    picks = [0, len(rows) // 2, len(rows) - 1]
    vals = {int(counts[rows[p]]) for p in picks}
    if len(vals) != 1:
        raise ValueError(
            f"prefix multiplicity not constant on class {cls}: {sorted(vals)}"
        )
    return vals.pop()


@dataclass(frozen=True)
class MaryReport:
    c1_ok: bool   # equality pattern constant per class
    c2_ok: bool   # transform images of classes are classes
    c3_ok: bool   # substitution counts constant per class
    c1_witness: tuple | None = None
    c2_witness: tuple | None = None
    c3_witness: tuple | None = None
    c3_exhaustive: bool = True

    @property
    def ok(self):
        return self.c1_ok and self.c2_ok and self.c3_ok


def validate_mary(f: MaryColoring, sample_seed=0) -> MaryReport:
    """Check the three m-ary conditions; the count condition is exhaustive
    for n^m <= 10^6 and sampled above."""
    m, n = f.m, f.n
    N = n ** m
    flat = f.flat()
    coords = _coords(n, m)

    # equality pattern constant per class
    pat_cols = [
        (coords[i] == coords[j]).astype(np.int64)
        for i in range(m) for j in range(i + 1, m)
    ]
    _, pat = np.unique(np.column_stack(pat_cols), axis=0, return_inverse=True)
    pat = pat.ravel()
    c1_witness = None
    key = flat.astype(np.int64) * (pat.max() + 1) + pat
    if len(np.unique(key)) != f.R:
        order = np.argsort(flat, kind="stable")
        for c in range(f.R):
            members = order[np.searchsorted(flat[order], c):
                            np.searchsorted(flat[order], c + 1)]
            if len(np.unique(pat[members])) > 1:
                a = int(members[0])
                b = int(members[np.nonzero(pat[members] != pat[members[0]])[0][0]])
                c1_witness = (c, _unflatten(a, n, m), _unflatten(b, n, m))
                break

    # transform closure
    c2_witness = None
    grids = np.indices((n,) * m).reshape(m, -1)
    for sigma in mon_maps(m):
        img_flat = np.zeros(N, dtype=np.int64)
        for pos in range(m):
            img_flat = img_flat * n + grids[sigma[pos]]
        img_color = flat[img_flat]
        # each class must map onto exactly one class, surjectively
        key = flat.astype(np.int64) * f.R + img_color
        pairs = np.unique(key)
        if len(pairs) != f.R:
            c = int(np.bincount((pairs // f.R).astype(np.int64)).argmax())
            c2_witness = (sigma, c)
            break
        targets = pairs % f.R
        sizes = np.bincount(flat, minlength=f.R)
        img_sizes = np.zeros(f.R, dtype=np.int64)
        for c in range(f.R):
            members = np.nonzero(flat == c)[0]
            img_sizes[c] = len(np.unique(img_flat[members]))
        if not np.array_equal(np.array([sizes[t] for t in targets]),
                              [img_sizes[c] for c in range(f.R)]):
            bad = next(
                c for c in range(f.R)
                if sizes[targets[c]] != img_sizes[c]
            )
            c2_witness = (sigma, bad)
            break

    # count condition via one refinement round (exhaustive) or sampling
    c3_witness = None
    exhaustive = N <= 10 ** 6
    if exhaustive:
        res = refine_mary_joint([f], f.R)
        if res.R != f.R:
            c3_witness = _c3_witness_mary(f)
    else:
        rng = np.random.default_rng(sample_seed)
        arr = f.color
        order = np.argsort(flat, kind="stable")
        bounds = np.searchsorted(flat[order], np.arange(f.R + 1))
        for c in range(f.R):
            members = order[bounds[c]:bounds[c + 1]]
            reps = rng.choice(members, size=min(3, len(members)), replace=False)
            sigs = {_tuple_signature(arr, int(r), m, n) for r in reps}
            if len(sigs) > 1:
                c3_witness = (c, _unflatten(int(reps[0]), n, m))
                break
    return MaryReport(
        c1_witness is None, c2_witness is None, c3_witness is None,
        c1_witness, c2_witness, c3_witness, exhaustive,
    )


def _c3_witness_mary(f):
    m, n = f.m, f.n
    flat = f.flat()
    seen = {}
    for idx in range(n ** m):
        c = int(flat[idx])
        sig = _tuple_signature(f.color, idx, m, n)
        if c in seen and seen[c][0] != sig:
            return (c, _unflatten(seen[c][1], n, m), _unflatten(idx, n, m))
        seen.setdefault(c, (sig, idx))
    return None


def _tuple_signature(arr, idx, m, n):
    x = list(_unflatten(idx, n, m))
    rows = []
    for a in range(n):
        row = []
        for i in range(m):
            xi = x[i]
            x[i] = a
            row.append(int(arr[tuple(x)]))
            x[i] = xi
        rows.append(tuple(row))
    return tuple(sorted(rows))


def _unflatten(idx, n, m):
    out = []
    for i in range(m):
        out.append((idx // n ** (m - 1 - i)) % n)
    return tuple(out)


def to_pair_coloring(f: MaryColoring) -> PairColoring:
    if f.m != 2:
        raise ValueError("only 2-ary colorings convert to pair colorings")
    return PairColoring(f.n, f.R, f.color.copy())


# --- text format: header "m <arity> <n> <R>", then n^m colors row-major ---

def dumps_mary(f: MaryColoring) -> str:
    lines = [f"m {f.m} {f.n} {f.R}"]
    flat = f.flat()
    for i in range(0, len(flat), f.n):
        lines.append(" ".join(str(int(c)) for c in flat[i:i + f.n]))
    return "\n".join(lines) + "\n"


def loads_mary(text: str) -> MaryColoring:
    tokens = text.split()
    if len(tokens) < 4 or tokens[0] != "m":
        raise ValueError("bad m-ary header: expected 'm <arity> <n> <R>'")
    m, n, r = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = tokens[4:]
    if len(vals) != n ** m:
        raise ValueError(f"expected {n ** m} colors, got {len(vals)}")
    color = np.array([int(v) for v in vals], dtype=np.int64).reshape((n,) * m)
    if color.min() < 0 or color.max() >= r or len(np.unique(color)) != r:
        raise ValueError("colors not dense in 0..R-1")
    return MaryColoring(m, n, r, color)
