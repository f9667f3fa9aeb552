"""Shared-naming pair refinement engine.

One round recolors the pair (a, b) by the signature

    (old color, sorted multiset over g of (color(a, g), color(g, b)))

and assigns new dense ids in lexicographic signature order.  Because ids are
assigned from the *sorted* signatures, running several same-size structures
through the engine together gives them a common color space: two pairs in
different structures get the same id exactly when their signature histories
agree.  All synchronized computations (point extensions, algebraic-isomorphism
tests, paired closures) reduce to joint runs of this engine followed by
census comparison.

The fixed point of a single-structure run is the coherent closure of the
initial coloring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# memory budget for the per-block (B, n, n) signature tensor
_BLOCK_BYTES = 256 * 1024 * 1024


def shared_colors_from_keys(keys_list):
    """Assign dense shared ids to rows of per-structure key matrices.

    keys_list: list of (n_i^2, k) integer arrays with identical column
    meaning.  Returns (colors_list of flat (n_i^2,) int32 arrays, R).
    """
    seen = {}
    rows = []
    out = []
    for keys in keys_list:
        keys = np.ascontiguousarray(keys)
        u, inv = np.unique(keys, axis=0, return_inverse=True)
        ids = np.empty(len(u), dtype=np.int64)
        for i, row in enumerate(u):
            b = row.tobytes()
            if b not in seen:
                seen[b] = len(rows)
                rows.append(np.array(row))
            ids[i] = seen[b]
        out.append(ids[inv.ravel()])
    rank = _lexrank(np.vstack(rows))
    return [rank[flat].astype(np.int32) for flat in out], len(rows)


def _lexrank(rows):
    """Rank of each row in the lexicographic order of the distinct rows."""
    order = np.lexsort(rows.T[::-1])
    rank = np.empty(len(rows), dtype=np.int64)
    rank[order] = np.arange(len(rows))
    return rank


@dataclass
class RefineResult:
    colors: list          # per structure: (n, n) int32 matrices, shared ids
    R: int
    rounds: int
    censuses: list        # per round: list of per-structure bincounts

    def census(self, m):
        """Final census of structure m."""
        return self.censuses[-1][m] if self.censuses else None


def refine_joint(colors_list, R, max_rounds=None) -> RefineResult:
    """Run the refinement to the joint fixed point.

    colors_list: per-structure flat (n^2,) or square (n, n) arrays of shared
    dense colors in 0..R-1.  All structures must share one ground-set size.
    """
    mats = []
    n = None
    for c in colors_list:
        c = np.asarray(c)
        if c.ndim == 1:
            side = int(round(len(c) ** 0.5))
            c = c.reshape(side, side)
        if n is None:
            n = c.shape[0]
        elif c.shape[0] != n:
            raise ValueError("joint refinement needs equal-size structures")
        mats.append(c.astype(np.int32, copy=True))

    history = [[np.bincount(m.ravel(), minlength=R) for m in mats]]
    rounds = 0
    while True:
        new_mats, new_r = _one_round(mats, R, n)
        if new_r == R:
            break
        mats, R = new_mats, new_r
        rounds += 1
        history.append([np.bincount(m.ravel(), minlength=R) for m in mats])
        if max_rounds is not None and rounds >= max_rounds:
            break
    return RefineResult(mats, R, rounds, history)


def _one_round(mats, R, n):
    code_dtype = np.int32 if R * R < 2**31 else np.int64
    block = max(1, min(n, _BLOCK_BYTES // max(1, n * n * np.dtype(code_dtype).itemsize)))
    state = _RowInterner()
    new_flat = []
    for C in mats:
        Ct = np.ascontiguousarray(C.T).astype(code_dtype)
        Cc = np.ascontiguousarray(C).astype(code_dtype)
        prov = np.empty(n * n, dtype=np.int64)
        for a0 in range(0, n, block):
            a1 = min(a0 + block, n)
            # codes[a, b, g] = C[a, g] * R + C[g, b], sorted along g
            codes = Cc[a0:a1, None, :] * code_dtype(R) + Ct[None, :, :]
            codes.sort(axis=2)
            sigs = codes.reshape((a1 - a0) * n, n)
            old = Cc[a0:a1].reshape(-1)
            prov[a0 * n:a1 * n] = state.assign(old, sigs)
        new_flat.append(prov)
    if len(state.rows) == R:
        # no class split anywhere; naming is unchanged (old color leads the key)
        return mats, R
    rank = _lexrank(np.vstack(state.rows))
    return [rank[f].reshape(n, n).astype(np.int32) for f in new_flat], len(state.rows)


class _RowInterner:
    """Exact shared interning of (old color | sorted signature) rows.

    Rows are bucketed by cheap order-invariant surrogates and verified
    against one stored representative per bucket; surrogate collisions fall
    back to comparing full row bytes, so the assignment is exact.
    """

    def __init__(self):
        self.rows = []        # id -> full row (width w) as int64
        self._by_surr = {}    # surrogate bytes -> candidate id
        self._by_bytes = {}   # full row bytes -> id (collision fallback)

    def assign(self, old, sigs):
        m, w = sigs.shape
        picks = sigs[:, [0, w // 4, w // 2, (3 * w) // 4, w - 1]].astype(np.int64)
        surr = np.column_stack([
            old.astype(np.int64),
            sigs.sum(axis=1, dtype=np.int64),
            np.count_nonzero(sigs[:, 1:] != sigs[:, :-1], axis=1),
            picks,
        ])
        u_surr, inv, counts = np.unique(
            surr, axis=0, return_inverse=True, return_counts=True
        )
        inv = inv.ravel()
        order = np.argsort(inv, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(counts)])
        ids = np.empty(m, dtype=np.int64)
        for k in range(len(u_surr)):
            members = order[bounds[k]:bounds[k + 1]]
            key = u_surr[k].tobytes()
            rep_id = self._by_surr.get(key)
            if rep_id is None:
                rep_id = self._intern_row(old[members[0]], sigs[members[0]])
                self._by_surr[key] = rep_id
            rep = self.rows[rep_id]
            good = (old[members] == rep[0]) & np.all(sigs[members] == rep[1:], axis=1)
            ids[members[good]] = rep_id
            for idx in members[~good]:
                row_bytes = int(old[idx]).to_bytes(8, "little", signed=True) + \
                    sigs[idx].astype(np.int64).tobytes()
                hit = self._by_bytes.get(row_bytes)
                if hit is None:
                    hit = self._intern_row(old[idx], sigs[idx])
                    self._by_bytes[row_bytes] = hit
                ids[idx] = hit
        return ids

    def _intern_row(self, old_color, sig):
        row = np.empty(len(sig) + 1, dtype=np.int64)
        row[0] = old_color
        row[1:] = sig
        self.rows.append(row)
        return len(self.rows) - 1


def censuses_equal(res: RefineResult, i, j) -> bool:
    """True if structures i and j agree on every per-round census."""
    return all(
        np.array_equal(round_census[i], round_census[j])
        for round_census in res.censuses
    )


def first_divergence(res: RefineResult, i, j):
    """First round where the censuses of structures i and j differ, or None."""
    for k, round_census in enumerate(res.censuses):
        if not np.array_equal(round_census[i], round_census[j]):
            return k
    return None


# --- initial-key builders -------------------------------------------------

def closure_keys(color, distinguished=()):
    """Key rows for the coherent closure WL(X, T).

    Splits the input coloring by the diagonal, by transposes (so the fixed
    point is transpose-closed) and by membership in each distinguished pair
    set and its transpose.
    """
    color = np.asarray(color)
    n = color.shape[0]
    cols = [np.eye(n, dtype=np.int64).ravel(), color.ravel(), color.T.ravel()]
    for d in distinguished:
        mask = _as_mask(d, n)
        cols.append(mask.ravel().astype(np.int64))
        cols.append(mask.T.ravel().astype(np.int64))
    return np.column_stack(cols)


def extension_keys(color, points):
    """Key rows for the point extension WL(X, {1_{y_i}}): the closure keys
    plus, per tuple position i, the indicator of the singleton (y_i, y_i)."""
    color = np.asarray(color)
    n = color.shape[0]
    cols = [np.eye(n, dtype=np.int64).ravel(), color.ravel(), color.T.ravel()]
    for y in points:
        flag = np.zeros((n, n), dtype=np.int64)
        flag[y, y] = 1
        cols.append(flag.ravel())
    return np.column_stack(cols)


def _as_mask(d, n):
    d = np.asarray(d)
    if d.dtype == bool:
        if d.shape != (n, n):
            raise ValueError("distinguished mask has wrong shape")
        return d
    mask = np.zeros((n, n), dtype=bool)
    if d.size:
        mask[d[:, 0], d[:, 1]] = True
    return mask
