"""Ground sets, pair colorings and partition-lattice plumbing.

A pair coloring assigns to every ordered pair over the ground set
``{0..n-1}`` a dense color id in ``{0..R-1}``.  It is the common currency of
the whole package: rainbows, coherent configurations and the outputs of all
refinement engines are pair colorings plus validated structure.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

# Hard size caps.  Dense n x n (or n^m) storage is the design contract, so the
# caps guard memory, not correctness.  CCSTAB_CAP_OVERRIDE="pair_n=1024,..."
# raises individual caps.
_DEFAULT_CAPS = {
    "pair_n": 512,       # 2-ary ground sets
    "two_ext_n": 64,     # ground sets for 2-extensions (n^2 extended points)
    "wlm3_n": 200,       # 3-ary refinement
    "wlm4_n": 40,        # 4-ary refinement
    "orbits_n": 10,      # brute-force automorphism search
    "game_n": 5,         # pebble game
}


class CapExceeded(ValueError):
    """A configured size cap would be exceeded."""

    def __init__(self, cap_name, limit, requested):
        self.cap_name = cap_name
        self.limit = limit
        self.requested = requested
        super().__init__(
            f"cap '{cap_name}' exceeded: n={requested} > {limit} "
            f"(raise via CCSTAB_CAP_OVERRIDE={cap_name}={requested})"
        )


def caps():
    """Current cap table, with CCSTAB_CAP_OVERRIDE applied."""
    table = dict(_DEFAULT_CAPS)
    raw = os.environ.get("CCSTAB_CAP_OVERRIDE", "")
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        key, _, val = item.partition("=")
        if key.strip() in table:
            table[key.strip()] = int(val)
    return table


def check_cap(cap_name, n):
    limit = caps()[cap_name]
    if n > limit:
        raise CapExceeded(cap_name, limit, n)


@dataclass(frozen=True)
class GroundSet:
    """A finite point set; points are the identifiers 0..n-1."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set needs n >= 1, got {self.n}")


@dataclass(frozen=True)
class PairColoring:
    """A total coloring of Omega x Omega by dense color ids 0..R-1."""

    n: int
    R: int
    color: np.ndarray  # (n, n) integer matrix

    def __post_init__(self):
        c = np.ascontiguousarray(self.color)
        if c.shape != (self.n, self.n):
            raise ValueError(f"color matrix shape {c.shape} != ({self.n}, {self.n})")
        c.setflags(write=False)
        object.__setattr__(self, "color", c)

    def same_partition(self, other: "PairColoring") -> bool:
        """True if the two colorings induce the same partition of Omega^2."""
        if self.n != other.n or self.R != other.R:
            return False
        a = canonical_renumber(self)
        b = canonical_renumber(other)
        return bool(np.array_equal(a.color, b.color))

    def refines(self, other: "PairColoring") -> bool:
        """True if every class of self lies inside a class of other."""
        if self.n != other.n:
            return False
        # each self-color must hit exactly one other-color
        key = self.color.ravel().astype(np.int64) * other.R + other.color.ravel()
        return len(np.unique(key)) == self.R


def from_matrix(color) -> PairColoring:
    """Wrap an arbitrary integer matrix, densifying the colors."""
    color = np.asarray(color)
    n = color.shape[0]
    _, dense = np.unique(color, return_inverse=True)
    dense = dense.reshape(n, n).astype(np.int64)
    return canonical_renumber(PairColoring(n, int(dense.max()) + 1, dense))


@dataclass(frozen=True)
class ClassIndex:
    """Per-color member pairs and cardinalities."""

    pairs: list  # pairs[c] = (rows, cols) index arrays
    sizes: np.ndarray

    def __post_init__(self):
        total = int(self.sizes.sum())
        n2 = sum(len(r) for r, _ in self.pairs)
        if total != n2:
            raise ValueError("class cardinalities do not sum to n^2")


def class_index(p: PairColoring) -> ClassIndex:
    order = np.argsort(p.color.ravel(), kind="stable")
    sizes = np.bincount(p.color.ravel(), minlength=p.R)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    pairs = []
    for c in range(p.R):
        flat = order[bounds[c]:bounds[c + 1]]
        pairs.append((flat // p.n, flat % p.n))
    return ClassIndex(pairs, sizes)


def canonical_renumber(p: PairColoring) -> PairColoring:
    """Rename colors to 0..R-1: diagonal-touching colors first, then by
    first occurrence in row-major pair order.  The partition is unchanged."""
    flat = p.color.ravel()
    n = p.n
    first = np.full(p.R, n * n, dtype=np.int64)
    # reversed scan so the last write wins = first occurrence
    first[flat[::-1]] = np.arange(n * n - 1, -1, -1)
    touches_diag = np.zeros(p.R, dtype=bool)
    touches_diag[p.color[np.arange(n), np.arange(n)]] = True
    order = np.lexsort((first, ~touches_diag))
    rename = np.empty(p.R, dtype=np.int64)
    rename[order] = np.arange(p.R)
    return PairColoring(n, p.R, rename[flat].reshape(n, n))


def join_partitions(p: PairColoring, q: PairColoring) -> PairColoring:
    """Join of the two partitions of Omega^2: the transitive closure of
    "same class in p or same class in q".  Result classes are unions of
    p-classes and unions of q-classes; output is canonically renumbered."""
    if p.n != q.n:
        raise ValueError(f"ground set mismatch: {p.n} != {q.n}")
    # bipartite graph on p-classes and q-classes, joined where they overlap
    pc = p.color.ravel()
    qc = q.color.ravel()
    data = np.ones(len(pc), dtype=np.int8)
    graph = coo_matrix((data, (pc, qc + p.R)), shape=(p.R + q.R, p.R + q.R))
    _, comp = connected_components(graph, directed=False)
    merged = comp[pc].reshape(p.n, p.n)
    _, dense = np.unique(merged, return_inverse=True)
    out = PairColoring(p.n, int(dense.max()) + 1, dense.reshape(p.n, p.n).astype(np.int64))
    return canonical_renumber(out)


@dataclass(frozen=True)
class RainbowReport:
    """Outcome of the rainbow validation (conditions on diagonal and transposes)."""

    c1_ok: bool
    c2_ok: bool
    c1_witness: tuple | None = None  # (diag pair, off-diag pair) sharing a class
    c2_witness: tuple | None = None  # ((a,b), (c,d)): same class, transposes split

    @property
    def ok(self):
        return self.c1_ok and self.c2_ok


def validate_rainbow(p: PairColoring) -> RainbowReport:
    """Check that the diagonal is a union of classes and that the transpose
    of every class is a class; failures come with witness pairs."""
    n = p.n
    diag = p.color[np.arange(n), np.arange(n)]
    off = p.color.copy()
    off[np.arange(n), np.arange(n)] = -1
    shared = np.intersect1d(np.unique(diag), np.unique(off[off >= 0]))
    c1_witness = None
    if len(shared):
        c = int(shared[0])
        i = int(np.nonzero(diag == c)[0][0])
        rr, cc = np.nonzero(off == c)
        c1_witness = ((i, i), (int(rr[0]), int(cc[0])))

    # transpose map must be a function of the color
    key = p.color.ravel().astype(np.int64) * p.R + p.color.T.ravel()
    c2_witness = None
    if len(np.unique(key)) != p.R:
        seen = {}
        flat = p.color.ravel()
        flat_t = p.color.T.ravel()
        for idx in range(n * n):
            c, ct = int(flat[idx]), int(flat_t[idx])
            if c in seen and seen[c][0] != ct:
                jdx = seen[c][1]
                c2_witness = (
                    (jdx // n, jdx % n),
                    (idx // n, idx % n),
                )
                break
            seen.setdefault(c, (ct, idx))
    return RainbowReport(c1_witness is None, c2_witness is None, c1_witness, c2_witness)


# --- text format: header "m 2 <n> <R>", then n rows of n colors ---

def dumps_pair_coloring(p: PairColoring) -> str:
    lines = [f"m 2 {p.n} {p.R}"]
    for row in p.color:
        lines.append(" ".join(str(int(c)) for c in row))
    return "\n".join(lines) + "\n"


def loads_pair_coloring(text: str) -> PairColoring:
    tokens = text.split()
    if len(tokens) < 4 or tokens[0] != "m" or tokens[1] != "2":
        raise ValueError("bad pair-coloring header: expected 'm 2 <n> <R>'")
    n, r = int(tokens[2]), int(tokens[3])
    vals = tokens[4:]
    if len(vals) != n * n:
        raise ValueError(f"expected {n * n} colors, got {len(vals)}")
    color = np.array([int(v) for v in vals], dtype=np.int64).reshape(n, n)
    if color.min() < 0 or color.max() >= r:
        raise ValueError("color out of declared range")
    if len(np.unique(color)) != r:
        raise ValueError("colors are not dense: some id in 0..R-1 is unused")
    return PairColoring(n, r, color)
