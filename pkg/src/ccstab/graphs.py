"""Built-in graph corpus: named graphs, exhaustive small-graph enumeration,
and the graph text format.

Graphs enter the rest of the package as 3-class rainbows (diagonal / edge /
non-edge), or with the diagonal split by vertex colors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import PairColoring


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple  # tuple of sorted (u, v) pairs, u < v
    colors: tuple | None = None  # per-vertex color keys, or None
    name: str = ""

    def adjacency(self):
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        return a


def graph(n, edges, colors=None, name="") -> Graph:
    es = tuple(sorted((min(u, v), max(u, v)) for u, v in edges))
    if any(u == v or not (0 <= u < n and 0 <= v < n) for u, v in es):
        raise ValueError("loop or out-of-range edge")
    if len(set(es)) != len(es):
        raise ValueError("duplicate edge")
    return Graph(n, es, tuple(colors) if colors is not None else None, name)


def rainbow(g: Graph) -> PairColoring:
    """The colored rainbow of a graph: diagonal classes (split by vertex
    color), then the edge class, then the non-edge class.  Empty classes are
    skipped; ids follow that fixed key order, so two graphs with the same
    vertex-color keys get construction-aligned class ids."""
    keys = rainbow_class_keys(g)
    key_to_id = {k: i for i, k in enumerate(keys)}
    adj = g.adjacency()
    n = g.n
    mat = np.empty((n, n), dtype=np.int64)
    if (1, 0) in key_to_id:
        mat[adj] = key_to_id[(1, 0)]
    if (2, 0) in key_to_id:
        mat[~adj] = key_to_id[(2, 0)]
    cols = g.colors if g.colors is not None else (0,) * n
    for v in range(n):
        mat[v, v] = key_to_id[(0, cols[v])]
    return PairColoring(n, len(keys), mat)


def rainbow_class_keys(g: Graph):
    """Class keys of rainbow(g) in id order: (0, vertex color) for diagonal
    classes, (1, 0) for edges, (2, 0) for non-edges (when nonempty)."""
    cols = g.colors if g.colors is not None else (0,) * g.n
    keys = [(0, c) for c in sorted(set(cols))]
    m = len(g.edges)
    if m:
        keys.append((1, 0))
    if m < g.n * (g.n - 1) // 2:
        keys.append((2, 0))
    return keys


def relabel(g: Graph, perm) -> Graph:
    perm = list(perm)
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    colors = None
    if g.colors is not None:
        colors = [0] * g.n
        for v in range(g.n):
            colors[perm[v]] = g.colors[v]
    return graph(g.n, edges, colors, g.name + "~relabeled")


def disjoint_union(a: Graph, b: Graph) -> Graph:
    edges = list(a.edges) + [(u + a.n, v + a.n) for u, v in b.edges]
    colors = None
    if a.colors is not None or b.colors is not None:
        ca = a.colors or (0,) * a.n
        cb = b.colors or (0,) * b.n
        colors = list(ca) + list(cb)
    return graph(a.n + b.n, edges, colors, f"{a.name or '?'}+{b.name or '?'}")


# --- named graphs ----------------------------------------------------------

def complete(k) -> Graph:
    return graph(k, itertools.combinations(range(k), 2), name=f"K{k}")


def empty(k) -> Graph:
    return graph(k, [], name=f"E{k}")


def cycle(k) -> Graph:
    return graph(k, [(i, (i + 1) % k) for i in range(k)], name=f"C{k}")


def path(k) -> Graph:
    return graph(k, [(i, i + 1) for i in range(k - 1)], name=f"P{k}")


def petersen() -> Graph:
    """Kneser graph K(5,2): vertices are 2-subsets of {0..4}, disjoint sets
    adjacent."""
    verts = list(itertools.combinations(range(5), 2))
    idx = {v: i for i, v in enumerate(verts)}
    edges = [
        (idx[a], idx[b])
        for a, b in itertools.combinations(verts, 2)
        if not set(a) & set(b)
    ]
    return graph(10, edges, name="Petersen")


def heawood() -> Graph:
    """Incidence graph of the Fano plane (difference-set lines {i, i+1, i+3})."""
    edges = []
    for i in range(7):
        for d in (0, 1, 3):
            edges.append((i, 7 + (i - d) % 7))
    return graph(14, edges, name="Heawood")


def shrikhande() -> Graph:
    """Cayley graph of Z4 x Z4 with connection set {±(1,0), ±(0,1), ±(1,1)}."""
    conns = [(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)]
    edges = set()
    for a in range(4):
        for b in range(4):
            for da, db in conns:
                u = a * 4 + b
                v = ((a + da) % 4) * 4 + (b + db) % 4
                edges.add((min(u, v), max(u, v)))
    return graph(16, edges, name="Shrikhande")


def rook44() -> Graph:
    """4x4 rook's graph: cells adjacent in one shared row or column."""
    edges = []
    for (a, b), (c, d) in itertools.combinations(itertools.product(range(4), repeat=2), 2):
        if (a == c) != (b == d):
            edges.append((a * 4 + b, c * 4 + d))
    return graph(16, edges, name="Rook4x4")


def asymmetric6() -> Graph:
    """A 6-vertex graph with trivial automorphism group (smallest order where
    one exists); asymmetry is asserted by the orbit oracle in the tests."""
    return graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (1, 4)], name="Asym6")


def named_corpus():
    """The named graphs used throughout the property suites."""
    return [
        complete(3), complete(4), complete(5),
        cycle(5), cycle(6),
        disjoint_union(cycle(3), cycle(3)),
        disjoint_union(complete(3), complete(4)),
        path(3), path(4),
        petersen(), heawood(), shrikhande(), rook44(),
        asymmetric6(),
    ]


# --- exhaustive enumeration up to isomorphism ------------------------------

@lru_cache(maxsize=None)
def _perm_table(n):
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


@lru_cache(maxsize=None)
def _pair_table(n):
    return list(itertools.combinations(range(n), 2))


def canonical_code(g: Graph) -> int:
    """Minimum adjacency bitstring over all vertex relabelings."""
    if g.n == 1:
        return 0
    perms = _perm_table(g.n)
    adj = g.adjacency()
    code = np.zeros(len(perms), dtype=np.int64)
    for u, v in _pair_table(g.n):
        code = (code << 1) | adj[perms[:, u], perms[:, v]]
    return int(code.min())


@lru_cache(maxsize=None)
def all_graphs(n) -> tuple:
    """All graphs on exactly n vertices, one per isomorphism class (n <= 7:
    counts 1, 2, 4, 11, 34, 156, 1044)."""
    if n == 1:
        return (graph(1, [], name="G1.0"),)
    seen = {}
    for base in all_graphs(n - 1):
        for mask in range(2 ** (n - 1)):
            edges = list(base.edges) + [
                (v, n - 1) for v in range(n - 1) if mask >> v & 1
            ]
            cand = graph(n, edges)
            code = canonical_code(cand)
            if code not in seen:
                seen[code] = cand
    out = tuple(
        graph(g.n, g.edges, name=f"G{n}.{i}")
        for i, g in enumerate(seen.values())
    )
    return out


def graphs_up_to(n):
    return [g for k in range(1, n + 1) for g in all_graphs(k)]


def sample_graphs(n_max, count, seed=0):
    rng = np.random.default_rng(seed)
    pool = graphs_up_to(n_max)
    idx = rng.choice(len(pool), size=min(count, len(pool)), replace=False)
    return [pool[i] for i in sorted(idx)]


# --- text format -----------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Graph text format: '#' comments, 'n <N>', optional 'c <v> <k>' vertex
    colors, 'e <u> <v>' undirected edges; 0-based."""
    n = None
    edges = []
    colors = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "c" and len(parts) == 3:
                colors[int(parts[1])] = int(parts[2])
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError("unknown directive")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
    if n is None:
        raise ValueError("missing 'n <N>' line")
    col = None
    if colors:
        if not all(0 <= v < n for v in colors):
            raise ValueError("vertex color for out-of-range vertex")
        col = [colors.get(v, 0) for v in range(n)]
    try:
        return graph(n, edges, col)
    except ValueError as exc:
        raise ValueError(str(exc)) from None


def format_graph(g: Graph) -> str:
    lines = [f"n {g.n}"]
    if g.colors is not None:
        lines += [f"c {v} {k}" for v, k in enumerate(g.colors) if k]
    lines += [f"e {u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"
