"""Independent brute-force references: exact automorphism orbits by
backtracking, and the exact Spoiler/Duplicator set-pebble game.

These are the oracles the refinement engines are tested against; they share
no code with the engines beyond the basic data types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .cc2 import build_cc, validate_cc
from .core import PairColoring, canonical_renumber, check_cap
from .algiso import NoStandardSimilarity, check_standard_similarity


# --- automorphism orbits ----------------------------------------------------

def _all_automorphisms(color):
    """Every permutation preserving the pair coloring, by backtracking with
    partial-consistency pruning."""
    n = color.shape[0]
    diag = color.diagonal()
    found = []
    image = np.full(n, -1, dtype=np.int64)
    used = np.zeros(n, dtype=bool)

    def rec(v):
        if v == n:
            found.append(image.copy())
            return
        for b in range(n):
            if used[b] or diag[b] != diag[v]:
                continue
            ok = True
            for u in range(v):
                if color[image[u], b] != color[u, v] or color[b, image[u]] != color[v, u]:
                    ok = False
                    break
            if ok:
                image[v] = b
                used[b] = True
                rec(v + 1)
                used[b] = False
        image[v] = -1

    rec(0)
    return found


def _generators(perms, n):
    """A generating subset: add elements not yet in the generated closure."""
    gens = []
    closed = {tuple(range(n))}
    for g in perms:
        tg = tuple(int(v) for v in g)
        if tg in closed:
            continue
        gens.append(g)
        frontier = list(closed)
        while frontier:
            nxt = []
            for h in frontier:
                for k in gens:
                    prod = tuple(int(k[v]) for v in h)
                    if prod not in closed:
                        closed.add(prod)
                        nxt.append(prod)
            frontier = nxt
    return gens, closed


def _orbit_labels(gens, n, arity):
    """Orbits of the generated group on flat tuple indices."""
    size = n ** arity
    if not gens:
        return np.arange(size)
    coords = [(np.arange(size) // n ** (arity - 1 - i)) % n for i in range(arity)]
    rows = []
    cols = []
    for g in gens:
        img = np.zeros(size, dtype=np.int64)
        for c in coords:
            img = img * n + g[c]
        rows.append(np.arange(size))
        cols.append(img)
    graph = coo_matrix(
        (np.ones(size * len(gens), dtype=np.int8),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    _, labels = connected_components(graph, directed=False)
    return labels


@dataclass
class OrbitPartition:
    n: int
    group_order: int
    generators: list                # permutation arrays generating Aut
    point_orbits: np.ndarray        # (n,) labels
    pair_coloring: PairColoring     # inv(Aut): the orbit coherent configuration
    triple_orbits: np.ndarray | None  # (n^3,) labels when requested


def brute_orbits(x: PairColoring, max_arity=2, cap=None) -> OrbitPartition:
    """Exact Aut-orbits on tuples up to max_arity (full backtracking).

    The pair partition is inv(Aut), validated as a coherent configuration.
    The default cap n <= 10 can be raised explicitly for structured inputs
    whose groups stay small.
    """
    if cap is None:
        check_cap("orbits_n", x.n)
    elif x.n > cap:
        raise ValueError(f"brute_orbits cap {cap} exceeded: n={x.n}")
    if max_arity not in (1, 2, 3):
        raise ValueError("max_arity must be 1, 2 or 3")
    perms = _all_automorphisms(np.asarray(x.color))
    gens, closed = _generators(perms, x.n)
    assert len(closed) == len(perms)
    point_orbits = _orbit_labels(gens, x.n, 1)
    pair_labels = _orbit_labels(gens, x.n, 2)
    _, dense = np.unique(pair_labels, return_inverse=True)
    pairs = canonical_renumber(
        PairColoring(x.n, int(dense.max()) + 1,
                     dense.reshape(x.n, x.n).astype(np.int64))
    )
    rep = validate_cc(pairs)
    if not rep.ok:
        raise AssertionError(f"orbit partition not coherent: {rep.summary()}")
    build_cc(pairs)
    triples = _orbit_labels(gens, x.n, 3) if max_arity >= 3 else None
    return OrbitPartition(x.n, len(perms), gens, point_orbits, pairs, triples)


# --- the set-based pebble game ---------------------------------------------

@dataclass
class GameState:
    """Solved game table for two rainbows under the standard similarity.

    Pebble configurations are triples (m+1 pebbles for arity m) over
    {unplaced} + Omega x Omega'; `wins` marks the configurations from which
    Duplicator survives forever.
    """

    n: int
    n2: int
    pebbles: int
    wins: np.ndarray       # (P+1)^pebbles bool, P = n * n2
    sweeps: int

    def state_index(self, placed):
        P = self.n * self.n2 + 1
        vals = [self.n * self.n2] * self.pebbles
        for i, (a, b) in enumerate(placed):
            vals[i] = a * self.n2 + b
        idx = 0
        for v in vals:
            idx = idx * P + v
        return idx


def solve_game(g: PairColoring, g2: PairColoring, m=2) -> GameState:
    """Exact game value of the set-pebble game with m+1 pebbles for every
    configuration, by greatest-fixed-point sweeps over Spoiler set choices,
    Duplicator responses, and placements."""
    if m != 2:
        raise ValueError("the game solver is specified for m = 2 only")
    check_cap("game_n", g.n)
    check_cap("game_n", g2.n)
    check_standard_similarity(g, g2)
    n, n2 = g.n, g2.n
    pebbles = m + 1
    P = n * n2
    U = P  # unplaced sentinel

    # pairwise consistency of two placed pebble values
    a1 = np.arange(P) // n2
    b1 = np.arange(P) % n2
    ok2 = np.zeros((P + 1, P + 1), dtype=bool)
    ca = np.asarray(g.color)
    cb = np.asarray(g2.color)
    ok2[:P, :P] = (
        (ca[a1[:, None], a1[None, :]] == cb[b1[:, None], b1[None, :]])
        & ((a1[:, None] == a1[None, :]) == (b1[:, None] == b1[None, :]))
    )
    ok2[U, :] = True
    ok2[:, U] = True

    shape = (P + 1,) * pebbles
    s = np.indices(shape).reshape(pebbles, -1)
    base = ok2[s[0], s[1]] & ok2[s[0], s[2]] & ok2[s[1], s[2]] \
        & ok2[s[0], s[0]] & ok2[s[1], s[1]] & ok2[s[2], s[2]]

    # next[k, p, v] = state reached from k by putting pebble p on value v
    S = base.size
    strides = np.array([(P + 1) ** (pebbles - 1 - i) for i in range(pebbles)])
    nxt = np.empty((S, pebbles, P), dtype=np.int64)
    flat = np.arange(S)
    for p in range(pebbles):
        cleared = flat - s[p] * strides[p]
        nxt[:, p, :] = cleared[:, None] + np.arange(P)[None, :] * strides[p]

    pow_b = (1 << np.arange(n2)).astype(np.int64)
    pow_a = (1 << np.arange(n)).astype(np.int64)
    full_b = (1 << n2) - 1
    full_a = (1 << n) - 1
    wins = base.copy()
    sweeps = 0
    while True:
        good = wins[nxt].reshape(S, pebbles, n, n2)
        # Spoiler picks A' in the second structure: Duplicator needs, for
        # every A', enough points a whose every pebble has an answer in A'
        gm_b = (good * pow_b[None, None, None, :]).sum(axis=3)  # (S, pebbles, n)
        gm_a = (good * pow_a[None, None, :, None]).sum(axis=2)  # (S, pebbles, n2)
        alive = wins.copy()
        for mask in range(1, full_b + 1):
            k = bin(mask).count("1")
            safe = ((gm_b & mask) != 0).all(axis=1).sum(axis=1)
            alive &= safe >= k
        for mask in range(1, full_a + 1):
            k = bin(mask).count("1")
            safe = ((gm_a & mask) != 0).all(axis=1).sum(axis=1)
            alive &= safe >= k
        alive &= base
        sweeps += 1
        if np.array_equal(alive, wins):
            break
        wins = alive
    return GameState(n, n2, pebbles, wins, sweeps)


def pebble_game(g: PairColoring, g2: PairColoring, m=2, init=((), ())) -> str:
    """Winner of the game with the initial configuration pairing the tuples
    of init componentwise: "Duplicator" or "Spoiler"."""
    x, x2 = init
    x = tuple(int(v) for v in x)
    x2 = tuple(int(v) for v in x2)
    if len(x) != len(x2) or len(x) > m + 1:
        raise ValueError("initial tuples must have equal length <= m+1")
    state = solve_game(g, g2, m)
    idx = state.state_index(list(zip(x, x2)))
    return "Duplicator" if state.wins[idx] else "Spoiler"


def duplicator_table(g: PairColoring, g2: PairColoring, m=2):
    """Duplicator-win table over all initial pair configurations
    ((x1, x2), (x1', x2')): a (n^2, n2^2) boolean array."""
    state = solve_game(g, g2, m)
    n, n2 = state.n, state.n2
    out = np.zeros((n * n, n2 * n2), dtype=bool)
    for x1 in range(n):
        for x2 in range(n):
            for y1 in range(n2):
                for y2 in range(n2):
                    idx = state.state_index([(x1, y1), (x2, y2)])
                    out[x1 * n + x2, y1 * n2 + y2] = state.wins[idx]
    return out


def pebble_game_reference(g, g2, init, depth, pebbles=3):
    """Slow memo-free reference: can Duplicator survive `depth` rounds?
    Exponential; only for spot-checking the table solver on tiny inputs."""
    import itertools as it

    n, n2 = g.n, g2.n
    ca, cb = np.asarray(g.color), np.asarray(g2.color)

    def consistent(slots):
        placed = [v for v in slots if v is not None]
        for (a, b) in placed:
            for (c, d) in placed:
                if (a == c) != (b == d) or ca[a, c] != cb[b, d]:
                    return False
        return True

    def put(slots, p, val):
        out = list(slots)
        out[p] = val
        return tuple(out)

    def survive(slots, d):
        if not consistent(slots):
            return False
        if d == 0:
            return True
        for size in range(1, n2 + 1):
            for a_prime in it.combinations(range(n2), size):
                if not any(
                    all(
                        any(survive(put(slots, p, (a, b)), d - 1) for b in a_prime)
                        for p in range(pebbles) for a in resp
                    )
                    for resp in it.combinations(range(n), size)
                ):
                    return False
        for size in range(1, n + 1):
            for a_prime in it.combinations(range(n), size):
                if not any(
                    all(
                        any(survive(put(slots, p, (a, b)), d - 1) for a in a_prime)
                        for p in range(pebbles) for b in resp
                    )
                    for resp in it.combinations(range(n2), size)
                ):
                    return False
        return True

    x, x2 = init
    slots = [None] * pebbles
    for i, val in enumerate(zip(x, x2)):
        slots[i] = val
    return survive(tuple(slots), depth)
