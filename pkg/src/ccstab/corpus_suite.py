"""The `corpus` property sweep: closure laws, the depth-1 / WL_3 agreement,
automorphism preservation, and the named sesquiclosed examples, over the
built-in graphs."""

from __future__ import annotations

import numpy as np

from .cc2 import validate_cc, wl_closure
from .core import PairColoring
from .graphs import (
    disjoint_union,
    graphs_up_to,
    heawood,
    named_corpus,
    rainbow,
    rook44,
    shrikhande,
)
from .algiso import sesquiclosed_check
from .oracles import brute_orbits
from .stab import sesquiclosure, sigma, ExtensionCache
from .wlm import project, to_pair_coloring, wlm_closure


def _check(name, fn):
    try:
        detail = fn()
        return {"name": name, "pass": True, "detail": detail}
    except AssertionError as exc:
        return {"name": name, "pass": False, "detail": str(exc)}


def run_corpus_suite(max_n=5) -> dict:
    small = graphs_up_to(min(max_n, 6))
    named = [g for g in named_corpus() if g.n <= 16]
    checks = []

    def closure_laws():
        for g in small:
            rb = rainbow(g)
            cc = wl_closure(rb)
            assert cc.coloring.refines(rb), f"not extensive on {g.name}"
            again = wl_closure(cc.coloring)
            assert again.coloring.same_partition(cc.coloring), f"not idempotent on {g.name}"
            assert validate_cc(cc.coloring).ok, f"invalid closure on {g.name}"
        return f"{len(small)} graphs"

    checks.append(_check("wl_closure extensive+idempotent+valid", closure_laws))

    def wld_laws():
        for g in small:
            rb = rainbow(g)
            y = sesquiclosure(rb)
            assert y.coloring.refines(rb), f"not extensive on {g.name}"
            z = sesquiclosure(y.coloring)
            assert z.coloring.same_partition(y.coloring), f"not idempotent on {g.name}"
            rep = sesquiclosed_check(y)
            assert rep.ok, f"sesquiclosure of {g.name} not sesquiclosed: {rep}"
        return f"{len(small)} graphs"

    checks.append(_check("sesquiclosure extensive+idempotent+sesquiclosed", wld_laws))

    def thm_agreement():
        for g in small:
            rb = rainbow(g)
            p2 = to_pair_coloring(project(wlm_closure(rb, 3), 2))
            y = sesquiclosure(rb)
            assert p2.same_partition(y.coloring), f"pr2 WL3 != WLD on {g.name}"
        return f"{len(small)} graphs"

    checks.append(_check("pr2(WL3) = WLD", thm_agreement))

    def aut_preserved():
        pool = [g for g in small if g.n <= 6][-40:]
        for g in pool:
            rb = rainbow(g)
            orb = brute_orbits(rb)
            cc = wl_closure(rb)
            cache = ExtensionCache(cc)
            for i in (1, 2):
                out = sigma(cc, i, cache=cache).coloring.color
                for perm in orb.generators:
                    assert np.array_equal(out[np.ix_(perm, perm)], out), \
                        f"sigma_{i} breaks an automorphism of {g.name}"
        return f"{len(pool)} graphs"

    checks.append(_check("sigma_i preserve automorphisms", aut_preserved))

    def named_examples():
        rep = sesquiclosed_check(wl_closure(rainbow(heawood())))
        assert rep.ok, "plane scheme q=2 should satisfy S1+S2"
        rep = sesquiclosed_check(wl_closure(rainbow(shrikhande())))
        assert rep.s2_ok and not rep.s1_ok, "Shrikhande should fail exactly S1"
        rep = sesquiclosed_check(wl_closure(rainbow(disjoint_union(shrikhande(), rook44()))))
        assert not rep.s2_ok, "Shrikhande + rook should fail S2"
        return "3 named examples"

    checks.append(_check("named sesquiclosed examples", named_examples))

    return {
        "max_n": max_n,
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
    }
