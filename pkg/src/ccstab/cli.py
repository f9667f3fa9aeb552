"""Command-line frontend.

Subcommands: refine, wlm, wld, deepstab, sigma, extend, compare, plane,
oracle, corpus.  Reports are JSON on stdout; graph/coloring payloads use the
plain-text formats of the library.  Exit codes: 0 success, 1 "distinguished"
verdict (or failed corpus checks), 2 input/cap errors.

Heavy imports happen after argument parsing so that --threads can bound the
BLAS/OpenMP pools before numpy is loaded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="ccstab",
        description="coherent configurations, WL closures, depth-1 stabilization",
    )
    ap.add_argument("--threads", type=int, default=None,
                    help="bound internal (BLAS/OpenMP) parallelism")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="coherent closure of a graph rainbow")
    p.add_argument("graph")
    p.add_argument("--tensor", action="store_true", help="include intersection numbers")
    p.add_argument("--dump-coloring", metavar="PATH", help="write the stable pair coloring")

    p = sub.add_parser("wlm", help="m-dimensional WL closure")
    p.add_argument("graph")
    p.add_argument("--m", type=int, default=3, choices=(2, 3, 4))
    p.add_argument("--dump-coloring", metavar="PATH", help="write the m-ary coloring")

    p = sub.add_parser("wld", help="sesquiclosure (sigma_{1,2} fixed point)")
    p.add_argument("graph")
    p.add_argument("--dump-coloring", metavar="PATH")

    p = sub.add_parser("deepstab", help="depth-1 stabilization fixed point")
    p.add_argument("graph")
    p.add_argument("--sigmas", default="1,2,3,4", help="comma list from {1,2,3,4}")

    p = sub.add_parser("sigma", help="one sigma_i application over the closure")
    p.add_argument("graph")
    p.add_argument("--i", type=int, required=True, choices=(1, 2, 3, 4))

    p = sub.add_parser("extend", help="point extension of the closure")
    p.add_argument("graph")
    p.add_argument("--points", required=True, help="comma list, e.g. 0 or 0,3")

    p = sub.add_parser("compare", help="equivalence verdict for two graphs")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--method", default="wld",
                   choices=("wl", "wl3", "wl4", "wld", "deepstab"))

    p = sub.add_parser("plane", help="projective-plane reports")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--q", type=int)
    src.add_argument("--load", metavar="FILE")
    p.add_argument("--dual", action="store_true")
    p.add_argument("--report", action="store_true",
                   help="full report (two-extension, one-point extension)")
    p.add_argument("--two-extension", choices=("auto", "on", "off"), default="auto")

    p = sub.add_parser("oracle", help="brute-force oracles")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    po = osub.add_parser("orbits")
    po.add_argument("graph")
    po.add_argument("--arity", type=int, default=2, choices=(1, 2, 3))
    pg = osub.add_parser("game")
    pg.add_argument("graph1")
    pg.add_argument("graph2")
    pg.add_argument("--init", default=":",
                    help="initial tuples 'a,b:c,d' pairing a->c, b->d")

    p = sub.add_parser("corpus", help="property suite over built-in graphs")
    p.add_argument("--max-n", type=int, default=5)
    return ap


def _load_graph(path):
    from .graphs import parse_graph, rainbow

    try:
        with open(path) as fh:
            g = parse_graph(fh.read())
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}")
    except ValueError as exc:
        raise SystemExit2(f"{path}: {exc}")
    return rainbow(g)


class SystemExit2(Exception):
    pass


def _emit(payload, code=0):
    print(json.dumps(payload, indent=2, sort_keys=True))
    return code


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return _dispatch(args)
    except SystemExit2 as exc:
        print(str(exc), file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    from .core import CapExceeded

    try:
        if args.command == "refine":
            return _cmd_refine(args)
        if args.command == "wlm":
            return _cmd_wlm(args)
        if args.command == "wld":
            return _cmd_wld(args)
        if args.command == "deepstab":
            return _cmd_deepstab(args)
        if args.command == "sigma":
            return _cmd_sigma(args)
        if args.command == "extend":
            return _cmd_extend(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "plane":
            return _cmd_plane(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "corpus":
            return _cmd_corpus(args)
    except CapExceeded as exc:
        print(str(exc), file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


def _cmd_refine(args):
    from .cc2 import cc_report, wl_closure
    from .core import dumps_pair_coloring

    cc = wl_closure(_load_graph(args.graph))
    if args.dump_coloring:
        with open(args.dump_coloring, "w") as fh:
            fh.write(dumps_pair_coloring(cc.coloring))
    return _emit(cc_report(cc, with_tensor=args.tensor))


def _cmd_wlm(args):
    import numpy as np

    from .wlm import dumps_mary, project, to_pair_coloring, wlm_closure
    from .cc2 import build_cc

    f = wlm_closure(_load_graph(args.graph), args.m)
    report = {
        "m": f.m,
        "n": f.n,
        "classes": f.R,
        "census": np.bincount(f.flat(), minlength=f.R).tolist(),
    }
    if args.m > 2:
        p2 = build_cc(to_pair_coloring(project(f, 2)))
        report["pr2_rank"] = p2.rank
        report["pr2_valencies"] = [int(v) for v in p2.left_valency]
    if args.dump_coloring:
        with open(args.dump_coloring, "w") as fh:
            fh.write(dumps_mary(f))
    return _emit(report)


def _cmd_wld(args):
    from .cc2 import cc_report
    from .core import dumps_pair_coloring
    from .stab import deep_stab

    res = deep_stab(_load_graph(args.graph), selected=(1, 2))
    report = cc_report(res.cc)
    report["trace"] = res.trace
    if args.dump_coloring:
        with open(args.dump_coloring, "w") as fh:
            fh.write(dumps_pair_coloring(res.cc.coloring))
    return _emit(report)


def _parse_sigmas(raw):
    try:
        sigmas = tuple(sorted({int(v) for v in raw.split(",") if v.strip()}))
    except ValueError:
        raise SystemExit2(f"cannot parse --sigmas {raw!r}")
    if not sigmas or any(i not in (1, 2, 3, 4) for i in sigmas):
        raise SystemExit2(f"--sigmas must be a nonempty subset of 1,2,3,4, got {raw!r}")
    return sigmas


def _cmd_deepstab(args):
    from .cc2 import cc_report
    from .stab import deep_stab

    res = deep_stab(_load_graph(args.graph), selected=_parse_sigmas(args.sigmas))
    report = cc_report(res.cc)
    report["trace"] = res.trace
    return _emit(report)


def _cmd_sigma(args):
    from .cc2 import cc_report, wl_closure
    from .stab import sigma

    cc = wl_closure(_load_graph(args.graph))
    out = sigma(cc, args.i)
    report = cc_report(out)
    report["rank_before"] = cc.rank
    report["sigma"] = args.i
    return _emit(report)


def _cmd_extend(args):
    from .cc2 import cc_report, point_extension, wl_closure

    try:
        points = tuple(int(v) for v in args.points.split(","))
    except ValueError:
        raise SystemExit2(f"cannot parse --points {args.points!r}")
    cc = wl_closure(_load_graph(args.graph))
    try:
        ext = point_extension(cc, points)
    except ValueError as exc:
        raise SystemExit2(str(exc))
    report = cc_report(ext)
    report["points"] = list(points)
    return _emit(report)


def _cmd_compare(args):
    from .algiso import (
        NoStandardSimilarity,
        deepstab_equivalent,
        wld_equivalent,
        wlm_equivalent,
    )

    a = _load_graph(args.graph1)
    b = _load_graph(args.graph2)
    try:
        if args.method == "wl":
            verdict = wlm_equivalent(a, b, 2)
        elif args.method == "wl3":
            verdict = wlm_equivalent(a, b, 3)
        elif args.method == "wl4":
            verdict = wlm_equivalent(a, b, 4)
        elif args.method == "wld":
            verdict = wld_equivalent(a, b)
        else:
            verdict = deepstab_equivalent(a, b)
    except NoStandardSimilarity as exc:
        raise SystemExit2(f"no standard similarity: {exc}")
    print(verdict.to_json(indent=2, sort_keys=True))
    return 0 if verdict.equivalent else 1


def _cmd_plane(args):
    from .planes import PlaneError, dual_plane, load_plane, pg2, plane_report, plane_scheme

    try:
        plane = pg2(args.q) if args.q is not None else load_plane(args.load)
        if args.dual:
            plane = dual_plane(plane)
        if args.report:
            mode = {"auto": "auto", "on": True, "off": False}[args.two_extension]
            return _emit(plane_report(plane, with_two_extension=mode))
        scheme = plane_scheme(plane)
        return _emit({
            "q": plane.q,
            "points": plane.n_points,
            "lines": len(plane.lines),
            "scheme_rank": scheme.cc.rank,
            "valencies": [int(v) for v in scheme.cc.left_valency],
        })
    except (PlaneError, ValueError, OSError) as exc:
        raise SystemExit2(str(exc))


def _cmd_oracle(args):
    from .core import CapExceeded

    if args.oracle_command == "orbits":
        from .oracles import brute_orbits

        try:
            orb = brute_orbits(_load_graph(args.graph), max_arity=args.arity)
        except (CapExceeded, ValueError) as exc:
            raise SystemExit2(str(exc))
        report = {
            "group_order": orb.group_order,
            "generators": [[int(v) for v in g] for g in orb.generators],
            "point_orbit_count": int(len(set(orb.point_orbits.tolist()))),
            "pair_orbit_count": orb.pair_coloring.R,
        }
        if orb.triple_orbits is not None:
            report["triple_orbit_count"] = int(len(set(orb.triple_orbits.tolist())))
        return _emit(report)

    from .algiso import NoStandardSimilarity
    from .oracles import pebble_game

    raw_a, _, raw_b = args.init.partition(":")
    try:
        x = tuple(int(v) for v in raw_a.split(",") if v.strip())
        x2 = tuple(int(v) for v in raw_b.split(",") if v.strip())
    except ValueError:
        raise SystemExit2(f"cannot parse --init {args.init!r}")
    try:
        winner = pebble_game(_load_graph(args.graph1), _load_graph(args.graph2),
                             init=(x, x2))
    except (NoStandardSimilarity, ValueError) as exc:
        raise SystemExit2(str(exc))
    return _emit({"winner": winner, "init": [list(x), list(x2)]})


def _cmd_corpus(args):
    from .corpus_suite import run_corpus_suite

    report = run_corpus_suite(max_n=args.max_n)
    code = 0 if report["all_pass"] else 1
    _emit(report)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
