"""Command line entry point: ``skewprod <command> ...``.

Exit codes: 0 success or all checks passed, 1 usage or parse error,
2 a verification failed, 3 the search budget was exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import errors
from .cache import VERSION, ResultCache
from .group import FiniteGroup, parse_descriptor
from .skew import DEFAULT_NODE_CAP, SkewMorphism, enumerate_skew_morphisms, skew_product

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_BUDGET = 0, 1, 2, 3
VERIFY_CHECKS = ("fitting", "two-group", "core-trichotomy", "order-bound", "cyclic-orders",
                 "aut-2group", "all")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _group(text: str) -> FiniteGroup:
    return parse_descriptor(text)


def _morphisms(G: FiniteGroup, args) -> list[SkewMorphism]:
    cache = None if args.no_cache else ResultCache(args.cache_dir)
    params = {"order_cap": args.order_cap}
    if cache is not None:
        hit = cache.load_morphisms(G, params)
        if hit is not None:
            return hit
    res = enumerate_skew_morphisms(G, order_cap=args.order_cap, node_cap=args.node_cap, jobs=args.jobs)
    if cache is not None:
        cache.store_morphisms(G, res.skew_morphisms, params)
    return res.skew_morphisms


def cmd_enumerate(args, out) -> int:
    G = _group(args.group)
    ms = _morphisms(G, args)
    if args.summary:
        hist: dict[int, int] = {}
        for s in ms:
            hist[s.sigma_order] = hist.get(s.sigma_order, 0) + 1
        if args.format == "csv":
            out.write("order,count\n")
            for k in sorted(hist):
                out.write(f"{k},{hist[k]}\n")
        else:
            out.write(_dump({"group": G.descriptor, "count": len(ms),
                             "histogram": {str(k): hist[k] for k in sorted(hist)},
                             "version": VERSION}) + "\n")
        return EXIT_OK
    if args.format == "csv":
        out.write("group,order,sigma,pi\n")
        for s in ms:
            out.write(f"{G.descriptor},{s.sigma_order},{' '.join(map(str, s.sigma.tolist()))},"
                      f"{' '.join(map(str, s.pi.tolist()))}\n")
    else:
        for s in ms:
            out.write(_dump({**s.certificate(), "version": VERSION}) + "\n")
    return EXIT_OK


def cmd_classify(args, out) -> int:
    from .classifier import classify_skew_product
    from .theorems import instance_id

    G = _group(args.group)
    status = EXIT_OK
    for s in _morphisms(G, args):
        sp = skew_product(s)
        try:
            c = classify_skew_product(sp, search=not args.no_witness)
            row = {"morphism": instance_id(s), **c.to_dict()}
        except errors.CoreShapeUnexpected as e:
            row = {"morphism": instance_id(s), "error": e.code, "core": e.info.get("core")}
            status = EXIT_FAIL
        except errors.HypothesesNotMet as e:
            row = {"morphism": instance_id(s), "skip": str(e)}
        out.write(_dump({**row, "version": VERSION}) + "\n")
    return status


def cmd_params(args, out) -> int:
    from .classifier import FAMILIES, enumerate_family_params

    fam = args.family
    fams = [f for f in FAMILIES if f == fam or f.startswith(fam + "_")]
    if not fams:
        raise errors.ParseError(f"unknown family {fam!r}")
    ps = enumerate_family_params(args.n, args.m, args.gtype, fams, corrected=not args.literal)
    for p in ps:
        if args.format == "json":
            out.write(_dump({**p.to_json(), "descriptor": p.descriptor(), "version": VERSION}) + "\n")
        else:
            out.write(p.descriptor() + "\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    from . import theorems as th

    checks = list(th.CHECKS) if args.check == "all" else [args.check]
    failed = False
    for target in args.corpus:
        if args.check == "cyclic-orders":
            reps = [th.verify_cyclic_skew_orders(int(target))]
        elif args.check == "aut-2group":
            reps = [th.verify_aut_2group(_group(target))]
        else:
            reps = th.sweep(_morphisms(_group(target), args), checks)
        for r in reps:
            failed |= r.verdict == th.FAIL
            out.write(_dump({**r.to_dict(), "version": VERSION}) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_maps(args, out) -> int:
    from .cayley_maps import CSV_FIELDS, census

    rows = census(_morphisms(_group(args.group), args))
    if args.format == "json":
        for r in rows:
            out.write(_dump({**r, "version": VERSION}) + "\n")
    else:
        import csv
        w = csv.DictWriter(out, fieldnames=CSV_FIELDS + ("version",), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "version": VERSION})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", default=None, help="result cache directory")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for enumeration")
    common.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP, help="search node budget")
    common.add_argument("--order-cap", type=int, default=None, help="largest skew-morphism order searched")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = _Parser(prog="skewprod", description="Skew morphisms and skew products of finite groups")
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate", parents=[common], help="all skew morphisms of a group")
    e.add_argument("group")
    e.add_argument("--summary", action="store_true", help="count and order histogram only")
    e.set_defaults(func=cmd_enumerate, default_format="json")

    c = sub.add_parser("classify", parents=[common], help="family tags for every skew product")
    c.add_argument("group")
    c.add_argument("--no-witness", action="store_true", help="skip the parameter witness search")
    c.set_defaults(func=cmd_classify, default_format="json")

    q = sub.add_parser("params", parents=[common], help="family parameter tuples")
    q.add_argument("family", help="F1, F2, F2_1, F2_2 or F3")
    q.add_argument("n", type=int)
    q.add_argument("m", type=int)
    q.add_argument("gtype", choices=("D", "Q", "SD"))
    q.add_argument("--literal", action="store_true", help="presentation conditions without corrections")
    q.set_defaults(func=cmd_params, default_format="text")

    v = sub.add_parser("verify", parents=[common], help="run a structural check over a corpus")
    v.add_argument("check", choices=VERIFY_CHECKS)
    v.add_argument("corpus", nargs="+", help="group descriptors (an exponent n for cyclic-orders)")
    v.set_defaults(func=cmd_verify, default_format="json")

    mp = sub.add_parser("maps", parents=[common], help="regular Cayley map census")
    mp.add_argument("group")
    mp.set_defaults(func=cmd_maps, default_format="csv")
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    try:
        return args.func(args, out)
    except errors.BudgetExceeded as e:
        sys.stderr.write(_dump({"error": e.code, "message": str(e), "stats": e.info.get("stats")}) + "\n")
        return EXIT_BUDGET
    except (errors.ParseError, errors.InvalidParameter, errors.TooLarge, errors.InvalidElement) as e:
        sys.stderr.write(f"skewprod: {e.code}: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
