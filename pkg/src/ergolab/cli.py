"""Command-line front end: JSON in, canonical JSON reports out.

Exit codes: 0 the run succeeded and the checked property holds; 1 a property
was violated (the report carries a witness); 2 a search was not exhaustive;
3 malformed or invalid input.

Reports are canonical JSON (sorted keys, no insignificant whitespace,
rationals as reduced ``p/q``), so identical inputs and seed give
byte-identical output.  Wall time is printed to stderr only, keeping stdout
deterministic.  The thread-count environment variable ``ERGOLAB_THREADS`` is
accepted for operational symmetry but has no semantic effect.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from typing import Any

from . import averages, hales_jewett as dhj, removal as removal_mod, serialize
from .serialize import ValidationError, canonical_dumps, format_fraction
from .systems import (
    in_partially_trivial_join,
    joint_distribution_predicate,
    rotation_extension,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_PARTIAL = 2
EXIT_INPUT = 3


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (frozenset, set)):
        return sorted(_jsonable(v) for v in value)
    return value


def _load(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError([path], "file not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(
            [path], f"malformed JSON at line {exc.lineno} column {exc.colno}"
        ) from None


def _digest(payload: Any) -> str:
    return hashlib.sha256(canonical_dumps(_jsonable(payload)).encode()).hexdigest()[:16]


def _emit(args, command: str, inputs: Any, results: dict, exhaustive: bool, code: int) -> int:
    report = {
        "command": command,
        "digest": _digest(inputs),
        "exhaustive": exhaustive,
        "results": _jsonable(results),
        "seed": getattr(args, "seed", 0),
    }
    text = canonical_dumps(report)
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


def _parse_set(text: str) -> frozenset[int]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        raise ValidationError(["--set"], "expected a JSON array of point indices") from None
    if not isinstance(data, list) or any(not isinstance(i, int) for i in data):
        raise ValidationError(["--set"], "expected a JSON array of point indices")
    return frozenset(data)


# -- handlers -----------------------------------------------------------------

def _cmd_avg(args) -> int:
    doc = _load(args.system)
    sys_ = serialize.system_from_json(doc)
    fdoc = _load(args.functions)
    if not isinstance(fdoc, list):
        raise ValidationError(["functions"], "expected an array of function value arrays")
    funcs = [serialize.function_from_json(f, ["functions", i]) for i, f in enumerate(fdoc)]
    avg = averages.nonconventional_average(sys_, funcs, args.N)
    results = {
        "values": [format_fraction(v) for v in avg.values],
        "integral": avg.integral(sys_.space),
        "N": args.N,
    }
    return _emit(args, "avg", {"system": doc, "functions": fdoc, "N": args.N}, results, True, EXIT_OK)


def _cmd_fjoin(args) -> int:
    doc = _load(args.system)
    sys_ = serialize.system_from_json(doc)
    dirs = (
        tuple(int(s) for s in args.directions.split(",")) if args.directions else None
    )
    fj = averages.furstenberg_self_joining(sys_, dirs)
    results = {
        "directions": list(fj.directions),
        "period": fj.period,
        "coupling": serialize.coupling_to_json(fj.coupling, include_base=False),
        "offdiagonal_invariant": averages.check_offdiagonal_invariance(fj),
    }
    return _emit(args, "fjoin", {"system": doc, "directions": dirs}, results, True, EXIT_OK)


def _cmd_recur(args) -> int:
    doc = _load(args.system)
    sys_ = serialize.system_from_json(doc)
    aset = _parse_set(args.set)
    cert = averages.recurrence_certificate(sys_, aset)
    results = {"limit": cert.limit, "witness_n": cert.witness}
    positive = sys_.space.measure(aset) > 0
    ok = (not positive) or (cert.limit > 0 and cert.witness is not None)
    return _emit(
        args,
        "recur",
        {"system": doc, "set": sorted(aset)},
        results,
        True,
        EXIT_OK if ok else EXIT_VIOLATED,
    )


def _cmd_vdc(args) -> int:
    doc = _load(args.seq)
    entries = serialize.sequence_from_json(doc)
    seq = averages.VectorSequence(entries)
    rep = averages.van_der_corput_inequality(seq, args.N, args.H)
    results = {"lhs": rep.lhs, "rhs": rep.rhs, "holds": rep.holds}
    return _emit(
        args,
        "vdc",
        {"seq": doc, "N": args.N, "H": args.H},
        results,
        True,
        EXIT_OK if rep.holds else EXIT_VIOLATED,
    )


def _cmd_joint(args) -> int:
    doc = _load(args.instance)
    parts = serialize.joint_instance_from_json(doc)
    report = joint_distribution_predicate(
        parts["joining"], parts["maps"], parts["subgroups"], parts["lam"]
    )
    results = {
        "per_coordinate": [
            {"holds": r.holds, "witness": r.witness} for r in report.per_coordinate
        ],
        "holds": report.holds,
    }
    return _emit(
        args, "joint", doc, results, True, EXIT_OK if report.holds else EXIT_VIOLATED
    )


def _cmd_removal(args) -> int:
    if args.action == "check":
        doc = _load(args.instance)
        inst = serialize.removal_instance_from_json(doc)
        hyp = removal_mod.check_hypotheses(inst)
        results: dict[str, Any] = {
            "hypotheses": {
                "i": hyp.monotone,
                "ii": hyp.identified,
                "iii": hyp.independent,
            },
            "witness": {k: v for k, v in hyp.witnesses.items()},
        }
        if hyp.all_hold:
            conclusion = removal_mod.check_conclusion(inst, verified=True)
            results["conclusion"] = conclusion
            code = EXIT_OK if conclusion else EXIT_VIOLATED
        else:
            results["conclusion"] = None
            code = EXIT_VIOLATED
        return _emit(args, "removal-check", doc, results, True, code)

    config = removal_mod.SearchConfig(
        sizes=tuple(int(s) for s in args.sizes.split(",")),
        d=args.d,
        seed=args.seed,
        exhaustive=not args.random,
        samples=args.samples,
    )
    hit = removal_mod.search_counterexample(config)
    results = {
        "counterexample": None if hit is None else serialize.removal_instance_to_json(hit),
        "mode": "exhaustive" if config.exhaustive else "random",
        "samples": None if config.exhaustive else config.samples,
    }
    if hit is not None:
        code = EXIT_VIOLATED
    elif config.exhaustive:
        code = EXIT_OK
    else:
        code = EXIT_PARTIAL  # clean but only sampled
    inputs = {
        "sizes": list(config.sizes),
        "d": config.d,
        "exhaustive": config.exhaustive,
        "samples": config.samples,
        "seed": config.seed,
    }
    return _emit(args, "removal-search", inputs, results, config.exhaustive, code)


def _cmd_dhj(args) -> int:
    if args.action == "lines":
        lines = dhj.enumerate_lines(args.k, args.N)
        results = {
            "count": len(lines),
            "identity": (args.k + 1) ** args.N - args.k**args.N,
            "lines": [list(l) for l in lines],
        }
        return _emit(args, "dhj-lines", {"k": args.k, "N": args.N}, results, True, EXIT_OK)
    if args.action == "maxfree":
        res = dhj.max_line_free(args.k, args.N, args.budget)
        results = {
            "size": res.size,
            "extremal": list(res.extremal),
            "exhaustive": res.exhaustive,
        }
        code = EXIT_OK if res.exhaustive else EXIT_PARTIAL
        return _emit(
            args,
            "dhj-maxfree",
            {"k": args.k, "N": args.N, "budget": args.budget},
            results,
            res.exhaustive,
            code,
        )
    if args.action == "force":
        ok, counter = dhj.subspace_forcing_check(args.k, args.L, args.N)
        results = {
            "holds": ok,
            "counterexample": None if counter is None else sorted(counter),
            "threshold": Fraction(args.k ** (2 * args.L) - 1, args.k ** (2 * args.L)),
        }
        return _emit(
            args,
            "dhj-force",
            {"k": args.k, "L": args.L, "N": args.N},
            results,
            True,
            EXIT_OK if ok else EXIT_VIOLATED,
        )
    if args.action == "correspond":
        return _cmd_correspond(args)
    if args.action == "stationarity":
        return _cmd_stationarity(args)
    raise ValidationError(["action"], f"unknown dhj action {args.action!r}")


def _cmd_correspond(args) -> int:
    doc = _load(args.set)
    if not isinstance(doc, list) or any(not isinstance(w, str) for w in doc):
        raise ValidationError(["set"], "expected a JSON array of words")
    cm = dhj.build_correspondence(doc, args.k, args.N, args.L)
    line_events = {
        "/".join(line): cm.line_event(line)
        for line in dhj.line_maps(args.k, args.L)
    }
    results = {
        "measure": serialize.correspondence_to_json(cm),
        "point_events": {w: cm.point_event(w) for w in cm.words},
        "line_events": line_events,
    }
    return _emit(
        args,
        "correspond",
        {"set": doc, "k": args.k, "N": args.N, "L": args.L},
        results,
        True,
        EXIT_OK,
    )


def _cmd_stationarity(args) -> int:
    doc = _load(args.law)
    law = serialize.law_from_json(doc)
    cap = args.dim_cap if args.dim_cap is not None else min(law.depth, 2)
    res = dhj.strong_stationarity_check(law, cap)
    results: dict[str, Any] = {"holds": res.holds, "dim_cap": cap}
    if res.witness is not None:
        dim, im_a, im_b = res.witness
        results["witness"] = {"dimension": dim, "first": list(im_a), "second": list(im_b)}
    if res.holds:
        point, line = dhj.marginals(law)
        results["point_marginal"] = serialize.space_to_json(point)
        results["line_marginal"] = serialize.coupling_to_json(line, include_base=False)
    return _emit(
        args, "stationarity", doc, results, True, EXIT_OK if res.holds else EXIT_VIOLATED
    )


def _cmd_rotation(args) -> int:
    doc = _load(args.rotation)
    rot = serialize.rotation_from_json(doc)
    member = in_partially_trivial_join(rot)
    results: dict[str, Any] = {"input_in_join": member}
    if args.extend:
        ext, fmap = rotation_extension(rot)
        results["extension"] = serialize.rotation_to_json(ext)
        results["extension_in_join"] = in_partially_trivial_join(ext)
        results["factor_map"] = list(fmap.point_map)
    return _emit(args, "rotation", doc, results, True, EXIT_OK)


def _cmd_validate(args) -> int:
    doc = _load(args.file)
    diags = serialize.validate_document(doc, args.schema)
    results = {"ok": not diags, "diagnostics": diags, "schema": args.schema}
    return _emit(args, "validate", doc, results, True, EXIT_OK if not diags else EXIT_INPUT)


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergolab",
        description="Exact checks for finite probability-preserving Z^d systems",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for sampling commands")
    common.add_argument("--budget", type=int, default=5_000_000, help="search node budget")
    common.add_argument("--json", type=str, default=None, help="write the report to a file")
    common.add_argument("--depth", type=int, default=None, help="law truncation depth")
    common.add_argument("--dim-cap", dest="dim_cap", type=int, default=None,
                        help="subspace dimension cap for stationarity checks")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("avg", parents=[common], help="nonconventional average")
    p.add_argument("--system", required=True)
    p.add_argument("--functions", required=True)
    p.add_argument("-N", type=int, required=True)
    p.set_defaults(func=_cmd_avg)

    p = sub.add_parser("fjoin", parents=[common], help="Furstenberg self-joining")
    p.add_argument("--system", required=True)
    p.add_argument("--directions", default=None, help="comma-separated generator indices")
    p.set_defaults(func=_cmd_fjoin)

    p = sub.add_parser("recur", parents=[common], help="recurrence certificate")
    p.add_argument("--system", required=True)
    p.add_argument("--set", required=True, help="JSON array of point indices")
    p.set_defaults(func=_cmd_recur)

    p = sub.add_parser("vdc", parents=[common], help="van der Corput inequality")
    p.add_argument("--seq", required=True)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("-H", type=int, required=True)
    p.set_defaults(func=_cmd_vdc)

    p = sub.add_parser("joint", parents=[common], help="joint distribution predicate")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=_cmd_joint)

    p = sub.add_parser("removal", parents=[common], help="removal instance tools")
    p.add_argument("action", choices=["check", "search"])
    p.add_argument("--instance", help="instance file for 'check'")
    p.add_argument("--sizes", default="2", help="comma-separated point counts")
    p.add_argument("-d", type=int, default=3)
    p.add_argument("--random", action="store_true", help="sample instead of enumerating")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=_cmd_removal)

    p = sub.add_parser("dhj", parents=[common], help="combinatorial space tools")
    p.add_argument("action", choices=["lines", "maxfree", "force", "correspond", "stationarity"])
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-N", type=int, default=2)
    p.add_argument("-L", type=int, default=1)
    p.add_argument("--set", help="JSON file with an array of words (correspond)")
    p.add_argument("--law", help="law truncation file (stationarity)")
    p.set_defaults(func=_cmd_dhj)

    p = sub.add_parser("correspond", parents=[common], help="correspondence measure")
    p.add_argument("--set", required=True)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("-L", type=int, default=1)
    p.set_defaults(func=_cmd_correspond)

    p = sub.add_parser("stationarity", parents=[common], help="strong stationarity check")
    p.add_argument("--law", required=True)
    p.set_defaults(func=_cmd_stationarity)

    p = sub.add_parser("rotation", parents=[common], help="group rotation membership and extension")
    p.add_argument("--rotation", required=True)
    p.add_argument("--extend", action="store_true")
    p.set_defaults(func=_cmd_rotation)

    p = sub.add_parser("validate", parents=[common], help="validate a JSON document")
    p.add_argument("--schema", required=True)
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which this tool reserves for
        # non-exhaustive searches; remap to the input-error code.
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    start = time.perf_counter()
    try:
        code = args.func(args)
    except ValidationError as exc:
        print(canonical_dumps({"error": str(exc)}))
        return EXIT_INPUT
    except (ValueError, TypeError) as exc:
        print(canonical_dumps({"error": str(exc)}))
        return EXIT_INPUT
    finally:
        elapsed = time.perf_counter() - start
        print(f"# wall_time_s={elapsed:.3f}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
