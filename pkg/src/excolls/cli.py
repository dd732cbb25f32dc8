"""Batch command-line front end.

Every operation is exposed as a subcommand emitting JSON (default),
CSV, or a human-readable table.  Output is deterministic: identical
invocations produce byte-identical output.  Honest check failures exit
1; malformed input or unknown names exit 2 with a machine-readable
error record on stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .acceptance import render, run_all
from .classify import enumerate_maximal, load_tables, compare_table, match_templates
from .cohomology import cohomology, cz_classification, euler_char
from .mutation import (
    NotFound,
    SearchBudget,
    check_certificate,
    parse_certificate,
    verify_fullness,
)
from .variety import dump_registry, registry, variety


@dataclass(frozen=True)
class RunConfig:
    variety: str | None = None
    box: int = 6
    budget: int = 10**6
    fmt: str = "json"
    variant: str = "corrected"

    def __post_init__(self) -> None:
        if self.box <= 0:
            raise ValueError("box bound must be positive")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _error(code: str, message: str, **extra) -> int:
    record = {"schema": 1, "error": {"code": code, "message": message, **extra}}
    _emit(record)
    return 2


def _parse_divisor(text: str) -> tuple[int, int]:
    try:
        a, b = (int(t.strip()) for t in text.split(","))
        return (a, b)
    except ValueError:
        raise ValueError(f"malformed divisor {text!r}; expected 'a,b'") from None


def _parse_collection(text: str) -> tuple[tuple[int, int], ...]:
    try:
        raw = json.loads(text)
        out = tuple((int(d[0]), int(d[1])) for d in raw)
        if not out:
            raise ValueError
        return out
    except (ValueError, TypeError, IndexError, KeyError):
        raise ValueError(
            f"malformed collection; expected JSON like [[0,0],[1,0]]"
        ) from None


def _csv_line(cells) -> str:
    quoted = []
    for c in cells:
        s = str(c)
        if "," in s or '"' in s:
            s = '"' + s.replace('"', '""') + '"'
        quoted.append(s)
    return ",".join(quoted)


def _cmd_varieties(args) -> int:
    if args.format == "json":
        _emit(dump_registry())
    elif args.format == "csv":
        print(_csv_line(["id", "cl", "dim", "max_length", "display"]))
        for v in registry():
            print(_csv_line([v.id, v.cl, v.dim, v.max_length, v.display]))
    else:
        for v in registry():
            print(f"{v.cl:5s} {v.id:14s} dim={v.dim} max_length={v.max_length}  {v.display}")
    return 0


def _cmd_chi(args) -> int:
    v = variety(args.variety)
    d = _parse_divisor(args.divisor)
    value = euler_char(v, d)
    if args.format == "human":
        print(value)
    else:
        _emit({"schema": 1, "variety": v.id, "divisor": list(d), "chi": value})
    return 0


def _cmd_cohomology(args) -> int:
    v = variety(args.variety)
    d = _parse_divisor(args.divisor)
    h = cohomology(v, d)
    if args.format == "human":
        print(f"h = {list(h)}")
    else:
        _emit(
            {
                "schema": 1,
                "variety": v.id,
                "divisor": list(d),
                "h": list(h),
                "chi": sum((-1) ** i * x for i, x in enumerate(h)),
            }
        )
    return 0


def _cmd_cz_list(args) -> int:
    v = variety(args.variety)
    cls = cz_classification(v, args.box)
    if args.format == "csv":
        print(_csv_line(["kind", "value"]))
        for f in cls.line_families:
            print(_csv_line(["line", str(f)]))
        for a, b in cls.sporadic:
            print(_csv_line(["sporadic", f"({a},{b})"]))
    elif args.format == "human":
        print(f"{v.id}, box {args.box}:")
        print("  lines: " + ", ".join(str(f) for f in cls.line_families))
        print("  sporadic: " + ", ".join(f"({a},{b})" for a, b in cls.sporadic))
    else:
        _emit(
            {
                "schema": 1,
                "variety": v.id,
                "box": cls.box,
                "line_families": [str(f) for f in cls.line_families],
                "sporadic": [list(d) for d in cls.sporadic],
            }
        )
    return 0


def _cmd_enumerate(args) -> int:
    v = variety(args.variety)
    found = enumerate_maximal(v, args.box, length=args.length)
    if args.format == "csv":
        print(_csv_line(["index", "members"]))
        for i, c in enumerate(found):
            print(_csv_line([i, " ".join(f"({a},{b})" for a, b in c)]))
    elif args.format == "human":
        for c in found:
            print(" ".join(f"({a},{b})" for a, b in c))
    else:
        _emit(
            {
                "schema": 1,
                "variety": v.id,
                "box": args.box,
                "collections": [[list(d) for d in c] for c in found],
            }
        )
    return 0


def _cmd_match(args) -> int:
    found = None
    vid = args.variety
    box = args.box
    if not sys.stdin.isatty():
        text = sys.stdin.read().strip()
        if text:
            try:
                envelope = json.loads(text)
                vid = envelope["variety"]
                box = envelope.get("box", box)
                found = tuple(
                    tuple((int(a), int(b)) for a, b in c)
                    for c in envelope["collections"]
                )
            except (ValueError, TypeError, KeyError):
                raise ValueError(
                    "malformed collection stream; expected the enumerate envelope"
                ) from None
    if vid is None:
        return _error("missing-variety", "pass --variety or pipe an enumerate envelope")
    v = variety(vid)
    variants = ("corrected", "verbatim") if args.variant == "both" else (args.variant,)
    records = {}
    ok = True
    for variant in variants:
        rep = match_templates(v, found, box, variant)
        rec = rep.to_record()
        rec["clean"] = rep.clean
        records[variant] = rec
        ok = ok and rep.clean
    payload: dict = {"schema": 1}
    if len(records) == 1:
        payload.update(next(iter(records.values())))
    else:
        payload.update({"variety": v.id, "variants": records})
    if args.format == "human":
        for variant, rec in records.items():
            print(
                f"{v.id} [{variant}]: {len(rec['matched'])} matched, "
                f"{len(rec['unmatched'])} unmatched, {len(rec['missing'])} missing"
            )
    else:
        _emit(payload)
    return 0 if ok else 1


def _cmd_tables(args) -> int:
    out = []
    ok = True
    for fx in load_tables():
        if args.number is not None and fx.number != args.number:
            continue
        cmpr = compare_table(fx, args.grid)
        ok = ok and cmpr.clean_modulo_flags
        out.append(
            {
                "number": cmpr.number,
                "variety": cmpr.variety,
                "grid": cmpr.grid,
                "mismatched": [list(k) for k in cmpr.mismatched],
                "flagged": [list(k) for k in cmpr.flagged],
                "corrected_clean": cmpr.corrected_clean,
                "clean_modulo_flags": cmpr.clean_modulo_flags,
            }
        )
    if args.format == "csv":
        print(_csv_line(["number", "variety", "mismatched", "flagged", "clean_modulo_flags"]))
        for rec in out:
            print(
                _csv_line(
                    [
                        rec["number"],
                        rec["variety"],
                        len(rec["mismatched"]),
                        len(rec["flagged"]),
                        rec["clean_modulo_flags"],
                    ]
                )
            )
    elif args.format == "human":
        for rec in out:
            status = "ok" if rec["clean_modulo_flags"] else "MISMATCH"
            print(
                f"table {rec['number']:2d} {rec['variety']:14s} "
                f"flagged={len(rec['flagged']):2d} {status}"
            )
    else:
        _emit({"schema": 1, "tables": out})
    return 0 if ok else 1


def _cmd_verify(args) -> int:
    v = variety(args.variety)
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = args.collection
    if text is None:
        return _error("missing-collection", "pass --collection or --input")
    target = _parse_collection(text)
    budget = SearchBudget(max_states=args.budget, box=args.box)
    result = verify_fullness(v, target, budget)
    if isinstance(result, NotFound):
        _emit(
            {
                "schema": 1,
                "error": {
                    "code": "budget-exhausted",
                    "message": "no certificate found within the search budget",
                    "explored": result.explored,
                },
            }
        )
        return 1
    _emit(result.to_record())
    return 0


def _cmd_check_cert(args) -> int:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    try:
        cert = parse_certificate(text)
    except (ValueError, TypeError, KeyError):
        return _error("malformed-certificate", "certificate JSON does not parse")
    v = variety(cert.variety)
    verdict = check_certificate(v, cert)
    _emit(
        {
            "schema": 1,
            "ok": verdict.ok,
            "failure_index": verdict.failure_index,
            "reason": verdict.reason,
        }
    )
    return 0 if verdict.ok else 1


def _cmd_reproduce_all(args) -> int:
    results = run_all()
    if args.format == "json":
        _emit(
            {
                "schema": 1,
                "criteria": [
                    {
                        "number": r.number,
                        "name": r.name,
                        "passed": r.passed,
                        "details": list(r.details),
                    }
                    for r in results
                ],
                "passed": sum(1 for r in results if r.passed),
                "total": len(results),
            }
        )
    else:
        print(render(results, verbose=not args.quiet, timings=False))
    return 0 if all(r.passed for r in results) else 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="excolls",
        description=__doc__,
        epilog="Set EXCOLLS_DATA_DIR to point at an alternate data directory.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp, choices=("json", "csv", "human")):
        sp.add_argument("--format", choices=choices, default="json")

    sp = sub.add_parser("varieties", help="dump the variety registry")
    fmt(sp)
    sp.set_defaults(fn=_cmd_varieties)

    sp = sub.add_parser("chi", help="Euler characteristic of a divisor")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--divisor", required=True, metavar="a,b")
    fmt(sp, ("json", "human"))
    sp.set_defaults(fn=_cmd_chi)

    sp = sub.add_parser("cohomology", help="cohomology dimension vector")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--divisor", required=True, metavar="a,b")
    fmt(sp, ("json", "human"))
    sp.set_defaults(fn=_cmd_cohomology)

    sp = sub.add_parser("cz-list", help="cohomologically zero divisors in a box")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--box", type=int, default=8)
    fmt(sp)
    sp.set_defaults(fn=_cmd_cz_list)

    sp = sub.add_parser("enumerate", help="maximal exceptional collections in a box")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--box", type=int, default=6)
    sp.add_argument("--length", type=int, default=None)
    fmt(sp)
    sp.set_defaults(fn=_cmd_enumerate)

    sp = sub.add_parser("match", help="match collections against the type lists")
    sp.add_argument("--variety")
    sp.add_argument("--box", type=int, default=6)
    sp.add_argument(
        "--variant", choices=("corrected", "verbatim", "both"), default="corrected"
    )
    fmt(sp, ("json", "human"))
    sp.set_defaults(fn=_cmd_match)

    sp = sub.add_parser("tables", help="recompute and compare the pair tables")
    sp.add_argument("--number", type=int, default=None)
    sp.add_argument("--grid", type=int, default=4)
    fmt(sp)
    sp.set_defaults(fn=_cmd_tables)

    sp = sub.add_parser("verify", help="search for a fullness certificate")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--collection", help="JSON [[a,b],...]")
    sp.add_argument("--input", help="file with the collection JSON")
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--box", type=int, default=6)
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("check-cert", help="replay a certificate")
    sp.add_argument("--input", help="certificate file (default: stdin)")
    sp.set_defaults(fn=_cmd_check_cert)

    sp = sub.add_parser("reproduce-all", help="run every acceptance criterion")
    sp.add_argument("--format", choices=("json", "human"), default="human")
    sp.add_argument("--quiet", action="store_true", help="matrix lines only")
    sp.set_defaults(fn=_cmd_reproduce_all)

    return p


_VALUED_FLAGS = ("--divisor", "--collection")


def _absorb_values(argv: list[str]) -> list[str]:
    """Join value-taking flags with their argument so negative coordinates
    like '--divisor -1,0' survive option parsing."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUED_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(_absorb_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.fn(args)
    except KeyError as err:
        msg = err.args[0] if err.args else str(err)
        if isinstance(msg, str) and msg.startswith("unknown variety id"):
            return _error("unknown-variety", msg)
        return _error("internal", f"unexpected lookup failure: {msg}")
    except ValueError as err:
        msg = str(err)
        if msg.startswith("malformed divisor"):
            return _error("malformed-divisor", msg)
        if msg.startswith("malformed collection"):
            return _error("malformed-collection", msg)
        if msg.startswith("malformed collection stream"):
            return _error("malformed-collection", msg)
        if msg.startswith("not an exceptional collection"):
            return _error("not-exceptional", msg)
        return _error("invalid-input", msg)
    except OSError as err:
        return _error("io-error", str(err))


if __name__ == "__main__":
    sys.exit(main())
