"""Command-line surface.

Subcommands:

* ``hhh``      -- homology series of a Coxeter braid closure
* ``hilb``     -- bigraded Hilbert table of the intersection ideal
* ``verify``   -- engine-vs-oracle comparison for one degree vector
* ``basecase`` -- derive / import / list FT4^n base-case entries
* ``selftest`` -- run the acceptance suite

Exit codes: 0 success, 1 verification mismatch or failed selftest,
2 invalid input, 3 missing base case.  Identical argv and cache state
produce byte-identical standard output.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .cache import Store
from .engine import Engine, InvalidDegrees, validate_degrees
from .ideal_oracle import hilb_table
from .series import CoeffTable, GradedSeries
from .torus_base import (
    BaseCaseTable,
    ChecksumMismatch,
    EvalMode,
    MissingBaseCase,
    ParseError,
    PositivityViolation,
    TorusBases,
    derive_ft4_a0_auto,
    make_entry,
)

__all__ = ["main", "run", "format_series"]

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_MISSING_BASE = 3


def format_series(series: GradedSeries, fmt: str = "text") -> str:
    """Deterministic rendering of a canonical series."""
    if fmt == "text":
        return series.to_text()
    if fmt == "json":
        import json

        return (
            json.dumps(
                {
                    "format": "series",
                    "version": 1,
                    "denom_exp": series.denom_exp,
                    "terms": [
                        [c, q, t, a] for (q, t, a), c in series.numerator.sorted_terms()
                    ],
                },
                separators=(",", ":"),
            )
            + "\n"
        )
    if fmt == "latex":
        return _latex(series) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _latex_term(m, c) -> str:
    q, t, a = m
    factors = []
    if abs(c) != 1 or (q, t, a) == (0, 0, 0):
        factors.append(str(abs(c)))
    for name, e in (("q", q), ("t", t), ("a", a)):
        if e == 1:
            factors.append(name)
        elif e != 0:
            factors.append(f"{name}^{{{e}}}")
    return " ".join(factors)


def _latex(series: GradedSeries) -> str:
    terms = series.numerator.sorted_terms()
    if not terms:
        return "0"
    bits = []
    for i, (m, c) in enumerate(terms):
        sign = "-" if c < 0 else ("+" if i else "")
        body = _latex_term(m, c)
        bits.append(f"{sign} {body}".strip() if sign else body)
    num = " ".join(bits)
    e = series.denom_exp
    if e == 0:
        return num
    return f"\\frac{{{num}}}{{(1-q)^{{{e}}}}}"


def _format_coeffs(table: CoeffTable) -> str:
    lines = [f"coeffs v1 order {table.q_order}"]
    for (q, t, a), c in table.sorted_items():
        lines.append(f"{c} {q} {t} {a}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _parse_degrees(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise InvalidDegrees(f"--d wants four comma-separated integers, got {text!r}")
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise InvalidDegrees(f"--d wants integers, got {text!r}") from exc
    return validate_degrees(values)


def _store(args) -> Store | None:
    path = args.cache or os.environ.get("HHH_CACHE")
    return Store(path) if path else None


def _engine(args) -> Engine:
    cache = _store(args)
    bases = TorusBases(cache=cache, threads=args.threads)
    return Engine(bases)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=1, help="worker count (speed only)")
    p.add_argument("--cache", default=None, help="cache directory (default $HHH_CACHE)")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hhh4",
        description="Exact homology series of 4-strand Coxeter braid closures "
        "and Hilbert tables of the matching intersection ideals.",
    )
    ap.add_argument("--version", action="version", version=f"hhh4 {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hhh", help="compute a homology series")
    p.add_argument("--d", required=True, help="degrees d1,d2,d3,d4 (sorted ascending)")
    p.add_argument("--a0", action="store_true", help="a = 0 specialization")
    p.add_argument("--series", type=int, default=None, metavar="N", help="print the order-N expansion instead of the closed form")
    p.add_argument("--format", choices=("text", "latex", "json"), default="text")
    _add_common(p)

    p = sub.add_parser("hilb", help="Hilbert table of the intersection ideal")
    p.add_argument("--d", required=True)
    p.add_argument("--max-total", type=int, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_common(p)

    p = sub.add_parser("verify", help="engine-vs-oracle comparison")
    p.add_argument("--d", required=True)
    p.add_argument("--max-total", type=int, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_common(p)

    p = sub.add_parser("basecase", help="manage FT4^n base cases")
    bsub = p.add_subparsers(dest="basecase_command", required=True)

    b = bsub.add_parser("derive", help="derive the a0 entry for FT4^n from the ideal oracle")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--start-order", type=int, default=None)
    _add_common(b)

    b = bsub.add_parser("import", help="validate and store a base-case file")
    b.add_argument("--file", required=True)
    _add_common(b)

    b = bsub.add_parser("list", help="list stored base-case entries")
    _add_common(b)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,2,3")
    _add_common(p)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except InvalidDegrees as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ParseError, ChecksumMismatch, PositivityViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MissingBaseCase as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_BASE


def _dispatch(args) -> int:
    if args.command == "hhh":
        return _cmd_hhh(args)
    if args.command == "hilb":
        return _cmd_hilb(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "basecase":
        return _cmd_basecase(args)
    if args.command == "selftest":
        return _cmd_selftest(args)
    raise AssertionError(args.command)


def _cmd_hhh(args) -> int:
    degrees = _parse_degrees(args.d)
    mode = EvalMode.A0 if args.a0 else EvalMode.FULL_A
    engine = _engine(args)
    series = engine.hhh_coxeter(degrees, mode)
    if args.series is not None:
        sys.stdout.write(_format_coeffs(series.expand(args.series)))
    else:
        sys.stdout.write(format_series(series, args.format))
    return EXIT_OK


def _cmd_hilb(args) -> int:
    degrees = _parse_degrees(args.d)
    table = hilb_table(degrees, args.max_total, threads=args.threads, cache=_store(args))
    sys.stdout.write(table.to_json() if args.format == "json" else table.to_text())
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import compare_with_ideal

    degrees = _parse_degrees(args.d)
    engine = _engine(args)
    report = compare_with_ideal(
        degrees, args.max_total, engine=engine, threads=args.threads, cache=_store(args)
    )
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_OK if report.passed else EXIT_MISMATCH


def _cmd_basecase(args) -> int:
    store = _store(args)
    if args.basecase_command == "derive":
        if args.n < 1:
            raise InvalidDegrees("--n must be at least 1")
        series, _shift, _order = derive_ft4_a0_auto(
            args.n, threads=args.threads, cache=store, start_order=args.start_order
        )
        table = BaseCaseTable()
        table.add(make_entry(args.n, EvalMode.A0, series, "derived from ideal oracle"))
        if store is not None:
            store.put(f"ft4 {args.n} a0", series.to_text())
        sys.stdout.write(table.to_text())
        return EXIT_OK
    if args.basecase_command == "import":
        with open(args.file) as fh:
            table = BaseCaseTable.from_text(fh.read())
        bases = TorusBases(cache=store)
        bases.import_table(table)
        for (n, mode) in sorted(table.entries, key=lambda k: (k[0], k[1].value)):
            sys.stdout.write(f"imported FT4^{n} {mode.value}\n")
        return EXIT_OK
    if args.basecase_command == "list":
        if store is None:
            sys.stdout.write("no cache configured\n")
            return EXIT_OK
        for key in store.keys():
            if key.startswith("ft4 "):
                sys.stdout.write(key + "\n")
        return EXIT_OK
    raise AssertionError(args.basecase_command)


def _cmd_selftest(args) -> int:
    from .acceptance import run_selftest

    wanted = None
    if args.criteria:
        wanted = sorted({int(x) for x in args.criteria.split(",")})
    ok = run_selftest(criteria=wanted, cache=_store(args), threads=args.threads, out=sys.stdout)
    return EXIT_OK if ok else EXIT_MISMATCH


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
