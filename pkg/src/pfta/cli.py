"""Command-line front end: validate, compile, analyze, cross-check, export.

Exit codes: 0 success, 1 model parse/validation failure, 2 analysis
failure, 3 I/O failure. Diagnostics go to standard error; results go to
standard output or to the file named with -o.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from .compile import compile_direct, compile_disjoint
from .dsl import parse_model
from .engine import EXHAUSTIVE, StopCriteria
from .errors import AnalysisError, DslError, EngineError, ModelInvalidError, OracleError, TheoryError
from .measures import (
    attach_posteriors,
    basic_event_posterior,
    basic_event_posteriors,
    curve_times,
    minimal_cut_sets,
    parse_instance,
    system_unreliability,
    unreliability_curve,
)
from .model import PftModel, format_instance, validate
from .oracle import exact_probability, prime_implicants, unfold
from .pha import serialize

ORACLE_TOL = 1e-9


def _fmt(value: float, digits: int) -> str:
    return f"{value:.{digits}g}"


def _nonnegative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"time must be nonnegative, got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfta",
        description="Parametric fault tree analysis via probabilistic Horn abduction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt_default: str = "table") -> None:
        p.add_argument("model", help="model file in the fault tree language")
        p.add_argument("-o", "--output", help="write results to this file instead of stdout")
        p.add_argument(
            "--format", choices=("table", "csv"), default=fmt_default,
            help=f"output format (default: {fmt_default})",
        )
        p.add_argument(
            "--digits", type=int, default=6,
            help="significant digits for displayed probabilities (default: 6)",
        )

    def stopping(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--max-explanations", type=int, default=None,
            help="stop after this many explanations (default: run to exhaustion)",
        )
        p.add_argument(
            "--epsilon", type=float, default=None,
            help="stop once the probability bounds are this tight",
        )

    p = sub.add_parser("validate", help="parse a model and report violations")
    p.add_argument("model")

    p = sub.add_parser("compile", help="translate a model to a hypothesis theory")
    common(p)
    p.add_argument(
        "--stage", type=int, choices=(1, 2), required=True,
        help="1: one clause per disjunct; 2: status-complete disjoint bodies",
    )
    p.add_argument("--time", type=_nonnegative, required=True, help="mission time in hours")
    p.add_argument(
        "--precision", type=int, default=None,
        help="decimal digits for declaration probabilities (default: shortest exact form)",
    )

    p = sub.add_parser("mcs", help="minimal cut sets ranked by prior probability")
    common(p)
    stopping(p)
    p.add_argument("--time", type=_nonnegative, required=True)
    p.add_argument("--posterior", action="store_true", help="also compute P(cut set | top event)")

    p = sub.add_parser("unrel", help="system unreliability P(top event) at one time")
    common(p)
    stopping(p)
    p.add_argument("--time", type=_nonnegative, required=True)

    p = sub.add_parser("curve", help="unreliability over a range of mission times")
    common(p, fmt_default="csv")
    stopping(p)
    p.add_argument("--from", dest="t_from", type=_nonnegative, required=True)
    p.add_argument("--to", dest="t_to", type=_nonnegative, required=True)
    p.add_argument("--step", type=float, required=True)

    p = sub.add_parser("posterior", help="basic event posteriors given the top event")
    common(p)
    p.add_argument("--time", type=_nonnegative, required=True)
    p.add_argument(
        "--basic", default=None, metavar="EVENT",
        help="one ground instance such as 'D(1,2)' (default: per-class table)",
    )

    p = sub.add_parser("oracle", help="cross-check the engine against exhaustive enumeration")
    common(p)
    p.add_argument("--time", type=_nonnegative, required=True)

    return parser


def _load_model(path: str) -> PftModel:
    with open(path, encoding="utf-8") as handle:
        return parse_model(handle.read())


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in [headers] + rows]
    return "\n".join(lines) + "\n"


def _csv(headers: list[str], rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()


def _render(args, headers: list[str], rows: list[list[str]]) -> str:
    return _csv(headers, rows) if args.format == "csv" else _table(headers, rows)


def _stop(args) -> StopCriteria:
    if args.max_explanations is None and args.epsilon is None:
        return EXHAUSTIVE
    return StopCriteria(max_explanations=args.max_explanations, epsilon=args.epsilon)


def _cmd_validate(args) -> int:
    model = _load_model(args.model)
    violations = validate(model)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return 1
    print("OK")
    return 0


def _cmd_compile(args) -> int:
    model = _load_model(args.model)
    if args.stage == 1:
        theory = compile_direct(model, args.time)
    else:
        theory = compile_disjoint(model, args.time)
    _emit(serialize(theory, args.precision), args.output)
    return 0


def _cmd_mcs(args) -> int:
    model = _load_model(args.model)
    cut_sets = minimal_cut_sets(model, args.time, _stop(args))
    if args.posterior:
        cut_sets = attach_posteriors(model, cut_sets, args.time)
    rows = []
    for rank, cs in enumerate(cut_sets, start=1):
        posterior = "" if cs.posterior is None else _fmt(cs.posterior, args.digits)
        rows.append([str(rank), " ".join(cs.rendered()), _fmt(cs.prior, args.digits), posterior])
    _emit(_render(args, ["rank", "events", "prior", "posterior"], rows), args.output)
    return 0


def _cmd_unrel(args) -> int:
    model = _load_model(args.model)
    bounds = system_unreliability(model, args.time, _stop(args))
    row = [[_fmt(args.time, 17), _fmt(bounds.lower, args.digits), _fmt(bounds.upper, args.digits)]]
    _emit(_render(args, ["time_hours", "lower", "upper"], row), args.output)
    return 0


def _cmd_curve(args) -> int:
    model = _load_model(args.model)
    times = curve_times(args.t_from, args.t_to, args.step)
    points = unreliability_curve(model, times, _stop(args))
    rows = [[_fmt(pt.time, 17), _fmt(pt.bounds.lower, args.digits), _fmt(pt.bounds.upper, args.digits)]
            for pt in points]
    _emit(_render(args, ["time_hours", "lower", "upper"], rows), args.output)
    return 0


def _cmd_posterior(args) -> int:
    model = _load_model(args.model)
    if args.basic is not None:
        key = parse_instance(model, args.basic)
        rows = [[format_instance(key), _fmt(basic_event_posterior(model, key, args.time), args.digits)]]
    else:
        rows = [[label, _fmt(value, args.digits)]
                for label, value in basic_event_posteriors(model, args.time)]
    _emit(_render(args, ["event", "posterior"], rows), args.output)
    return 0


def _cmd_oracle(args) -> int:
    model = _load_model(args.model)
    tree = unfold(model, args.time)
    lines = [f"ground basic events: {len(tree.basics)}"]
    deviations = []

    te_exact = exact_probability(tree, {tree.top: True})
    bounds = system_unreliability(model, args.time)
    deviations.append(abs(bounds.lower - te_exact))
    lines.append(f"P(top) search:      {_fmt(bounds.lower, args.digits)}")
    lines.append(f"P(top) enumeration: {_fmt(te_exact, args.digits)}")

    cut_sets = minimal_cut_sets(model, args.time)
    implicants = prime_implicants(tree)
    search_sets = {cs.events for cs in cut_sets}
    oracle_sets = {frozenset(s) for s in implicants}
    agree = search_sets == oracle_sets
    lines.append(f"cut sets, search:      {len(search_sets)}")
    lines.append(f"cut sets, enumeration: {len(oracle_sets)}")
    lines.append(f"cut set agreement: {'yes' if agree else 'NO'}")

    if te_exact > 0:
        for key, _ in tree.basics:
            exact = exact_probability(tree, {key: True, tree.top: True}) / te_exact
            deviations.append(abs(basic_event_posterior(model, key, args.time) - exact))
    worst = max(deviations)
    lines.append(f"max probability deviation: {_fmt(worst, 3)}")
    _emit("\n".join(lines) + "\n", args.output)
    if not agree or worst > ORACLE_TOL:
        print("error: search and enumeration disagree", file=sys.stderr)
        return 2
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "compile": _cmd_compile,
    "mcs": _cmd_mcs,
    "unrel": _cmd_unrel,
    "curve": _cmd_curve,
    "posterior": _cmd_posterior,
    "oracle": _cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DslError, ModelInvalidError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AnalysisError, EngineError, OracleError, TheoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
