"""Command-line interface: predict, check, solve, sweep.

Exit status: 0 success, 1 bad input, 2 computation does not apply to this
regime or profile, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, records
from ._numeric import format_number, parse_number
from .conditions import (
    GammaConfig,
    TSearch,
    lifespan_bounds,
    necessary_critical,
    necessary_general,
    sufficient_critical,
    sufficient_split,
    sufficient_subcritical,
)
from .errors import DomainError, InapplicableError, NumericalError
from .predictor import Regime, predict
from .problem import ProblemSpec, critical_exponent
from .profiles import parse_profile
from .sweep import SOURCES, default_kappas, run_sweep
from .volterra import StepPolicy, estimate_blowup_time, solve_boundary_trace

EXIT_OK, EXIT_INPUT, EXIT_INAPPLICABLE, EXIT_NUMERICAL = 0, 1, 2, 3


class InputError(Exception):
    """Bad command-line input; the message names the offending field."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _field(name, conv):
    def parse(text):
        try:
            return conv(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"--{name}: {exc}") from None

    return parse


def _positive(name):
    def conv(text):
        v = parse_number(text)
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {text!r}")
        return v

    return conv


def parse_p(text: str, N: int):
    """Rational or float exponent; ``1+1/N`` names the critical exponent."""
    t = text.strip().replace(" ", "")
    if t.startswith("p="):
        t = t[2:]
    if t == "1+1/N":
        return critical_exponent(N)
    v = parse_number(t)
    if not v > 1:
        raise ValueError(f"p must exceed 1, got {text!r}")
    return v


def _add_problem(sp, kappa=True):
    sp.add_argument("--N", required=True, type=_field("N", _int_dim), help="space dimension")
    sp.add_argument("--p", required=True, help="exponent, e.g. 3/2, 2.5 or 1+1/N")
    sp.add_argument("--profile", required=True, type=_field("profile", parse_profile), help="e.g. singular-log:A=1/2,B=0")
    if kappa:
        sp.add_argument("--kappa", required=True, type=_field("kappa", _positive("kappa")))


def _int_dim(text):
    v = int(text)
    if v < 1:
        raise ValueError("N must be a positive integer")
    return v


def _add_gammas(sp):
    g = sp.add_argument_group("condition constants")
    for name in ("gamma1", "gamma1p", "gamma2", "gamma3", "gamma4"):
        g.add_argument(f"--{name}", type=_field(name, _positive(name)), default=1.0)
    g.add_argument("--delta", type=_field("delta", float), default=0.5)
    g.add_argument("--a", type=_field("a", float), default=None, help="integrability exponent, 1 < a < p")
    g.add_argument("--t-min", type=_field("t-min", float), default=1e-12)
    g.add_argument("--t-max", type=_field("t-max", float), default=1e12)


def _add_output(sp):
    sp.add_argument("--output", type=Path, help="write the JSON record here instead of stdout")
    sp.add_argument("--csv", type=Path, help="also write the CSV table here")
    sp.add_argument("--format", choices=("json", "csv"), default="json", help="what to print on stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lifespan-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("predict", help="asymptotic life-span law")
    _add_problem(sp, kappa=False)
    sp.add_argument("--regime", required=True, type=_field("regime", Regime.parse))
    sp.add_argument("--output", type=Path)

    sp = sub.add_parser("check", help="solvability conditions at T, or life-span bounds")
    _add_problem(sp)
    sp.add_argument("--T", type=_field("T", _positive("T")), help="evaluate the conditions at this T; omit to search for bounds")
    sp.add_argument("--sigma-per-decade", type=_field("sigma-per-decade", int), default=64)
    _add_gammas(sp)
    sp.add_argument("--output", type=Path)

    sp = sub.add_parser("solve", help="boundary trace and blow-up time (N = 1)")
    _add_problem(sp)
    sp.add_argument("--horizon", type=_field("horizon", _positive("horizon")), default=1e6)
    sp.add_argument("--rel-increment", type=_field("rel-increment", _positive("rel-increment")), default=0.05)
    _add_output(sp)

    sp = sub.add_parser("sweep", help="kappa sweep and slope verdict")
    _add_problem(sp, kappa=False)
    sp.add_argument("--regime", required=True, type=_field("regime", Regime.parse))
    sp.add_argument("--source", choices=SOURCES, default="volterra")
    sp.add_argument("--kappas", type=_field("kappas", lambda s: [float(parse_number(x)) for x in s.split(",")]), help="comma-separated geometric list")
    sp.add_argument("--points", type=_field("points", int), default=8, help="number of default kappa values")
    sp.add_argument("--jobs", type=_field("jobs", int), default=None, help="worker processes (default: all CPUs)")
    sp.add_argument("--horizon", type=_field("horizon", _positive("horizon")), default=1e6)
    _add_gammas(sp)
    _add_output(sp)
    return ap


def _problem(args, kappa=1):
    try:
        p = parse_p(args.p, args.N)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"--p: {exc}") from None
    try:
        return ProblemSpec(args.N, p, kappa, args.profile)
    except DomainError as exc:
        raise InputError(str(exc)) from None


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("verbose",):
            continue
        if hasattr(v, "spec"):
            v = v.spec()
        elif isinstance(v, Regime):
            v = v.value
        elif isinstance(v, Path):
            v = str(v)
        elif v is not None and not isinstance(v, (bool, int, float, str, list)):
            v = format_number(v)
        out[k] = v
    return out


def _gammas(args) -> GammaConfig:
    try:
        return GammaConfig(args.gamma1, args.gamma1p, args.gamma2, args.gamma3, args.gamma4, args.delta, args.a)
    except DomainError as exc:
        raise InputError(str(exc)) from None


def _search(args) -> TSearch:
    try:
        return TSearch(args.t_min, args.t_max)
    except DomainError as exc:
        raise InputError(str(exc)) from None


def _emit(text: str, path):
    if path:
        Path(path).write_text(text + ("" if text.endswith("\n") else "\n"))
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _cmd_predict(args) -> int:
    problem = _problem(args)
    law = predict(problem.N, problem.p, problem.profile, args.regime)
    if args.output:
        args.output.write_text(records.dumps("prediction", law, _config(args)) + "\n")
    print(law.spec())
    return EXIT_OK


def _cmd_check(args) -> int:
    problem = _problem(args, args.kappa)
    g = _gammas(args)
    spd = args.sigma_per_decade
    if args.T is not None:
        T = float(args.T)
        verdicts = {"necessary_general": necessary_general(problem, T, g, spd)}
        sign = problem.regime_sign()
        if sign == 0:
            verdicts["necessary_critical"] = necessary_critical(problem, T, g, spd)
            verdicts["sufficient_critical"] = sufficient_critical(problem, T, g, spd)
        elif sign < 0:
            verdicts["sufficient_subcritical"] = sufficient_subcritical(problem, T, g)
        else:
            try:
                verdicts["sufficient_split"] = sufficient_split(problem, T, g, spd)
            except InapplicableError as exc:
                logging.getLogger(__name__).warning("split condition skipped: %s", exc)
        _emit(records.dumps("verdicts", verdicts, _config(args)), args.output)
        return EXIT_OK
    bounds = lifespan_bounds(problem, g, _search(args), spd)
    _emit(records.dumps("bounds", bounds, _config(args)), args.output)
    return EXIT_OK


def _cmd_solve(args) -> int:
    problem = _problem(args, args.kappa)
    if problem.N != 1:
        raise InapplicableError("solve handles N = 1 only")
    policy = StepPolicy(rel_increment=float(args.rel_increment), horizon=float(args.horizon))
    est = estimate_blowup_time(problem, policy)
    trace = solve_boundary_trace(problem, float(args.horizon), policy)
    config = _config(args)
    record = records.dumps("blowup", est, config, extra={"trace_stop": trace.meta["stop"], "trace_points": len(trace.times)})
    if args.output:
        _emit(record, args.output)
    if args.csv:
        args.csv.write_text(records.csv_preamble(config) + trace.to_csv())
    if not args.output:
        _emit(trace.to_csv() if args.format == "csv" else record, None)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    problem = _problem(args)
    kappas = args.kappas or default_kappas(args.regime, args.points)
    policy = StepPolicy(horizon=float(args.horizon))
    try:
        result = run_sweep(problem, kappas, args.source, args.regime, _gammas(args), policy, _search(args), jobs=args.jobs or os.cpu_count())
    except DomainError as exc:
        raise InputError(str(exc)) from None
    config = _config(args)
    record = records.dumps("sweep", result, config)
    if args.output:
        _emit(record, args.output)
    if args.csv:
        args.csv.write_text(records.csv_preamble(config) + result.to_csv())
    if not args.output:
        _emit(result.to_csv() if args.format == "csv" else record, None)
    return EXIT_OK


_COMMANDS = {"predict": _cmd_predict, "check": _cmd_check, "solve": _cmd_solve, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"lifespan-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"lifespan-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InapplicableError as exc:
        print(f"lifespan-lab: not applicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except NumericalError as exc:
        print(f"lifespan-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"lifespan-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
