"""Command-line front end.

Every command reads one problem-definition document (--config), computes in
nats, and emits CSV (or JSON with --json) with 12 significant digits.  The
same invocation always produces byte-identical output.  Exit status: 0 on
success, 1 for validation problems, 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import capacity as cap
from . import chain as chain_mod
from . import multiconstraint as mc
from . import oracles
from . import ratedistortion as rd
from .config import ProblemConfig, load_config
from .errors import ConfigError, NumericalError, TiltrateError, ValidationError
from .solvers import BracketError

__all__ = ["main"]

DEFAULT_TOL = 1e-10


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _json_value(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    x = float(value)
    if math.isfinite(x):
        return float(f"{x:.12g}")
    return _fmt(x)


def _emit(args, payload) -> None:
    kind = payload[0]
    lines: list[str] = []
    if kind == "pairs":
        pairs = payload[1]
        if args.json:
            text = json.dumps({k: _json_value(v) for k, v in pairs}, indent=2)
        else:
            lines.append("quantity,value")
            lines.extend(f"{k},{_fmt(v)}" for k, v in pairs)
            text = "\n".join(lines)
    else:
        header, rows = payload[1], payload[2]
        if args.json:
            text = json.dumps(
                {"points": [{k: _json_value(v) for k, v in zip(header, row)} for row in rows]},
                indent=2,
            )
        else:
            lines.append(",".join(header))
            lines.extend(",".join(_fmt(v) for v in row) for row in rows)
            text = "\n".join(lines)
    text += "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(spec: str) -> np.ndarray:
    """Parse 'lo:hi:count' into an inclusive linspace, else a comma/space list."""
    spec = spec.strip()
    if spec.count(":") == 2:
        lo_s, hi_s, n_s = spec.split(":")
        try:
            lo, hi, count = float(lo_s), float(hi_s), int(n_s)
        except ValueError:
            raise ValidationError(f"bad grid spec {spec!r}: expected lo:hi:count") from None
        if count < 1:
            raise ValidationError("grid count must be at least 1")
        return np.linspace(lo, hi, count)
    try:
        values = np.array([float(t) for t in spec.replace(",", " ").split()])
    except ValueError:
        raise ValidationError(f"bad grid spec {spec!r}") from None
    if values.size == 0:
        raise ValidationError("grid spec is empty")
    return values


def _rd_problem_at(cfg: ProblemConfig, s: float, tol: float) -> rd.RdProblem:
    """The configured problem; without coding_probs, optimize them at slope s."""
    if cfg.coding_probs is not None:
        return cfg.rd_problem()
    source = cfg._need("source_probs")
    table = cfg._need("distortion")
    result = oracles.blahut_arimoto(source, table, s, tol=min(tol, 1e-10))
    return rd.RdProblem(source, result.coding_probs, table)


def _point_pairs(problem: rd.RdProblem, point: rd.RdPoint) -> list[tuple[str, object]]:
    pairs: list[tuple[str, object]] = [
        ("s", point.s),
        ("distortion", point.distortion),
        ("rate_nats", point.rate),
        ("mmse", point.mmse),
    ]
    for i, (m, v) in enumerate(zip(point.per_symbol_mean, point.per_symbol_var)):
        pairs.append((f"mean_x{i}", m))
        pairs.append((f"var_x{i}", v))
    if point.boundary:
        pairs.append(("boundary", point.boundary))
    return pairs


def _cmd_rd_curve(args) -> tuple:
    cfg = load_config(args.config)
    grid = _parse_grid(args.grid)
    if not np.all(np.isfinite(grid)) or np.any(grid > 0.0):
        raise ValidationError("rd curve grid values must be finite and <= 0")
    header_known = False
    header: list[str] = []
    rows = []
    for s in sorted(grid, reverse=True):
        problem = _rd_problem_at(cfg, float(s), args.tol)
        point = rd.distortion_at_force(problem, float(s))
        if not header_known:
            header = ["s", "distortion", "rate_nats", "mmse"] + [
                f"mean_x{i}" for i in range(problem.num_source_letters)
            ]
            header_known = True
        rows.append([point.s, point.distortion, point.rate, point.mmse, *point.per_symbol_mean])
    return ("table", header, rows)


def _cmd_rd_point(args) -> tuple:
    cfg = load_config(args.config)
    if args.force is None and args.delta is None:
        raise ValidationError("rd point needs --delta or --force")
    if args.force is not None and args.delta is not None:
        raise ValidationError("give only one of --delta and --force")
    if cfg.coding_probs is None and args.force is None:
        raise ValidationError(
            "config has no coding_probs: give --force so they can be optimized at a target slope"
        )
    if args.force is not None:
        if args.force > 0.0:
            raise ValidationError("--force must be <= 0")
        problem = _rd_problem_at(cfg, args.force, args.tol)
        point = rd.distortion_at_force(problem, args.force)
    else:
        problem = cfg.rd_problem()
        point = rd.force_at_distortion(problem, args.delta, tol=args.tol)
    pairs = _point_pairs(problem, point)
    if args.allocation:
        target = point.distortion if args.delta is None else args.delta
        allocation, rate = rd.equal_force_allocation(problem, target, tol=args.tol)
        for i, v in enumerate(allocation.per_symbol_distortion):
            pairs.append((f"allocation_x{i}", v))
        pairs.append(("allocation_rate_nats", rate))
    if args.bounds:
        if not math.isfinite(point.s):
            raise ValidationError("sandwich bounds need a finite force")
        partition = np.linspace(0.0, point.s, args.bounds + 1)
        low, high = rd.sandwich_bounds(problem, partition)
        pairs.append(("sandwich_sum_left", low))
        pairs.append(("sandwich_sum_right", high))
    if args.integral_route:
        if not math.isfinite(point.s):
            raise ValidationError("the integral route needs a finite force")
        integral = rd.rate_mmse_integral(problem, point.s, tol=min(args.tol, 1e-9))
        pairs.append(("rate_mmse_integral", integral))
        pairs.append(("rate_route_difference", abs(integral - point.rate)))
    if args.observable:
        table = cfg._need("observable")
        if not math.isfinite(point.s):
            raise ValidationError("the observable sweep needs a finite force")
        swept = rd.observable_sweep(problem, table, point.s, tol=min(args.tol, 1e-9))
        direct = rd.observable_expectation(problem, table, point.s)
        pairs.append(("observable_integral", swept))
        pairs.append(("observable_direct", direct))
        pairs.append(("observable_route_difference", abs(swept - direct)))
    return ("pairs", pairs)


def _cmd_capacity(args) -> tuple:
    cfg = load_config(args.config)
    channel = cfg.channel()
    point = cap.capacity_point(channel, tol=args.tol)
    info = cap.mutual_information(channel)
    return (
        "pairs",
        [
            ("rate_nats", point.rate),
            ("s_star", point.s_star),
            ("delta", point.delta),
            ("mutual_information_nats", info),
            ("cross_check_abs_diff", abs(point.rate - info)),
        ],
    )


def _cmd_rd2(args) -> tuple:
    cfg = load_config(args.config)
    problem = cfg.rd_problem2()
    rate, s1, s2 = mc.rate_two_distortions(problem, args.delta1, args.delta2, tol=args.tol)
    return (
        "pairs",
        [
            ("rate_nats", rate),
            ("s1", s1),
            ("s2", s2),
            ("constraint1_active", s1 < -1e-12),
            ("constraint2_active", s2 < -1e-12),
        ],
    )


def _cmd_chain_work(args) -> tuple:
    cfg = load_config(args.config)
    system = cfg.chain_system()
    problem = cfg.rd_problem()
    lam = args.lambda_final
    s = system.beta * lam
    if s > 0.0:
        raise ValidationError("--lambda-final must be <= 0 for the compression branch")
    work = chain_mod.quasistatic_work(system, lam, tol=min(args.tol, 1e-9))
    point = rd.distortion_at_force(problem, s)
    return (
        "pairs",
        [
            ("lambda_final", lam),
            ("s", s),
            ("quasistatic_work", work),
            ("rate_nats", point.rate),
            ("rate_times_kT", point.rate / system.beta),
            ("abs_difference", abs(work - point.rate / system.beta)),
            ("length_final", chain_mod.expected_length(system, lam)),
        ],
    )


def _cmd_chain_equilibrium(args) -> tuple:
    cfg = load_config(args.config)
    system = cfg.chain_system()
    lam = chain_mod.equilibrium_force(system, args.length, tol=args.tol)
    pairs: list[tuple[str, object]] = [
        ("lambda", lam),
        ("s", system.beta * lam),
    ]
    for i, y in enumerate(chain_mod.array_lengths(system, lam)):
        pairs.append((f"length_x{i}", y))
    return ("pairs", pairs)


def _cmd_chain_protocol(args) -> tuple:
    cfg = load_config(args.config)
    system = cfg.chain_system()
    schedule = _parse_grid(args.schedule)
    left, right = chain_mod.protocol_work_bounds(system, schedule)
    quasistatic = chain_mod.quasistatic_work(system, float(schedule[-1]), tol=min(args.tol, 1e-9))
    return (
        "pairs",
        [
            ("steps", int(len(schedule) - 1)),
            ("protocol_work", right),
            ("protocol_work_left_sum", left),
            ("quasistatic_work", quasistatic),
            ("excess_over_quasistatic", right - quasistatic),
        ],
    )


def _cmd_oracle_exact(args) -> tuple:
    cfg = load_config(args.config)
    problem = cfg.rd_problem()
    prob, exponent = oracles.exact_ld_probability(problem, args.n, args.delta)
    rate = rd.rate_legendre(problem, args.delta, tol=args.tol)
    return (
        "pairs",
        [
            ("probability", prob),
            ("exponent", exponent),
            ("rate_legendre", rate),
            ("exponent_minus_rate", exponent - rate),
        ],
    )


def _cmd_oracle_ba(args) -> tuple:
    cfg = load_config(args.config)
    source = cfg._need("source_probs")
    table = cfg._need("distortion")
    result = oracles.blahut_arimoto(source, table, args.force, tol=args.tol, max_iter=args.max_iter)
    problem = rd.RdProblem(source, result.coding_probs, table)
    recheck = rd.distortion_at_force(problem, args.force)
    pairs: list[tuple[str, object]] = [
        (f"q_{i}", v) for i, v in enumerate(result.coding_probs)
    ]
    pairs += [
        ("rate_nats", result.rate),
        ("distortion", result.distortion),
        ("converged", result.converged),
        ("iterations", result.iterations),
        ("recheck_rate_abs_diff", abs(recheck.rate - result.rate)),
        ("recheck_distortion_abs_diff", abs(recheck.distortion - result.distortion)),
    ]
    return ("pairs", pairs)


def _cmd_oracle_alloc(args) -> tuple:
    cfg = load_config(args.config)
    problem = cfg.rd_problem()
    brute = oracles.brute_allocation_min(problem, args.delta, args.grid_points)
    rate = rd.rate_legendre(problem, args.delta, tol=args.tol)
    return (
        "pairs",
        [
            ("brute_min", brute),
            ("rate_legendre", rate),
            ("difference", brute - rate),
        ],
    )


def _cmd_oracle_grid(args) -> tuple:
    cfg = load_config(args.config)
    problem = cfg.rd_problem()
    grid_max = oracles.legendre_grid_max(
        problem, args.delta, s_min=args.s_min, points=args.points
    )
    rate = rd.rate_legendre(problem, args.delta, tol=args.tol)
    return (
        "pairs",
        [
            ("grid_max", grid_max),
            ("rate_legendre", rate),
            ("abs_difference", abs(grid_max - rate)),
        ],
    )


class _Parser(argparse.ArgumentParser):
    # argparse defaults to exit status 2 for usage problems; flag misuse is a
    # validation error here, and 2 is reserved for numerical failures.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sub) -> None:
    sub.add_argument("--config", required=True, help="problem definition (JSON or key = value)")
    sub.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver tolerance")
    sub.add_argument("--output", default=None, help="write to this file instead of stdout")
    sub.add_argument("--json", action="store_true", help="emit JSON instead of CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tiltrate", description=__doc__)
    top = parser.add_subparsers(dest="command", required=True)

    rd_parser = top.add_parser("rd", help="rate-distortion curve and points")
    rd_sub = rd_parser.add_subparsers(dest="subcommand", required=True)

    curve = rd_sub.add_parser("curve", help="curve on a force grid")
    _add_common(curve)
    curve.add_argument("--grid", required=True, help="force grid: lo:hi:count or a comma list")
    curve.set_defaults(handler=_cmd_rd_curve)

    point = rd_sub.add_parser("point", help="one point, by budget or by force")
    _add_common(point)
    point.add_argument("--delta", type=float, default=None, help="distortion budget")
    point.add_argument("--force", type=float, default=None, help="tilt force s <= 0")
    point.add_argument("--bounds", type=int, default=0, metavar="STEPS", help="print sandwich sums over a uniform partition")
    point.add_argument("--allocation", action="store_true", help="print the equal-force budget split")
    point.add_argument("--integral-route", action="store_true", help="print the mmse-integral rate next to the Legendre rate")
    point.add_argument("--observable", action="store_true", help="sweep the configured observable to this point")
    point.set_defaults(handler=_cmd_rd_point)

    capacity_parser = top.add_parser("capacity", help="channel rate via the distortion route")
    _add_common(capacity_parser)
    capacity_parser.set_defaults(handler=_cmd_capacity, tol=1e-12)

    rd2 = top.add_parser("rd2", help="two simultaneous distortion budgets")
    _add_common(rd2)
    rd2.add_argument("--delta1", type=float, required=True)
    rd2.add_argument("--delta2", type=float, required=True)
    rd2.set_defaults(handler=_cmd_rd2)

    chain_parser = top.add_parser("chain", help="mechanical chain emulator")
    chain_sub = chain_parser.add_subparsers(dest="subcommand", required=True)

    work = chain_sub.add_parser("work", help="quasistatic work against the rate")
    _add_common(work)
    work.add_argument("--lambda-final", type=float, required=True, dest="lambda_final")
    work.set_defaults(handler=_cmd_chain_work)

    equilibrium = chain_sub.add_parser("equilibrium", help="force that holds a mean length")
    _add_common(equilibrium)
    equilibrium.add_argument("--length", type=float, required=True)
    equilibrium.set_defaults(handler=_cmd_chain_equilibrium)

    protocol = chain_sub.add_parser("protocol", help="stepwise force schedule work")
    _add_common(protocol)
    protocol.add_argument("--schedule", required=True, help="force schedule: lo:hi:count or a comma list")
    protocol.set_defaults(handler=_cmd_chain_protocol)

    oracle_parser = top.add_parser("oracle", help="independent cross-checks")
    oracle_sub = oracle_parser.add_subparsers(dest="subcommand", required=True)

    exact = oracle_sub.add_parser("exact", help="exact finite-block event probability")
    _add_common(exact)
    exact.add_argument("--n", type=int, required=True)
    exact.add_argument("--delta", type=float, required=True)
    exact.set_defaults(handler=_cmd_oracle_exact)

    ba = oracle_sub.add_parser("ba", help="optimal coding law at a slope")
    _add_common(ba)
    ba.add_argument("--force", type=float, required=True)
    ba.add_argument("--max-iter", type=int, default=500)
    ba.set_defaults(handler=_cmd_oracle_ba)

    alloc = oracle_sub.add_parser("alloc", help="brute-force budget split search")
    _add_common(alloc)
    alloc.add_argument("--delta", type=float, required=True)
    alloc.add_argument("--grid-points", type=int, default=400)
    alloc.set_defaults(handler=_cmd_oracle_alloc)

    grid = oracle_sub.add_parser("grid", help="dense-grid Legendre maximization")
    _add_common(grid)
    grid.add_argument("--delta", type=float, required=True)
    grid.add_argument("--s-min", type=float, default=-50.0)
    grid.add_argument("--points", type=int, default=1001)
    grid.set_defaults(handler=_cmd_oracle_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.handler(args)
        _emit(args, payload)
    except (ConfigError, ValidationError) as exc:
        print(f"tiltrate: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, BracketError) as exc:
        print(f"tiltrate: numerical failure: {exc}", file=sys.stderr)
        return 2
    except TiltrateError as exc:
        print(f"tiltrate: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
