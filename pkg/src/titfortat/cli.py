"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 verification failed.
Player indices on the command line and in all output are 1-based.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from contextlib import contextmanager

import numpy as np

from . import analysis, oracle
from .dynamics import EconomyError, run
from .scenario import (
    ScenarioError,
    dump_scenario,
    generate_random,
    load_scenario_file,
    save_trajectory_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_STEPS = 100
DEFAULT_TOLERANCE = 1e-8
ORACLE_MAX_N, ORACLE_MAX_STEPS = 5, 30


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@contextmanager
def atomic_output(path):
    """Open ``path`` for writing via a temp file renamed on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with atomic_output(path) as fh:
            yield fh


def _pair(text: str, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"{name} must look like LO:HI, got {text!r}") from None
    return lo, hi


def parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if len(parts) != 3:
            raise ValueError
    except (ValueError, IndexError):
        raise UsageError(f"--grid must look like LO:HI:COUNT, got {text!r}") from None
    if count < 1:
        raise UsageError("--grid COUNT must be at least 1")
    if count == 1:
        return [lo]
    return np.linspace(lo, hi, count).tolist()


def _steps(args, scenario) -> int:
    if args.steps is not None:
        return args.steps
    if scenario.steps is not None:
        return scenario.steps
    return DEFAULT_STEPS


def _tie(args, scenario) -> float:
    if args.tie_tol is not None:
        return args.tie_tol
    if scenario.tie_tolerance is not None:
        return scenario.tie_tolerance
    return analysis.TIE_TOLERANCE


def cmd_simulate(args) -> int:
    scenario = load_scenario_file(args.scenario)
    traj = run(scenario.economy, _steps(args, scenario))
    with _output(args.out) as fh:
        save_trajectory_csv(traj, fh)
    return EXIT_OK


def cmd_classify(args) -> int:
    scenario = load_scenario_file(args.scenario)
    report = analysis.classify(scenario.economy, _tie(args, scenario))
    for entry in report:
        print(f"{entry.player + 1} {entry.value!r} {entry.product!r} {entry.phase}")
    return EXIT_OK


def verification_residuals(traj, tie_tolerance: float, with_oracle: bool) -> dict[str, float]:
    """Residual of every checker on ``traj``, keyed by check name."""
    results = {
        "potential-law": analysis.check_potential_law(traj),
        "two-step-identity": analysis.check_two_step_identity(traj),
        "conserved-product": analysis.check_conserved_product(traj),
        "optimal-ratio": analysis.check_optimal_ratio_invariance(traj, tie_tolerance),
    }
    if len(traj) >= 2:
        constants = analysis.bound_constants(traj)
        results["amount-bounds"] = analysis.check_amount_bounds(traj, constants)
        results["corollary-envelope"] = analysis.check_corollary_envelope(
            traj, constants, tie_tolerance
        )
    if with_oracle:
        exact = oracle.run_exact(oracle.from_economy(traj.economy), traj.T)
        report = oracle.compare(exact, traj)
        results["oracle-log-amounts"] = report.max_log_amount_error
        results["oracle-fractions"] = report.max_fraction_error
    return results


def cmd_verify(args) -> int:
    scenario = load_scenario_file(args.scenario)
    steps = _steps(args, scenario)
    economy = scenario.economy
    if args.oracle == "auto":
        with_oracle = economy.n <= ORACLE_MAX_N and steps <= ORACLE_MAX_STEPS
    else:
        with_oracle = args.oracle == "on"
    traj = run(economy, steps)
    results = verification_residuals(traj, _tie(args, scenario), with_oracle)
    failed = []
    for name, residual in results.items():
        ok = residual <= args.tol
        print(f"{name:20s} {residual:.3e} {'ok' if ok else 'FAIL'}")
        if not ok:
            failed.append((name, residual))
    for name, residual in failed:
        print(f"check {name} failed: residual {residual:.3e} > {args.tol:g}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_sweep(args) -> int:
    scenario = load_scenario_file(args.scenario)
    grid = parse_grid(args.grid)
    if any(not (v > 0 and math.isfinite(v)) for v in grid):
        raise UsageError("grid values must be positive")
    player = args.player - 1
    if not 0 <= player < scenario.economy.n:
        raise UsageError(f"--player must be in 1..{scenario.economy.n}")
    steps = _steps(args, scenario)
    if steps < 2:
        raise UsageError("sweep needs --steps >= 2")
    rows = analysis.sweep(scenario.economy, player, grid, steps, _tie(args, scenario))
    with _output(args.out) as fh:
        fh.write("value,phase,empirical_exponent,theoretical_exponent\n")
        for row in rows:
            fh.write(
                f"{row.value:.17g},{row.phase},"
                f"{row.empirical_exponent:.17g},{row.theoretical_exponent:.17g}\n"
            )
    return EXIT_OK


def cmd_gen(args) -> int:
    lo, hi = _pair(args.value_range, "--value-range")
    economy = generate_random(args.n, args.seed, lo, hi)
    with _output(args.out) as fh:
        fh.write(dump_scenario(economy, seed=args.seed))
    return EXIT_OK


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="titfortat", description="Tit-for-tat production market simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_args(p, steps=True):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        if steps:
            p.add_argument("--steps", type=_nonneg_int, help="number of rounds")
        p.add_argument("--tie-tol", type=float, help="relative tie tolerance")

    p = sub.add_parser("simulate", help="run a scenario and write trajectory CSV")
    scenario_args(p)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="print each player's phase")
    scenario_args(p, steps=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run every identity and bound check")
    scenario_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--oracle", choices=("auto", "on", "off"), default="auto")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="vary one player's value over a grid")
    scenario_args(p)
    p.add_argument("--player", type=int, required=True, help="1-based player index")
    p.add_argument("--grid", required=True, help="LO:HI:COUNT")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write a seeded random scenario")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--value-range", default="0.5:1.5", help="LO:HI")
    p.add_argument("--out", help="scenario output path (default stdout)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ScenarioError, EconomyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
