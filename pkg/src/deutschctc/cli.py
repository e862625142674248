"""Command-line interface.

Subcommands: ``solve``, ``spectrum``, ``scenario``, ``sweep`` and
``random-problem``. Exit codes: 0 success, 2 malformed input,
3 numerical failure, 4 infeasible selection parameter.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import reports
from .fixed_point import InfeasibleSelectionError, SelectionRule
from .deutsch import InteractionUnitary
from .linalg import Tolerances, eigenvalues
from .randomized import random_pure_state, random_unitary
from .reports import ProblemFileError
from .scenarios import (
    SCENARIO_IDS,
    run_dejonghe,
    run_epr_scenario,
    solve,
    superoperator_for,
    sweep_epsilon,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_INFEASIBLE = 4


class UsageError(ValueError):
    pass


def parse_tol(text: str | None) -> Tolerances:
    """``1e-8`` sets the nullspace tolerance; ``null=1e-8,psd=1e-9`` sets named fields."""
    tol = Tolerances()
    if not text:
        return tol
    fields = {}
    for part in text.split(","):
        part = part.strip()
        key, _, val = part.rpartition("=")
        key = key or "null"
        if key not in Tolerances.__dataclass_fields__:
            raise UsageError(f"unknown tolerance {key!r}")
        try:
            fields[key] = float(val)
        except ValueError as exc:
            raise UsageError(f"bad tolerance value {val!r}") from exc
        if not fields[key] > 0:
            raise UsageError(f"tolerance {key} must be positive")
    return tol.replace(**fields)


def parse_rule(text: str) -> SelectionRule:
    try:
        return SelectionRule.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_epsilons(text: str) -> list[float]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise UsageError("--epsilons needs at least one value")
    try:
        return [float(x) for x in items]
    except ValueError as exc:
        raise UsageError(f"bad epsilon list {text!r}") from exc


def _emit(d: dict, args) -> None:
    text = reports.dumps_canonical(d) if args.format == "json" else reports.render_text(d)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    tol = parse_tol(args.tol)
    rule = parse_rule(args.rule)
    data, u, rho = reports.load_problem(args.problem, tol)
    report = solve(u, rho, rule, tol, scenario_id="custom")
    _emit(reports.report_dict(report, "solve", data, args.seed), args)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    tol = parse_tol(args.tol)
    data, u, rho = reports.load_problem(args.problem, tol)
    spectrum = eigenvalues(superoperator_for(u, rho).m)
    d = {"tool": reports.tool_block(), "command": "spectrum", "input": data, "seed": args.seed}
    d.update(reports.spectrum_block(spectrum))
    _emit(d, args)
    return EXIT_OK


def cmd_scenario(args) -> int:
    tol = parse_tol(args.tol)
    rule = parse_rule(args.rule)
    if args.id not in SCENARIO_IDS:
        raise UsageError(f"unknown scenario {args.id!r}; choose from {', '.join(SCENARIO_IDS)}")
    if args.id == "epr":
        report = run_epr_scenario(rule, tol)
        inputs = {"scenario": "epr"}
    else:
        if args.epsilon is None:
            raise UsageError(f"scenario {args.id} requires --epsilon")
        if not 0.0 < args.epsilon <= 1.0:
            raise UsageError(f"--epsilon must lie in (0, 1], got {args.epsilon}")
        report = run_dejonghe(args.id[-1].upper(), args.epsilon, rule, tol)
        inputs = {"scenario": args.id, "epsilon": args.epsilon}
    _emit(reports.report_dict(report, "scenario", inputs, args.seed), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    tol = parse_tol(args.tol)
    rule = parse_rule(args.rule)
    eps = parse_epsilons(args.epsilons)
    try:
        result = sweep_epsilon(eps, rule, tol, workers=args.workers)
    except ValueError as exc:
        if isinstance(exc, InfeasibleSelectionError):
            raise
        raise UsageError(str(exc)) from exc
    _emit(reports.sweep_dict(result, rule, args.seed), args)
    return EXIT_OK


def cmd_random_problem(args) -> int:
    """Write a seeded random problem file (random unitary, random pure CR state)."""
    if args.cr_qubits < 1 or 2 ** (args.cr_qubits + 1) > 64:
        raise UsageError("--cr-qubits must be between 1 and 5")
    rng = np.random.default_rng(args.seed)
    dcr = 2 ** args.cr_qubits
    u = InteractionUnitary(random_unitary(2 * dcr, rng), dcr, 2)
    psi = random_pure_state(dcr, rng)
    text = reports.dumps_canonical(reports.problem_dict(u, psi=psi))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized commands")
    common.add_argument("--tol", default=None,
                        help="tolerance override: a number (nullspace) or key=value,... "
                             "with keys null, herm, psd, product, unitary, state")
    ruled = argparse.ArgumentParser(add_help=False)
    ruled.add_argument("--rule", default="max-entropy",
                       help="max-entropy, min-bloch-norm or param=<p1,...> (positions in [0, 1])")

    p = argparse.ArgumentParser(prog="deutschctc",
                                description="Solve the Deutsch CTC consistency equation as an eigenproblem.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common, ruled], help="solve a problem file")
    s.add_argument("problem")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("spectrum", parents=[common], help="print the spectrum of M for a problem file")
    s.add_argument("problem")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("scenario", parents=[common, ruled], help="run a named scenario")
    s.add_argument("id", help=", ".join(SCENARIO_IDS))
    s.add_argument("--epsilon", type=float, default=None)
    s.set_defaults(func=cmd_scenario)

    s = sub.add_parser("sweep", parents=[common, ruled], help="epsilon sweep of the DeJonghe variants")
    s.add_argument("--epsilons", required=True, help="comma-separated, strictly decreasing")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("random-problem", parents=[common], help="emit a seeded random problem file")
    s.add_argument("--cr-qubits", type=int, default=1)
    s.set_defaults(func=cmd_random_problem)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProblemFileError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleSelectionError as exc:
        print(f"infeasible selection: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
