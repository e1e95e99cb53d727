"""motsolve - entropic optimal transport under martingale-type constraints."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from loguru import logger

from src.core.config import AppConfig, load_config
from src.core.exceptions import MotSolveError
from src.core.problem import MotProblem, SmotProblem
from src.core.solver_manager import SolverManager
from src.experiments.reporting import DecaySummary, write_summary, write_table
from src.experiments.runner import ExperimentRunner, RunOptions
from src.solvers.solver_base import SolveStatus
from src.utils.io_utils import load_matrix, load_vector
from src.verification.lp_oracle import decay_curve, decay_instance, fit_decay

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors by raising instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def configure_logging(config: AppConfig) -> None:
    logger.remove()
    logger.add(sys.stderr, level=config.log_level)
    if config.log_file:
        Path(config.log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(config.log_file, rotation="10 MB", level=config.log_level)


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    manager = SolverManager().load_defaults()
    parser.add_argument("--solver", choices=sorted(manager.solver_classes), help=manager.get_help_text())
    parser.add_argument("--n1", type=int)
    parser.add_argument("--n2", type=int)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-outer", type=int, dest="max_outer")
    parser.add_argument("--max-iter", type=int, dest="max_iter")
    parser.add_argument("--warm-start", choices=["on", "off"], dest="warm_start")
    parser.add_argument("--reference", action="store_true", help="compute a full-Newton reference plan for l1_to_ref")
    parser.add_argument("--timings", action="store_true", help="write wall-clock times instead of zeros")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="motsolve", description="Entropic optimal transport under martingale-type constraints")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    solve = commands.add_parser("solve", help="solve a problem read from files")
    solve.add_argument("kind", choices=["mot", "smot"])
    solve.add_argument("--cost", required=True)
    solve.add_argument("--row", required=True)
    solve.add_argument("--col", required=True)
    solve.add_argument("--v", required=True)
    solve.add_argument("--w", required=True)
    solve.add_argument("--epsilon", type=float, help="L1 violation budget, required and positive for mot")
    solve.add_argument("--eta", type=float, required=True)
    solve.add_argument("--trace")
    solve.add_argument("--summary")
    solve.add_argument("--seed", type=int)
    solve.add_argument("--maximize", action="store_true", help="maximize C.P instead of minimizing it")
    _add_solver_flags(solve)

    experiment = commands.add_parser("experiment", help="rerun one of the built-in experiments")
    experiment.add_argument("name", choices=["option-pricing", "balance", "ranking"])
    experiment.add_argument("--n", type=int, default=200)
    experiment.add_argument("--eta", type=float, default=1200.0)
    experiment.add_argument("--seed", type=int, default=0)
    experiment.add_argument("--epsilon", type=float)
    experiment.add_argument("--out", required=True)
    experiment.add_argument("--maximize", action="store_true", help="option pricing: upper price bound")
    _add_solver_flags(experiment)

    verify = commands.add_parser("verify", help="empirical checks of the convergence theory")
    verify.add_argument("check", choices=["theorem1"])
    verify.add_argument("--n", type=int, default=5)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--epsilon", type=float, default=0.05)
    verify.add_argument("--etas", type=float, nargs="+", default=[16.0 * 2 ** k for k in range(9)])
    verify.add_argument("--out", required=True)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for key in ("solver", "n1", "n2", "rho", "tol", "max_outer", "max_iter"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.warm_start is not None:
        overrides["warm_start"] = args.warm_start == "on"
    overrides["reference"] = args.reference
    overrides["timings"] = args.timings
    return overrides


def _exit_code(status: SolveStatus) -> int:
    return EXIT_CONVERGED if status == SolveStatus.CONVERGED else EXIT_NOT_CONVERGED


def run_solve(args: argparse.Namespace) -> int:
    if args.kind == "mot" and (args.epsilon is None or args.epsilon <= 0.0):
        raise UsageError(f"solve mot needs --epsilon > 0, got {args.epsilon}")
    C = load_matrix(args.cost)
    if args.maximize:
        C = -C
    fields = dict(C=C, r=load_vector(args.row), c=load_vector(args.col), V=load_matrix(args.v),
                  W=load_matrix(args.w), eta=args.eta)
    if fields["V"].shape[0] == 1 and C.shape[0] != 1:
        fields["V"] = fields["V"].T
    if fields["W"].shape[0] == 1 and C.shape[0] != 1:
        fields["W"] = fields["W"].T
    problem = MotProblem(epsilon=args.epsilon, **fields) if args.kind == "mot" else SmotProblem(**fields)

    options = RunOptions(**{"seed": args.seed, "cost_sign": -1.0 if args.maximize else 1.0, **_overrides(args)})
    outcome = ExperimentRunner().run(
        problem,
        args.kind,
        options,
        trace_path=Path(args.trace) if args.trace else None,
        summary_path=Path(args.summary) if args.summary else None,
    )
    return _exit_code(outcome.result.status)


def run_experiment(args: argparse.Namespace) -> int:
    runner = ExperimentRunner()
    out = Path(args.out)
    overrides = _overrides(args)
    if args.name == "option-pricing":
        outcome = runner.option_pricing(args.n, args.eta, args.seed, out, maximize=args.maximize,
                                        epsilon=args.epsilon, **overrides)
    elif args.name == "balance":
        epsilon = 0.1 if args.epsilon is None else args.epsilon
        outcome = runner.balance(args.n, args.eta, args.seed, out, epsilon=epsilon, **overrides)
    else:
        outcome = runner.ranking(args.n, args.eta, args.seed, out, **overrides)
    return _exit_code(outcome.result.status)


def run_verify(args: argparse.Namespace) -> int:
    problem = decay_instance(n=args.n, seed=args.seed, epsilon=args.epsilon)
    points = decay_curve(problem, args.etas, seed=args.seed)
    fit = fit_decay(points)
    gaps = [p.gap for p in points]
    out = Path(args.out)
    write_table(out / "theorem1.csv", [(p.eta, p.gap) for p in points])
    write_summary(out / "summary.json", DecaySummary(
        n=args.n,
        seed=args.seed,
        epsilon=args.epsilon,
        etas=[p.eta for p in points],
        gaps=gaps,
        slope=fit.slope,
        intercept=fit.intercept,
        r_squared=fit.r_squared,
        decreasing=bool(np.all(np.diff(gaps) < 0)),
    ))
    logger.info(f"Decay slope {fit.slope:.4f}, R^2 {fit.r_squared:.4f}")
    return EXIT_CONVERGED


def main(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the requested command and return the process exit code."""
    configure_logging(load_config())
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_ERROR

    handlers = {"solve": run_solve, "experiment": run_experiment, "verify": run_verify}
    try:
        return handlers[args.command](args)
    except (UsageError, MotSolveError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
