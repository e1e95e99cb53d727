"""Experiment orchestration: warm start, solve, reference plan and report files."""

import time
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from src.core.config import ApdagdConfig, EtaSchedule, SinkhornConfig, SnsConfig
from src.core.problem import (
    MotProblem,
    SmotProblem,
    build_balance,
    build_option_pricing,
    build_ranking,
)
from src.core.solver_manager import SolverManager
from src.experiments.reporting import (
    RunSummary,
    expected_positions,
    write_summary,
    write_trace,
    write_vector,
)
from src.experiments.warm_start import warm_init
from src.potentials import DualPotential, make_potential
from src.solvers.solver_base import SolveResult, SolveStatus
from src.solvers.sparse_newton import run_sns
from src.solvers.trace import ConvergenceTrace

REFERENCE_TOL = 1e-13
REFERENCE_NEWTON = 50
FEASIBILITY_TOL = 1e-8


class RunOptions(BaseModel):
    """Solver selection and stopping rules for one run."""
    solver: str = "sns"
    n1: int = Field(20, ge=0)
    n2: int = Field(10, ge=1)
    rho: Optional[float] = Field(None, gt=0.0, le=1.0)
    tol: float = Field(1e-10, ge=0.0)
    max_outer: int = Field(100, ge=1)
    max_iter: int = Field(500, ge=1)
    warm_start: bool = True
    eta0: float = Field(12.5, gt=0.0)
    iters_per_level: int = Field(5, ge=1)
    reference: bool = False
    timings: bool = False
    seed: Optional[int] = None
    cost_sign: float = 1.0


class RunOutcome(NamedTuple):
    result: SolveResult
    summary: RunSummary
    potential: DualPotential

    @property
    def plan(self) -> np.ndarray:
        return self.potential.plan(self.result.z)


class ExperimentRunner:
    """Runs one solve end to end and writes its trace and summary."""

    def __init__(self, manager: Optional[SolverManager] = None):
        self.manager = manager or SolverManager().load_defaults()

    def solver_config(self, options: RunOptions):
        if options.solver == "sinkhorn":
            return SinkhornConfig(max_outer=options.max_outer, grad_tol=options.tol)
        if options.solver == "sns":
            return SnsConfig(n1=options.n1, n2=options.n2, rho=options.rho, grad_tol=options.tol)
        if options.solver == "apdagd":
            return ApdagdConfig(max_iter=options.max_iter, grad_tol=options.tol)
        raise KeyError(f"Unknown solver '{options.solver}'")

    def reference_plan(self, potential: DualPotential, z0) -> np.ndarray:
        """Entropic optimal plan from full Newton (rho = 1) after a generous warm-up."""
        cfg = SnsConfig(n1=potential.n, n2=REFERENCE_NEWTON, rho=1.0, grad_tol=REFERENCE_TOL)
        result = run_sns(potential, z0, cfg)
        if result.status != SolveStatus.CONVERGED:
            logger.warning(f"Reference solve ended as {result.status.value}")
        return potential.plan(result.z)

    def run(
        self,
        problem: SmotProblem,
        problem_id: str,
        options: RunOptions,
        trace_path: Optional[Path] = None,
        summary_path: Optional[Path] = None,
    ) -> RunOutcome:
        """
        Warm-start (optionally), solve and summarize one problem.

        Args:
            problem: instance to solve at its own eta
            problem_id: label stored in the summary
            options: solver selection and stopping rules
            trace_path: where to write the trace, if anywhere
            summary_path: where to write the summary, if anywhere

        Returns:
            RunOutcome with the solver result and its summary
        """
        potential = make_potential(problem)
        logger.info(f"Solving {problem_id} (n={potential.n}, d={potential.d}, eta={potential.eta:g}) with {options.solver}")

        started = time.perf_counter()
        z0 = None
        if options.warm_start:
            schedule = EtaSchedule(eta0=options.eta0, eta_target=potential.eta, iters_per_level=options.iters_per_level)
            z0 = warm_init(problem, schedule)
        warm_ms = (time.perf_counter() - started) * 1000.0

        reference = self.reference_plan(potential, z0) if options.reference else None
        trace = ConvergenceTrace(reference=reference)
        solver = self.manager.initialize_solver(options.solver, self.solver_config(options))

        started = time.perf_counter()
        result = solver.solve(potential, z0, trace)
        solve_ms = (time.perf_counter() - started) * 1000.0
        logger.info(f"{options.solver} finished as {result.status.value} after {len(trace)} recorded iterations")

        summary = self.summarize(potential, result, problem_id, options)
        if options.timings:
            summary = summary.model_copy(update={"warm_start_ms": warm_ms, "solve_ms": solve_ms})
        if trace_path is not None:
            write_trace(trace_path, trace, options.timings)
        if summary_path is not None:
            write_summary(summary_path, summary)
        return RunOutcome(result=result, summary=summary, potential=potential)

    def summarize(
        self,
        potential: DualPotential,
        result: SolveResult,
        problem_id: str,
        options: RunOptions,
    ) -> RunSummary:
        z = result.z
        rec = potential.recover(z)
        P = rec.P
        row_error, col_error = potential.marginal_errors(P)
        objective = potential.value(z)
        iterations = {}
        for record in result.trace:
            iterations[record.stage] = iterations.get(record.stage, 0) + 1
        last = result.trace.last
        epsilon = potential.problem.epsilon if isinstance(potential.problem, MotProblem) else None
        return RunSummary(
            solver=options.solver,
            problem=problem_id,
            n=potential.n,
            d=potential.d,
            eta=potential.eta,
            epsilon=epsilon,
            seed=options.seed,
            status=result.status.value,
            objective=objective,
            grad_inf=float(np.max(np.abs(potential.gradient(z)))),
            row_error=row_error,
            col_error=col_error,
            violation=potential.violation(P),
            feasible=potential.is_feasible(P, FEASIBILITY_TOL),
            transport_cost=options.cost_sign * float(np.sum(potential.problem.C * P)),
            duality_gap=potential.primal_objective(rec) - objective,
            iterations=iterations,
            l1_to_ref=last.l1_to_ref if last is not None else None,
        )

    # Desk-scale reruns of the three experiments

    def option_pricing(
        self,
        n: int = 200,
        eta: float = 1200.0,
        seed: Optional[int] = None,
        out: Optional[Path] = None,
        maximize: bool = False,
        epsilon: Optional[float] = None,
        **overrides,
    ) -> RunOutcome:
        """Robust price bound of |X - Y| under an L1-relaxed martingale constraint; eps defaults to 2/n."""
        problem = build_option_pricing(n, epsilon=epsilon, eta=eta)
        if maximize:
            problem = MotProblem(
                C=-problem.C, r=problem.r, c=problem.c, V=problem.V, W=problem.W,
                eta=problem.eta, epsilon=problem.epsilon,
            )
        defaults = dict(solver="sns", n1=20, n2=10, warm_start=True, seed=seed, cost_sign=-1.0 if maximize else 1.0)
        options = RunOptions(**{**defaults, **overrides})
        return self.run(problem, "option-pricing", options, *self._paths(out))

    def balance(
        self,
        n: int = 200,
        eta: float = 1200.0,
        seed: int = 0,
        out: Optional[Path] = None,
        epsilon: float = 0.1,
        **overrides,
    ) -> RunOutcome:
        """Random assignment under a two-group balance constraint; eps = 0.1."""
        size = min(100, n // 2)
        problem = build_balance(n, size_a=size, size_b=size, epsilon=epsilon, eta=eta, seed=seed)
        defaults = dict(solver="sns", n1=10, n2=5, warm_start=True, seed=seed)
        options = RunOptions(**{**defaults, **overrides})
        return self.run(problem, "balance", options, *self._paths(out))

    def ranking(
        self,
        n: int = 200,
        eta: float = 1200.0,
        seed: int = 0,
        out: Optional[Path] = None,
        **overrides,
    ) -> RunOutcome:
        """Stochastic ranking under a diversity constraint, Sinkhorn-type only and no warm start."""
        problem = build_ranking(n, k_top=min(39, n), eta=eta, seed=seed)
        defaults = dict(solver="sinkhorn", max_outer=30, warm_start=False, seed=seed)
        options = RunOptions(**{**defaults, **overrides})
        outcome = self.run(problem, "ranking", options, *self._paths(out))
        if out is not None:
            write_vector(Path(out) / "positions.csv", expected_positions(outcome.plan))
        return outcome

    @staticmethod
    def _paths(out: Optional[Path]):
        if out is None:
            return None, None
        out = Path(out)
        return out / "trace.csv", out / "summary.json"
