"""Sinkhorn-Newton-Sparse: Sinkhorn-type warm-up, then Newton steps on a sparsified Hessian."""

from typing import Optional

import numpy as np
import scipy.sparse as sp
from loguru import logger

from src.core.config import SnsConfig, default_rho
from src.core.exceptions import LineSearchFailed
from src.core.numerics import solve_with_ladder
from src.solvers.line_search import ascent_step
from src.solvers.sinkhorn_type import run_sinkhorn
from src.solvers.solver_base import (
    ProblemLike,
    SolverBase,
    SolveResult,
    SolveStatus,
    as_potential,
    initial_point,
)
from src.solvers.trace import ConvergenceTrace


def sparsify_hessian(problem: ProblemLike, z: np.ndarray, rho: float) -> sp.csc_matrix:
    """
    Hessian whose y-x and y-constraint cross blocks keep only the ceil(rho*n^2) largest plan entries.

    All other blocks, the diagonal ones included, are built from the full plan.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    return as_potential(problem).hessian(z, rho=rho)


def newton_direction(potential, h: sp.spmatrix, grad: np.ndarray) -> np.ndarray:
    """Solve H d = -grad with the gauge coordinate held at zero."""
    keep = np.ones(potential.dim, dtype=bool)
    keep[potential.gauge_index] = False
    idx = np.flatnonzero(keep)
    reduced = sp.csc_matrix(h)[idx][:, idx].tocsc()
    solved = solve_with_ladder(reduced, -grad[idx])
    direction = np.zeros(potential.dim)
    direction[idx] = solved.x
    return direction


def run_sns(
    problem: ProblemLike,
    z0=None,
    cfg: Optional[SnsConfig] = None,
    trace: Optional[ConvergenceTrace] = None,
) -> SolveResult:
    """
    Run cfg.n1 Sinkhorn-type iterations, then up to cfg.n2 sparse Newton iterations.

    The sparsification threshold is recomputed from the current plan at every Newton
    iteration. A Newton step that fails its line search after the gradient fallback
    ends the run with status STAGNATED and the last accepted iterate.
    """
    potential = as_potential(problem)
    cfg = cfg or SnsConfig()
    trace = trace if trace is not None else ConvergenceTrace()
    z = initial_point(potential, z0)
    rho = cfg.rho if cfg.rho is not None else default_rho(potential.n, potential.d)

    if cfg.n1 > 0:
        warm = run_sinkhorn(potential, z, cfg.warmup(), trace)
        z = warm.z
        if warm.status == SolveStatus.CONVERGED:
            return warm
        if warm.status == SolveStatus.STAGNATED:
            logger.warning("Warm-up stagnated, continuing with Newton iterations")

    logger.debug(f"Newton stage with rho={rho:.4f} on {potential.name} (dim {potential.dim})")
    for _ in range(cfg.n2):
        grad = potential.gradient(z)
        if float(np.max(np.abs(grad))) <= cfg.grad_tol:
            if not len(trace):
                trace.record("newton", potential, z, grad)
            return SolveResult(z=z, trace=trace, status=SolveStatus.CONVERGED)

        h = potential.hessian(z, rho=rho)
        direction = newton_direction(potential, h, grad)
        try:
            z = ascent_step(potential, z, direction, grad, cfg.line_search).z
        except LineSearchFailed as e:
            logger.warning(f"Newton stage stagnated: {e}")
            if not len(trace):
                trace.record("newton", potential, z, grad)
            return SolveResult(z=z, trace=trace, status=SolveStatus.STAGNATED)

        record = trace.record("newton", potential, z)
        logger.debug(f"newton {record.iteration}: objective={record.objective:.12g} grad_inf={record.grad_inf:.3e}")
        if record.grad_inf <= cfg.grad_tol:
            logger.info(f"Sparse Newton converged after {trace.stage_count('newton')} Newton iterations")
            return SolveResult(z=z, trace=trace, status=SolveStatus.CONVERGED)

    return SolveResult(z=z, trace=trace, status=SolveStatus.MAX_ITER)


class SparseNewtonSolver(SolverBase):
    """Sinkhorn-Newton-Sparse."""

    def __init__(self, config: Optional[SnsConfig] = None):
        super().__init__(name="sns", description="Sinkhorn-type warm-up followed by sparse Newton steps")
        self.config = config or SnsConfig()

    def solve(self, problem, z0=None, trace=None) -> SolveResult:
        return run_sns(problem, z0, self.config, trace)
