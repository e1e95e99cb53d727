"""Sinkhorn-type alternating maximization: exact column scaling in y, block Newton on the rest."""

from typing import NamedTuple, Optional

import numpy as np
from loguru import logger

from src.core.config import LineSearchConfig, SinkhornConfig
from src.core.exceptions import ColumnScalingError, ColumnUnderflow, EmptyRow, LineSearchFailed
from src.core.numerics import log_sum_exp_rows, solve_with_ladder
from src.solvers.solver_base import (
    ProblemLike,
    SolverBase,
    SolveResult,
    SolveStatus,
    as_potential,
    initial_point,
)
from src.solvers.trace import ConvergenceTrace

# log P entries below this are zero in double precision
UNDERFLOW_LOG = -745.0


class BlockStep(NamedTuple):
    z: np.ndarray
    alpha: float


def column_scale(problem: ProblemLike, z: np.ndarray, column_tol: Optional[float] = None) -> np.ndarray:
    """
    Maximize the potential exactly in y: y <- y + (log c - log(P^T 1)) / eta.

    Args:
        problem: problem or potential
        z: flat dual point
        column_tol: when set, assert ||P^T 1 - c||_1 <= column_tol after the update

    Returns:
        New flat dual point with only y changed
    """
    potential = as_potential(problem)
    log_p = potential.log_plan(z)
    try:
        log_cols = log_sum_exp_rows(log_p.T)
    except EmptyRow as e:
        raise ColumnUnderflow(f"Column {e.row} of the plan is empty") from e
    low = np.flatnonzero(log_cols < UNDERFLOW_LOG)
    if low.size:
        raise ColumnUnderflow(f"Column {int(low[0])} of the plan underflows (log mass {log_cols[low[0]]:.1f})")

    z = np.array(z, dtype=float, copy=True)
    z[potential.y_slice] += (np.log(potential.problem.c) - log_cols) / potential.eta

    if column_tol is not None:
        error = float(np.abs(potential.plan(z).sum(axis=0) - potential.problem.c).sum())
        if error > column_tol:
            raise ColumnScalingError(f"Column marginal error {error:.3e} exceeds {column_tol:.1e}")
    return z


def _site_backtrack(
    potential,
    z: np.ndarray,
    direction: np.ndarray,
    grad: np.ndarray,
    cfg: LineSearchConfig,
    pending: np.ndarray,
) -> np.ndarray:
    """
    Armijo backtracking run separately at every pending site.

    Returns:
        Accepted step length per site, 0 where the site never passed
    """
    slopes = potential.site_dot(grad, direction)
    pending = pending & np.isfinite(slopes) & (slopes > 0.0)
    alphas = np.zeros(potential.n)
    alpha = 1.0
    for _ in range(cfg.max_backtracks):
        if not pending.any():
            break
        step = potential.scale_sites(direction, np.where(pending, alpha, 0.0))
        gains = potential.site_increments(z, step, grad)
        passed = pending & (gains >= cfg.c1 * alpha * slopes)
        alphas[passed] = alpha
        pending = pending & ~passed
        alpha *= cfg.shrink
    return alphas


def inner_block_step(
    problem: ProblemLike,
    z: np.ndarray,
    cfg: Optional[LineSearchConfig] = None,
) -> BlockStep:
    """
    One Newton step on x and the constraint blocks, then an exact update of u.

    With y and u fixed the potential splits into one term per site, so every site
    backtracks on its own and a site whose Newton direction is rejected falls back
    to its own gradient. The reported alpha is the shortest step any site took.

    Raises:
        LineSearchFailed: no site with a nonzero gradient could move
    """
    potential = as_potential(problem)
    cfg = cfg or LineSearchConfig()
    grad = potential.gradient(z)
    active = potential.site_dot(grad, grad) > 0.0
    if not active.any():
        return BlockStep(z=potential.budget_update(z), alpha=0.0)

    coords = potential.block_coordinates()
    h = potential.hessian(z, block=True)
    n_site = coords.size - (1 if potential.has_budget else 0)
    # u is the last block coordinate
    site_coords = coords[:n_site]
    solved = solve_with_ladder(h[:n_site, :n_site].tocsc(), -grad[site_coords])
    direction = np.zeros_like(z)
    direction[site_coords] = solved.x

    newton = _site_backtrack(potential, z, direction, grad, cfg, active)
    ascent = potential.scale_sites(grad, np.ones(potential.n))
    rejected = active & (newton == 0.0)
    fallback = np.zeros(potential.n)
    if rejected.any():
        fallback = _site_backtrack(potential, z, ascent, grad, cfg, rejected)
        logger.debug(f"{int(rejected.sum())} sites fell back to gradient ascent")

    taken = np.maximum(newton, fallback)[active]
    if not np.any(taken > 0.0):
        raise LineSearchFailed(
            f"No site accepted a step after {cfg.max_backtracks} backtracks "
            f"(block gradient norm {np.max(np.abs(grad[site_coords])):.3e})"
        )
    step = potential.scale_sites(direction, newton) + potential.scale_sites(ascent, fallback)
    z_new = potential.budget_update(z + step)
    return BlockStep(z=z_new, alpha=float(taken[taken > 0.0].min()))


def run_sinkhorn(
    problem: ProblemLike,
    z0=None,
    cfg: Optional[SinkhornConfig] = None,
    trace: Optional[ConvergenceTrace] = None,
    stage: str = "sinkhorn",
) -> SolveResult:
    """
    Alternate column scaling with inner block Newton steps.

    Each outer iteration scales the columns once, then takes cfg.inner_newton
    block steps and records the iterate. Stops early once ||grad||_inf <= grad_tol.
    """
    potential = as_potential(problem)
    cfg = cfg or SinkhornConfig()
    trace = trace if trace is not None else ConvergenceTrace()
    z = initial_point(potential, z0)

    for outer in range(cfg.max_outer):
        z = column_scale(potential, z, cfg.column_tol)
        try:
            for _ in range(cfg.inner_newton):
                z = inner_block_step(potential, z, cfg.line_search).z
        except LineSearchFailed as e:
            logger.warning(f"Sinkhorn-type iteration {outer + 1} stagnated: {e}")
            trace.record(stage, potential, z)
            return SolveResult(z=z, trace=trace, status=SolveStatus.STAGNATED)

        record = trace.record(stage, potential, z)
        logger.debug(
            f"{stage} {record.iteration}: objective={record.objective:.12g} grad_inf={record.grad_inf:.3e}"
        )
        if record.grad_inf <= cfg.grad_tol:
            logger.info(f"Sinkhorn-type iteration converged after {outer + 1} outer iterations")
            return SolveResult(z=z, trace=trace, status=SolveStatus.CONVERGED)

    return SolveResult(z=z, trace=trace, status=SolveStatus.MAX_ITER)


class SinkhornSolver(SolverBase):
    """Sinkhorn-type alternating maximization."""

    def __init__(self, config: Optional[SinkhornConfig] = None):
        super().__init__(name="sinkhorn", description="column scaling plus block Newton steps")
        self.config = config or SinkhornConfig()

    def solve(self, problem, z0=None, trace=None) -> SolveResult:
        return run_sinkhorn(problem, z0, self.config, trace)
