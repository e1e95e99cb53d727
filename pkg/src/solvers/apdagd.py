"""Adaptive primal-dual accelerated gradient ascent on a dual potential."""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from loguru import logger

from src.core.config import ApdagdConfig
from src.core.exceptions import AdaptiveStallError, PotentialOverflow
from src.solvers.solver_base import SolverBase, SolveResult, SolveStatus, as_potential
from src.solvers.trace import ConvergenceTrace


@dataclass(frozen=True)
class ApdagdState:
    """Iterate after k accepted steps; M is the smoothness estimate that passed the test."""
    z: np.ndarray
    zeta: np.ndarray
    lam: np.ndarray
    alpha: float
    beta: float
    L: float
    M: float
    k: int


def run_apdagd(
    potential,
    max_iter: Optional[int] = None,
    cfg: Optional[ApdagdConfig] = None,
    z0: Optional[np.ndarray] = None,
    trace: Optional[ConvergenceTrace] = None,
    on_step: Optional[Callable[[ApdagdState], None]] = None,
) -> SolveResult:
    """
    Accelerated gradient ascent with doubling estimates of the smoothness constant.

    Each iteration starts from M = L and doubles M until
    f(z') >= f(lam) + <grad f(lam), z' - lam> - (M/2) ||z' - lam||^2,
    then sets L = M/2. Tentative points whose exponentials overflow fail the test.

    Args:
        potential: problem, or any object with value, gradient, increment and zeros
        max_iter: iteration count, overriding cfg.max_iter
        cfg: algorithm constants
        z0: starting point for z and zeta (zero when omitted)
        trace: trace receiving one "apdagd" record per iteration
        on_step: callback receiving every accepted state

    Raises:
        AdaptiveStallError: the test never passed within cfg.max_doublings doublings
    """
    potential = as_potential(potential)
    cfg = cfg or ApdagdConfig()
    n_iter = max_iter if max_iter is not None else cfg.max_iter
    if n_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {n_iter}")
    trace = trace if trace is not None else ConvergenceTrace()

    z = potential.zeros() if z0 is None else np.array(z0, dtype=float, copy=True)
    zeta = z.copy()
    beta = 0.0
    L = cfg.l0

    for k in range(n_iter):
        M = L / 2.0
        for _ in range(cfg.max_doublings):
            M *= 2.0
            alpha = (1.0 + math.sqrt(1.0 + 4.0 * M * beta)) / (2.0 * M)
            beta_next = beta + alpha
            tau = alpha / beta_next
            lam = tau * zeta + (1.0 - tau) * z
            try:
                grad_lam = potential.gradient(lam)
                zeta_next = zeta + alpha * grad_lam
                z_next = tau * zeta_next + (1.0 - tau) * z
                step = z_next - lam
                increase = potential.increment(lam, step, grad_lam)
            except PotentialOverflow:
                continue
            if increase >= float(np.dot(grad_lam, step)) - 0.5 * M * float(np.dot(step, step)):
                break
        else:
            raise AdaptiveStallError(f"Iteration {k + 1}: no smoothness estimate accepted up to M={M:.3e}")

        L = M / 2.0
        beta = beta_next
        z, zeta = z_next, zeta_next
        if on_step is not None:
            on_step(ApdagdState(z=z, zeta=zeta, lam=lam, alpha=alpha, beta=beta, L=L, M=M, k=k + 1))

        record = trace.record("apdagd", potential, z)
        if cfg.grad_tol > 0.0 and record.grad_inf <= cfg.grad_tol:
            logger.info(f"APDAGD converged after {k + 1} iterations")
            return SolveResult(z=z, trace=trace, status=SolveStatus.CONVERGED)

    logger.debug(f"APDAGD finished {n_iter} iterations, L={L:.3e}")
    return SolveResult(z=z, trace=trace, status=SolveStatus.MAX_ITER)


class ApdagdSolver(SolverBase):
    """Adaptive primal-dual accelerated gradient baseline."""

    def __init__(self, config: Optional[ApdagdConfig] = None):
        super().__init__(name="apdagd", description="adaptive accelerated gradient ascent baseline")
        self.config = config or ApdagdConfig()

    def solve(self, problem, z0=None, trace=None) -> SolveResult:
        return run_apdagd(problem, cfg=self.config, z0=z0, trace=trace)
