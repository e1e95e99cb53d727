"""Armijo backtracking for ascent on a concave potential."""

from typing import NamedTuple, Optional

import numpy as np
from loguru import logger

from src.core.config import LineSearchConfig
from src.core.exceptions import LineSearchFailed, PotentialOverflow


class AcceptedStep(NamedTuple):
    z: np.ndarray
    alpha: float
    increase: float
    fallback: bool


def armijo_backtrack(
    potential,
    z: np.ndarray,
    direction: np.ndarray,
    grad: np.ndarray,
    cfg: LineSearchConfig,
) -> Optional[AcceptedStep]:
    """
    Backtrack from alpha = 1 until f(z + alpha*d) - f(z) >= c1 * alpha * <grad, d>.

    Steps whose exponentials leave the representable range count as rejections.

    Returns:
        The accepted step, or None when no alpha passed or d is not an ascent direction
    """
    slope = float(np.dot(grad, direction))
    if not np.isfinite(slope) or slope <= 0.0:
        return None

    alpha = 1.0
    for _ in range(cfg.max_backtracks):
        step = alpha * direction
        try:
            increase = potential.increment(z, step, grad)
        except PotentialOverflow:
            increase = None
        if increase is not None and increase >= cfg.c1 * alpha * slope:
            return AcceptedStep(z=z + step, alpha=alpha, increase=increase, fallback=False)
        alpha *= cfg.shrink
    return None


def ascent_step(
    potential,
    z: np.ndarray,
    direction: np.ndarray,
    grad: np.ndarray,
    cfg: LineSearchConfig,
) -> AcceptedStep:
    """
    Line search along direction, falling back to the gradient.

    Raises:
        LineSearchFailed: neither direction yields an acceptable step
    """
    accepted = armijo_backtrack(potential, z, direction, grad, cfg)
    if accepted is not None:
        return accepted

    fallback = np.array(grad, dtype=float, copy=True)
    logger.debug("Newton direction rejected, falling back to gradient ascent")
    accepted = armijo_backtrack(potential, z, fallback, grad, cfg)
    if accepted is None:
        raise LineSearchFailed(
            f"No acceptable step after {cfg.max_backtracks} backtracks "
            f"(gradient norm {np.max(np.abs(fallback)):.3e})"
        )
    return accepted._replace(fallback=True)
