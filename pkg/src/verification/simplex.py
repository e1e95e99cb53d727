"""Dense two-phase tableau simplex with Bland's rule, for small standard-form LPs."""

from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
from loguru import logger

from src.core.exceptions import PivotLimitExceeded

PIVOT_TOL = 1e-11


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class StandardFormSolution(NamedTuple):
    """Result of min c.x subject to A x = b, x >= 0."""
    status: LpStatus
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    basis: np.ndarray
    pivots: int


def _pivot(T: np.ndarray, rhs: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    piv = T[row, col]
    T[row] /= piv
    rhs[row] /= piv
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])
    rhs -= factor * rhs[row]
    np.maximum(rhs, 0.0, out=rhs, where=np.abs(rhs) < PIVOT_TOL)
    basis[row] = col


def _bland(
    T: np.ndarray,
    rhs: np.ndarray,
    basis: np.ndarray,
    cost: np.ndarray,
    tol: float,
    max_pivots: int,
) -> Tuple[LpStatus, int]:
    """Run primal simplex iterations on a feasible tableau until optimal or unbounded."""
    for pivots in range(max_pivots):
        reduced = cost - cost[basis] @ T
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return LpStatus.OPTIMAL, pivots
        # Bland: lowest-index entering column
        col = int(candidates[0])
        column = T[:, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return LpStatus.UNBOUNDED, pivots
        ratios = rhs[rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        # Bland: among tied rows, the basic variable with the lowest index leaves
        row = int(tied[np.argmin(basis[tied])])
        _pivot(T, rhs, basis, row, col)
    raise PivotLimitExceeded(f"Simplex exceeded {max_pivots} pivots")


def solve_standard_form(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    tol: float = 1e-9,
    max_pivots: int = 100000,
) -> StandardFormSolution:
    """
    Minimize c.x subject to A x = b, x >= 0 with the two-phase method.

    Phase one drives an artificial variable on every row to zero. Artificials left
    in the basis are pivoted out; rows where that is impossible are redundant and
    dropped. Duals are recovered from the final basis and refer to the rows of A
    (dropped rows get a zero dual).

    Args:
        A: m x N constraint matrix
        b: right-hand side of length m
        c: cost vector of length N
        tol: optimality and feasibility tolerance

    Returns:
        StandardFormSolution; x, duals and reduced costs are NaN unless optimal
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, N = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A_signed = A * sign[:, None]
    rhs = b * sign

    T = np.hstack([A_signed, np.eye(m)])
    basis = np.arange(N, N + m)
    phase_one_cost = np.concatenate([np.zeros(N), np.ones(m)])
    status, pivots = _bland(T, rhs, basis, phase_one_cost, tol, max_pivots)

    def failed(status: LpStatus) -> StandardFormSolution:
        nan = np.full(N, np.nan)
        return StandardFormSolution(status, nan, float("nan"), np.full(m, np.nan), nan, basis, pivots)

    infeasibility = float(phase_one_cost[basis] @ rhs)
    if infeasibility > tol * max(1.0, float(np.abs(b).max(initial=0.0))):
        logger.debug(f"Phase one ended with infeasibility {infeasibility:.3e}")
        return failed(LpStatus.INFEASIBLE)

    keep = np.ones(m, dtype=bool)
    for row in range(m):
        if basis[row] < N:
            continue
        candidates = np.flatnonzero(np.abs(T[row, :N]) > PIVOT_TOL)
        if candidates.size:
            _pivot(T, rhs, basis, row, int(candidates[0]))
            pivots += 1
        else:
            keep[row] = False
    if not keep.all():
        logger.debug(f"Dropping {int((~keep).sum())} redundant equality rows")
    T = T[keep][:, :N]
    rhs = rhs[keep]
    basis = basis[keep]

    status, more = _bland(T, rhs, basis, c, tol, max_pivots)
    pivots += more
    if status != LpStatus.OPTIMAL:
        return failed(status)

    x = np.zeros(N)
    x[basis] = rhs
    duals_kept = np.linalg.solve(A_signed[keep][:, basis].T, c[basis])
    duals = np.zeros(m)
    duals[keep] = duals_kept * sign[keep]
    reduced = c - A.T @ duals
    return StandardFormSolution(status, x, float(c @ x), duals, reduced, basis, pivots)
