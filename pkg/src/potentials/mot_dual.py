"""Dual potential f for entropic MOT with an L1 violation budget."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import xlogy

from src.core.problem import MotProblem
from src.potentials.potential_base import DualPotential, SlackFamily


@dataclass(frozen=True)
class MotDual:
    """Dual variables (x, y, A, B, u) of the MOT potential."""
    x: np.ndarray
    y: np.ndarray
    A: np.ndarray
    B: np.ndarray
    u: float

    @classmethod
    def zeros(cls, n: int, d: int) -> "MotDual":
        return cls(np.zeros(n), np.zeros(n), np.zeros((n, d)), np.zeros((n, d)), 0.0)


@dataclass(frozen=True)
class PrimalRecovery:
    """Plan and slacks attached to a dual point: P, S, T, E, q."""
    P: np.ndarray
    S: np.ndarray
    T: np.ndarray
    E: np.ndarray
    q: float


class MotPotential(DualPotential):
    """
    f(x, y, A, B, u) = x.r + y.c + (A + B).W + eps*u
        - (1/eta) sum exp(eta(-C + (A+B)V^T + x1^T + 1y^T) - 1)
        - (1/eta) sum [exp(eta*A - 1) + exp(-eta*B - 1) + exp(eta(u - A + B) - 1)]
        - (1/eta) exp(eta*u - 1)
    """

    FAMILIES = (
        SlackFamily("S", (1.0, 0.0)),
        SlackFamily("T", (0.0, -1.0)),
        SlackFamily("E", (-1.0, 1.0), budget_sign=1.0),
        SlackFamily("q", (0.0, 0.0), budget_sign=1.0, scalar=True),
    )

    def __init__(self, problem: MotProblem):
        super().__init__(problem, name="mot", description="martingale transport with L1 violation budget")

    @property
    def n_blocks(self) -> int:
        return 2

    @property
    def families(self):
        return self.FAMILIES

    @property
    def budget(self) -> float:
        return self.problem.epsilon

    def with_eta(self, eta: float) -> "MotPotential":
        return MotPotential(self.problem.with_eta(eta))

    def pack(self, dual: MotDual) -> np.ndarray:
        return self.join(dual.x, dual.y, [dual.A, dual.B], dual.u)

    def unpack(self, z: np.ndarray) -> MotDual:
        parts = self.split(z)
        return MotDual(
            x=parts.x.copy(),
            y=parts.y.copy(),
            A=parts.blocks[0].copy(),
            B=parts.blocks[1].copy(),
            u=parts.u,
        )

    def recover(self, z: np.ndarray) -> PrimalRecovery:
        S, T, E, q = self.slacks(z)
        return PrimalRecovery(P=self.plan(z), S=S, T=T, E=E, q=float(q[0]))

    def violation(self, P: np.ndarray) -> float:
        return float(np.abs(self.constraint_residual(P)).sum())

    def is_feasible(self, P: np.ndarray, tol: float) -> bool:
        return self.violation(P) <= self.problem.epsilon + tol

    def primal_objective(self, rec: PrimalRecovery) -> float:
        """C.P + (1/eta) * sum of m log m over P, S, T, E and q."""
        entropy = sum(float(np.sum(xlogy(m, m))) for m in (rec.P, rec.S, rec.T, rec.E))
        entropy += float(xlogy(rec.q, rec.q))
        return float(np.sum(self.problem.C * rec.P)) + entropy / self.eta


def _potential(prob: MotProblem, z) -> Tuple[MotPotential, np.ndarray]:
    potential = MotPotential(prob)
    flat = potential.pack(z) if isinstance(z, MotDual) else np.asarray(z, dtype=float)
    return potential, flat


def log_plan(prob: MotProblem, z) -> np.ndarray:
    potential, flat = _potential(prob, z)
    return potential.log_plan(flat)


def eval_f(prob: MotProblem, z) -> float:
    potential, flat = _potential(prob, z)
    return potential.value(flat)


def grad_f(prob: MotProblem, z) -> MotDual:
    """Gradient of f, in the same shape as the dual variables."""
    potential, flat = _potential(prob, z)
    return potential.unpack(potential.gradient(flat))


def hessian_f(prob: MotProblem, z, rho: Optional[float] = None) -> sp.csc_matrix:
    """Exact Hessian of f (rho=None) or its sparsified version, ordered (x, y, A cols, B cols, u)."""
    potential, flat = _potential(prob, z)
    return potential.hessian(flat, rho=rho)


def recover_primal(prob: MotProblem, z) -> PrimalRecovery:
    potential, flat = _potential(prob, z)
    return potential.recover(flat)


def primal_objective(prob: MotProblem, rec: PrimalRecovery) -> float:
    return MotPotential(prob).primal_objective(rec)
