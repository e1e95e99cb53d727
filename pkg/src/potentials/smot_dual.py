"""Dual potential g for entropic super-martingale transport."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import xlogy

from src.core.problem import SmotProblem
from src.potentials.potential_base import DualPotential, SlackFamily


@dataclass(frozen=True)
class SmotDual:
    """Dual variables (x, y, A) of the SMOT potential."""
    x: np.ndarray
    y: np.ndarray
    A: np.ndarray

    @classmethod
    def zeros(cls, n: int, d: int) -> "SmotDual":
        return cls(np.zeros(n), np.zeros(n), np.zeros((n, d)))


@dataclass(frozen=True)
class SmotRecovery:
    P: np.ndarray
    S: np.ndarray


class SmotPotential(DualPotential):
    """
    g(x, y, A) = x.r + y.c + A.W
        - (1/eta) sum exp(eta(-C + A V^T + x1^T + 1y^T) - 1)
        - (1/eta) sum exp(-eta*A - 1)
    """

    FAMILIES = (SlackFamily("S", (-1.0,)),)

    def __init__(self, problem: SmotProblem):
        super().__init__(problem, name="smot", description="super-martingale transport")

    @property
    def n_blocks(self) -> int:
        return 1

    @property
    def families(self):
        return self.FAMILIES

    def with_eta(self, eta: float) -> "SmotPotential":
        return SmotPotential(self.problem.with_eta(eta))

    def pack(self, dual: SmotDual) -> np.ndarray:
        return self.join(dual.x, dual.y, [dual.A])

    def unpack(self, z: np.ndarray) -> SmotDual:
        parts = self.split(z)
        return SmotDual(x=parts.x.copy(), y=parts.y.copy(), A=parts.blocks[0].copy())

    def recover(self, z: np.ndarray) -> SmotRecovery:
        (S,) = self.slacks(z)
        return SmotRecovery(P=self.plan(z), S=S)

    def violation(self, P: np.ndarray) -> float:
        return float(np.min(self.constraint_residual(P)))

    def is_feasible(self, P: np.ndarray, tol: float) -> bool:
        return self.violation(P) >= -tol

    def primal_objective(self, rec: SmotRecovery) -> float:
        entropy = float(np.sum(xlogy(rec.P, rec.P))) + float(np.sum(xlogy(rec.S, rec.S)))
        return float(np.sum(self.problem.C * rec.P)) + entropy / self.eta


def _potential(prob: SmotProblem, z) -> Tuple[SmotPotential, np.ndarray]:
    potential = SmotPotential(prob)
    flat = potential.pack(z) if isinstance(z, SmotDual) else np.asarray(z, dtype=float)
    return potential, flat


def eval_g(prob: SmotProblem, z) -> float:
    potential, flat = _potential(prob, z)
    return potential.value(flat)


def grad_g(prob: SmotProblem, z) -> SmotDual:
    potential, flat = _potential(prob, z)
    return potential.unpack(potential.gradient(flat))


def hessian_g(prob: SmotProblem, z, rho: Optional[float] = None) -> sp.csc_matrix:
    """Exact (rho=None) or sparsified Hessian of g, ordered (x, y, A cols)."""
    potential, flat = _potential(prob, z)
    return potential.hessian(flat, rho=rho)


def recover_primal_smot(prob: SmotProblem, z) -> Tuple[np.ndarray, np.ndarray]:
    potential, flat = _potential(prob, z)
    rec = potential.recover(flat)
    return rec.P, rec.S
