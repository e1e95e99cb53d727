"""Base solver interface for motsolve."""

from abc import ABC, abstractmethod
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np

from src.core.problem import SmotProblem
from src.potentials import DualPotential, make_potential
from src.solvers.trace import ConvergenceTrace


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    STAGNATED = "stagnated"


class SolveResult(NamedTuple):
    z: np.ndarray
    trace: ConvergenceTrace
    status: SolveStatus


ProblemLike = Union[SmotProblem, DualPotential]


def as_potential(problem: ProblemLike) -> DualPotential:
    if isinstance(problem, SmotProblem):
        return make_potential(problem)
    return problem


def initial_point(potential: DualPotential, z0) -> np.ndarray:
    """Flat copy of z0; None means the zero dual, dual bundles are packed."""
    if z0 is None:
        return potential.zeros()
    if hasattr(z0, "x") and hasattr(potential, "pack"):
        return potential.pack(z0)
    z = np.array(z0, dtype=float, copy=True)
    potential.split(z)
    return z


class SolverBase(ABC):
    """Base class for all solvers."""

    def __init__(self, name: str, description: str):
        """
        Initialize the solver.

        Args:
            name: The name of the solver
            description: A short description of what the solver does
        """
        self.name = name
        self.description = description

    @abstractmethod
    def solve(
        self,
        problem: ProblemLike,
        z0: Optional[np.ndarray] = None,
        trace: Optional[ConvergenceTrace] = None,
    ) -> SolveResult:
        """
        Maximize the dual potential of problem starting from z0.

        Returns:
            SolveResult with the final dual point, the trace and the exit status
        """
        pass

    def get_help(self) -> str:
        return f"{self.name}: {self.description}"
