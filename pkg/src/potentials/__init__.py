"""Dual potentials of entropic MOT and SMOT."""

from src.core.problem import MotProblem, SmotProblem
from src.potentials.mot_dual import MotPotential
from src.potentials.potential_base import DualPotential
from src.potentials.smot_dual import SmotPotential


def make_potential(problem: SmotProblem) -> DualPotential:
    """The potential matching the problem type: f for MotProblem, g for SmotProblem."""
    if isinstance(problem, MotProblem):
        return MotPotential(problem)
    return SmotPotential(problem)
