"""Solver registry for motsolve."""

from typing import Dict, Tuple, Type

from loguru import logger

from src.solvers.apdagd import ApdagdSolver
from src.solvers.sinkhorn_type import SinkhornSolver
from src.solvers.solver_base import SolverBase
from src.solvers.sparse_newton import SparseNewtonSolver


class SolverManager:
    """Manager for registering and instantiating solvers by id."""

    def __init__(self):
        self.solver_classes: Dict[str, Tuple[Type[SolverBase], tuple]] = {}

    def load_defaults(self) -> "SolverManager":
        """Register the built-in solvers under their command-line ids."""
        self.register_solver_class("sinkhorn", SinkhornSolver)
        self.register_solver_class("sns", SparseNewtonSolver)
        self.register_solver_class("apdagd", ApdagdSolver)
        return self

    def register_solver_class(self, solver_id: str, solver_class: Type[SolverBase], *args) -> None:
        """
        Register a solver class for later initialization.

        Args:
            solver_id: Unique identifier for the solver
            solver_class: The solver class
            *args: Arguments to pass to the solver constructor
        """
        self.solver_classes[solver_id] = (solver_class, args)
        logger.debug(f"Registered solver class: {solver_id}")

    def initialize_solver(self, solver_id: str, config=None) -> SolverBase:
        """
        Instantiate a registered solver.

        Args:
            solver_id: The solver ID
            config: Solver configuration; the class default is used when omitted

        Returns:
            The solver instance

        Raises:
            KeyError: no solver is registered under solver_id
        """
        if solver_id not in self.solver_classes:
            raise KeyError(f"Unknown solver '{solver_id}', expected one of {sorted(self.solver_classes)}")
        solver_class, args = self.solver_classes[solver_id]
        solver = solver_class(*args, config) if config is not None else solver_class(*args)
        logger.info(f"Initialized solver: {solver.name}")
        return solver

    def get_help_text(self) -> str:
        lines = [solver_class(*args).get_help() for solver_class, args in self.solver_classes.values()]
        return "\n".join(lines)
