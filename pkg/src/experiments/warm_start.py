"""Warm initialization by a geometric schedule of regularization strengths."""

from typing import Optional

import numpy as np
from loguru import logger

from src.core.config import EtaSchedule, SinkhornConfig
from src.core.exceptions import MotSolveError, WarmStartError
from src.core.problem import SmotProblem
from src.potentials import make_potential
from src.solvers.sinkhorn_type import run_sinkhorn


def warm_init(prob: SmotProblem, schedule: EtaSchedule, cfg: Optional[SinkhornConfig] = None) -> np.ndarray:
    """
    Dual point for prob at schedule.eta_target, built from zero duals.

    Runs schedule.iters_per_level Sinkhorn-type iterations at each level
    eta0, 2*eta0, ... below the target and carries the duals unchanged between levels.

    Raises:
        WarmStartError: a level failed; carries the level index and its eta
    """
    base = cfg or SinkhornConfig()
    level_cfg = base.model_copy(update={"max_outer": schedule.iters_per_level, "grad_tol": 0.0})
    potential = make_potential(prob)
    z = potential.zeros()

    for level, eta in enumerate(schedule.levels):
        try:
            result = run_sinkhorn(potential.with_eta(eta), z, level_cfg)
        except MotSolveError as e:
            raise WarmStartError(level, eta, e) from e
        z = result.z
        logger.debug(f"Warm start level {level} (eta={eta:g}) finished as {result.status.value}")
    if schedule.n_levels:
        logger.info(f"Warm start ran {schedule.n_levels} levels up to eta={schedule.levels[-1]:g}")
    return z
