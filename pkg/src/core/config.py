"""Configuration management for motsolve."""

import math
import os
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, model_validator


class LineSearchConfig(BaseModel):
    """Backtracking (Armijo) line search parameters."""
    shrink: float = Field(0.5, gt=0.0, lt=1.0)
    c1: float = Field(1e-4, gt=0.0, lt=1.0)
    max_backtracks: int = Field(50, ge=1)


class SinkhornConfig(BaseModel):
    """Sinkhorn-type alternating maximization configuration."""
    max_outer: int = Field(100, ge=1)
    inner_newton: int = Field(3, ge=1)
    grad_tol: float = Field(1e-10, ge=0.0)
    column_tol: float = Field(1e-10, gt=0.0)
    line_search: LineSearchConfig = LineSearchConfig()


class SnsConfig(BaseModel):
    """Sinkhorn-Newton-Sparse configuration.

    ``rho=None`` selects the default retention fraction for the problem size.
    """
    n1: int = Field(20, ge=0)
    n2: int = Field(10, ge=1)
    rho: Optional[float] = Field(None, gt=0.0, le=1.0)
    grad_tol: float = Field(1e-10, ge=0.0)
    inner_newton: int = Field(3, ge=1)
    line_search: LineSearchConfig = LineSearchConfig()

    def warmup(self) -> SinkhornConfig:
        """Sinkhorn-type configuration used for the warm-up stage."""
        return SinkhornConfig(
            max_outer=max(self.n1, 1),
            inner_newton=self.inner_newton,
            grad_tol=self.grad_tol,
            line_search=self.line_search,
        )


class ApdagdConfig(BaseModel):
    """Adaptive primal-dual accelerated gradient configuration."""
    max_iter: int = Field(500, ge=1)
    max_doublings: int = Field(60, ge=1)
    l0: float = Field(1.0, gt=0.0)
    grad_tol: float = Field(0.0, ge=0.0)


class EtaSchedule(BaseModel):
    """Geometric warm-start schedule of regularization strengths."""
    eta0: float = Field(12.5, gt=0.0)
    eta_target: float = Field(..., gt=0.0)
    iters_per_level: int = Field(5, ge=1)

    @property
    def n_levels(self) -> int:
        if self.eta_target <= self.eta0:
            return 0
        return math.ceil(math.log2(self.eta_target / self.eta0))

    @property
    def levels(self) -> List[float]:
        return [self.eta0 * 2.0 ** level for level in range(self.n_levels)]


class AppConfig(BaseModel):
    """Process-level settings; none of them changes a numeric result."""
    log_level: str = "INFO"
    log_file: Optional[str] = None
    debug: bool = False

    @model_validator(mode="after")
    def _debug_level(self) -> "AppConfig":
        if self.debug:
            self.log_level = "DEBUG"
        return self


def default_rho(n: int, d: int) -> float:
    """Five times the basic-solution support bound, as a fraction of n^2."""
    return min(1.0, 5.0 * (2 * n - 1 + n * d) / float(n * n))


def load_config() -> AppConfig:
    """
    Load application configuration from environment variables.

    Returns:
        AppConfig object with all configuration values
    """
    load_dotenv()

    log_file = os.getenv("MOTSOLVE_LOG_FILE", "").strip() or None

    return AppConfig(
        log_level=os.getenv("MOTSOLVE_LOG_LEVEL", "INFO").upper(),
        log_file=log_file,
        debug=os.getenv("MOTSOLVE_DEBUG", "").lower() in ("true", "1", "yes"),
    )
