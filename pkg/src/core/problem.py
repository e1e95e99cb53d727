"""Problem instances for entropic optimal transport under martingale-type constraints."""

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from loguru import logger
from scipy.optimize import bisect
from scipy.stats import norm

from src.core.exceptions import InvalidWeight, SizeMismatch

MARGINAL_TOL = 1e-12

CostFn = Callable[[np.ndarray, np.ndarray], float]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.flags.writeable = False
    return array


def _check_weights(name: str, weights: np.ndarray) -> None:
    if weights.ndim != 1:
        raise SizeMismatch(f"{name} must be a vector, got shape {weights.shape}")
    if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
        raise InvalidWeight(f"{name} must be positive and finite")
    if abs(float(weights.sum()) - 1.0) > MARGINAL_TOL:
        raise InvalidWeight(f"{name} sums to {weights.sum():.15g}, expected 1")


@dataclass(frozen=True)
class QuantizedDistribution:
    """Point-mass approximation sum_i weights[i] * delta(points[i])."""
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.asarray(self.weights, dtype=float)
        _check_weights("weights", weights)
        if points.shape[0] != weights.shape[0]:
            raise SizeMismatch(f"{points.shape[0]} points but {weights.shape[0]} weights")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class SmotProblem:
    """Entropic OT instance under the super-martingale constraint PV >= W."""
    C: np.ndarray
    r: np.ndarray
    c: np.ndarray
    V: np.ndarray
    W: np.ndarray
    eta: float

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        r = np.asarray(self.r, dtype=float)
        c = np.asarray(self.c, dtype=float)
        V = np.asarray(self.V, dtype=float)
        W = np.asarray(self.W, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        if W.ndim == 1:
            W = W[:, None]
        n = r.shape[0] if r.ndim == 1 else -1
        if C.shape != (n, n) or c.shape != (n,):
            raise SizeMismatch(f"Cost {C.shape} and marginals {r.shape}, {c.shape} disagree")
        if V.shape[0] != n or W.shape != V.shape:
            raise SizeMismatch(f"V {V.shape} and W {W.shape} must both be {n} x d")
        _check_weights("r", r)
        _check_weights("c", c)
        for name, array in (("C", C), ("V", V), ("W", W)):
            if not np.all(np.isfinite(array)):
                raise SizeMismatch(f"{name} holds non-finite entries")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be positive, got {self.eta}")
        for name, array in (("C", C), ("r", r), ("c", c), ("V", V), ("W", W)):
            object.__setattr__(self, name, _frozen(array))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def d(self) -> int:
        return self.V.shape[1]

    def with_eta(self, eta: float):
        return dataclasses.replace(self, eta=eta)


@dataclass(frozen=True)
class MotProblem(SmotProblem):
    """Entropic OT instance under the relaxed martingale constraint ||PV - W||_1 <= epsilon."""
    epsilon: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        object.__setattr__(self, "epsilon", float(self.epsilon))


def l1_cost(w: np.ndarray, v: np.ndarray) -> float:
    return float(np.abs(np.asarray(w) - np.asarray(v)).sum())


def build_mot(
    source: QuantizedDistribution,
    target: QuantizedDistribution,
    cost_fn: CostFn,
    epsilon: float,
    eta: float,
) -> MotProblem:
    """
    Build a martingale problem from quantized source and target laws.

    Args:
        source: quantized source law (points w_i, weights r_i)
        target: quantized target law (points v_j, weights c_j)
        cost_fn: cost h(w_i, v_j)
        epsilon: violation budget
        eta: regularization strength

    Returns:
        MotProblem with C_ij = h(w_i, v_j), V rows v_j, W rows r_i * w_i
    """
    if source.n != target.n:
        raise SizeMismatch(f"Source has {source.n} sites, target has {target.n}")
    if source.points.shape[1] != target.points.shape[1]:
        raise SizeMismatch("Source and target points live in different dimensions")
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")

    C = np.array([[cost_fn(w, v) for v in target.points] for w in source.points], dtype=float)
    W = source.weights[:, None] * source.points
    return MotProblem(
        C=C,
        r=source.weights,
        c=target.weights,
        V=target.points,
        W=W,
        eta=eta,
        epsilon=epsilon,
    )


def smoothed_uniform_cdf(t: float, sigma: float) -> float:
    """Distribution function of U + Y with U ~ Unif[0, 1], Y ~ N(0, sigma^2)."""

    def antiderivative(z: float) -> float:
        return z * norm.cdf(z) + norm.pdf(z)

    return sigma * (antiderivative(t / sigma) - antiderivative((t - 1.0) / sigma))


def build_option_pricing(n: int, epsilon: Optional[float] = None, eta: float = 1200.0, sigma: float = 1e-2) -> MotProblem:
    """
    Option-pricing instance: Unif[0, 1] against its Gaussian smoothing.

    Both laws use equal-mass midpoint quantization, so r = c = 1/n.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    eps = 2.0 / n if epsilon is None else epsilon
    levels = (np.arange(1, n + 1) - 0.5) / n
    w = levels.copy()
    v = np.array([
        bisect(lambda t, p=p: smoothed_uniform_cdf(t, sigma) - p, -10 * sigma, 1.0 + 10 * sigma, xtol=1e-12)
        for p in levels
    ])
    weights = np.full(n, 1.0 / n)
    logger.debug(f"Option pricing instance n={n}, epsilon={eps:g}, eta={eta:g}")
    return build_mot(
        QuantizedDistribution(points=w, weights=weights),
        QuantizedDistribution(points=v, weights=weights),
        l1_cost,
        eps,
        eta,
    )


def build_balance(
    n: int,
    size_a: int = 100,
    size_b: int = 100,
    epsilon: float = 0.1,
    eta: float = 1200.0,
    seed: int = 0,
) -> MotProblem:
    """Random assignment instance under a two-group balance constraint."""
    if size_a < 1 or size_b < 1 or size_a + size_b > n:
        raise ValueError(f"Groups of size {size_a} and {size_b} do not fit in n={n}")
    rng = np.random.default_rng(seed)
    C = rng.uniform(0.0, 1.0, size=(n, n))
    v = np.zeros(n)
    v[:size_a] = n / size_a
    v[size_a:size_a + size_b] = -n / size_b
    weights = np.full(n, 1.0 / n)
    return MotProblem(C=C, r=weights, c=weights, V=v, W=np.zeros(n), eta=eta, epsilon=epsilon)


def ideal_dcg(scores: np.ndarray) -> float:
    ranked = np.sort(np.asarray(scores, dtype=float))[::-1]
    positions = np.arange(1, ranked.size + 1)
    return float(np.sum(ranked / np.log2(1.0 + positions)))


def build_ranking(
    n: int,
    k_top: int = 39,
    w_top: float = 0.3,
    eta: float = 1200.0,
    seed: int = 0,
    scores: Optional[np.ndarray] = None,
    utilities: Optional[np.ndarray] = None,
) -> SmotProblem:
    """
    Stochastic ranking instance under a diversity constraint.

    Rows are positions 1..n, columns are products. Positions 1..k_top require an
    expected utility of at least w_top, i.e. (PV)_i >= r_i * w_top.
    """
    if not 0 <= k_top <= n:
        raise ValueError(f"k_top={k_top} outside 0..{n}")
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, 1.0, size=n) if scores is None else np.asarray(scores, dtype=float)
    v = rng.uniform(0.0, 1.0, size=n) if utilities is None else np.asarray(utilities, dtype=float)
    if s.shape != (n,) or v.shape != (n,):
        raise SizeMismatch("scores and utilities must have length n")

    alpha = 1.0 / ideal_dcg(s)
    positions = np.arange(1, n + 1)
    C = -alpha * s[None, :] / np.log2(1.0 + positions)[:, None]
    r = np.full(n, 1.0 / n)
    w = np.where(positions <= k_top, w_top, 0.0)
    return SmotProblem(C=C, r=r, c=np.full(n, 1.0 / n), V=v, W=r * w, eta=eta)
