"""Small-scale LP references for the unregularized MOT and SMOT problems."""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.core.config import EtaSchedule, SnsConfig
from src.core.exceptions import OracleAmbiguity, OracleScaleError
from src.core.problem import MotProblem, SmotProblem
from src.experiments.warm_start import warm_init
from src.potentials.mot_dual import MotPotential
from src.solvers.solver_base import SolveStatus
from src.solvers.sparse_newton import run_sns
from src.verification.simplex import LpStatus, StandardFormSolution, solve_standard_form

MAX_ORACLE_N = 16
MAX_DECAY_N = 8
JITTER = 1e-9
UNIQUENESS_TOL = 1e-7
# reduced-cost tolerance for the jittered re-solves, well below JITTER
JITTER_SOLVE_TOL = 1e-13
DECAY_COST_SCALE = 1.0 / 256.0


@dataclass(frozen=True)
class LpSolution:
    """Optimal vertex of the transport LP; E is the violation slack of the MOT form."""
    P: Optional[np.ndarray]
    E: Optional[np.ndarray]
    objective: float
    status: LpStatus
    certificate: Optional[StandardFormSolution] = None


class DecayPoint(NamedTuple):
    eta: float
    gap: float


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def _marginal_rows(n: int, n_vars: int) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.zeros((n, n_vars))
    cols = np.zeros((n, n_vars))
    for i in range(n):
        rows[i, i * n:(i + 1) * n] = 1.0
        cols[i, i:n * n:n] = 1.0
    return rows, cols


def _constraint_rows(prob: SmotProblem, n_vars: int) -> np.ndarray:
    """Rows of the map P -> PV, one row per (i, k) in row-major order."""
    n, d = prob.n, prob.d
    out = np.zeros((n * d, n_vars))
    for i in range(n):
        for k in range(d):
            out[i * d + k, i * n:(i + 1) * n] = prob.V[:, k]
    return out


def mot_standard_form(prob: MotProblem) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Standard form of min C.P subject to marginals, PV - W - E <= 0, PV - W + E >= 0, 1^T E 1 <= eps.

    Variable order: P (n^2, row-major), E (nd), upper slacks (nd), lower slacks (nd), budget slack.
    """
    n, d = prob.n, prob.d
    nd = n * d
    n_vars = n * n + 3 * nd + 1
    rows, cols = _marginal_rows(n, n_vars)
    pv = _constraint_rows(prob, n_vars)
    e_cols = slice(n * n, n * n + nd)
    upper = pv.copy()
    upper[:, e_cols] = -np.eye(nd)
    upper[:, n * n + nd:n * n + 2 * nd] = np.eye(nd)
    lower = pv.copy()
    lower[:, e_cols] = np.eye(nd)
    lower[:, n * n + 2 * nd:n * n + 3 * nd] = -np.eye(nd)
    budget = np.zeros((1, n_vars))
    budget[0, e_cols] = 1.0
    budget[0, -1] = 1.0

    A = np.vstack([rows, cols, upper, lower, budget])
    w = prob.W.ravel()
    b = np.concatenate([prob.r, prob.c, w, w, [prob.epsilon]])
    cost = np.zeros(n_vars)
    cost[:n * n] = prob.C.ravel()
    return A, b, cost


def smot_standard_form(prob: SmotProblem) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard form of min C.P subject to marginals and PV - S = W. Variable order: P, S."""
    n, d = prob.n, prob.d
    n_vars = n * n + n * d
    rows, cols = _marginal_rows(n, n_vars)
    pv = _constraint_rows(prob, n_vars)
    pv[:, n * n:] = -np.eye(n * d)
    A = np.vstack([rows, cols, pv])
    b = np.concatenate([prob.r, prob.c, prob.W.ravel()])
    cost = np.zeros(n_vars)
    cost[:n * n] = prob.C.ravel()
    return A, b, cost


def _check_scale(prob: SmotProblem, limit: int) -> None:
    if prob.n > limit:
        raise OracleScaleError(f"n={prob.n} exceeds the dense oracle limit of {limit}")


def solve_lp_mot(prob: MotProblem, tol: float = 1e-9) -> LpSolution:
    """Optimal basic solution of the epsilon-relaxed martingale LP."""
    _check_scale(prob, MAX_ORACLE_N)
    n, d = prob.n, prob.d
    result = solve_standard_form(*mot_standard_form(prob), tol=tol)
    if result.status != LpStatus.OPTIMAL:
        logger.info(f"MOT LP at n={n} is {result.status.value}")
        return LpSolution(P=None, E=None, objective=float("nan"), status=result.status, certificate=result)
    P = result.x[:n * n].reshape(n, n)
    E = result.x[n * n:n * n + n * d].reshape(n, d)
    return LpSolution(P=P, E=E, objective=result.objective, status=result.status, certificate=result)


def solve_lp_smot(prob: SmotProblem) -> LpSolution:
    """Optimal basic solution of the super-martingale LP."""
    _check_scale(prob, MAX_ORACLE_N)
    n = prob.n
    result = solve_standard_form(*smot_standard_form(prob))
    if result.status != LpStatus.OPTIMAL:
        logger.info(f"SMOT LP at n={n} is {result.status.value}")
        return LpSolution(P=None, E=None, objective=float("nan"), status=result.status, certificate=result)
    P = result.x[:n * n].reshape(n, n)
    return LpSolution(P=P, E=None, objective=result.objective, status=result.status, certificate=result)


def complementary_slackness(solution: LpSolution) -> Tuple[float, float]:
    """
    Largest |x_j * reduced_j| and most negative reduced cost of the certificate.

    Both are zero (up to rounding) for an optimal primal-dual pair.
    """
    cert = solution.certificate
    if cert is None or cert.status != LpStatus.OPTIMAL:
        raise ValueError("Complementary slackness needs an optimal certificate")
    return float(np.max(np.abs(cert.x * cert.reduced_costs))), float(np.min(cert.reduced_costs))


def assert_unique_optimum(prob: MotProblem, solution: LpSolution, seed: int = 0) -> None:
    """
    Re-solve under two opposite cost jitters of size JITTER and compare the plans.

    Raises:
        OracleAmbiguity: a jittered optimum moves away from the plan found
    """
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=prob.C.shape) * JITTER
    for jitter in (noise, -noise):
        moved = solve_lp_mot(MotProblem(
            C=prob.C + jitter, r=prob.r, c=prob.c, V=prob.V, W=prob.W, eta=prob.eta, epsilon=prob.epsilon,
        ), tol=JITTER_SOLVE_TOL)
        if moved.status != LpStatus.OPTIMAL:
            raise OracleAmbiguity(f"Jittered LP is {moved.status.value}")
        shift = float(np.abs(moved.P - solution.P).sum())
        if shift > UNIQUENESS_TOL:
            raise OracleAmbiguity(f"LP optimum moves by {shift:.3e} under a {JITTER:g} cost jitter")


def entropic_plan(prob: MotProblem, eta: float, grad_tol: float = 1e-12, max_newton: int = 100) -> np.ndarray:
    """Entropic optimal plan at eta via warm start and full Newton (rho = 1)."""
    target = prob.with_eta(eta)
    z0 = warm_init(target, EtaSchedule(eta0=min(12.5, eta), eta_target=eta))
    cfg = SnsConfig(n1=5, n2=max_newton, rho=1.0, grad_tol=grad_tol)
    potential = MotPotential(target)
    result = run_sns(potential, z0, cfg)
    if result.status != SolveStatus.CONVERGED:
        logger.warning(f"Entropic solve at eta={eta:g} ended as {result.status.value}")
    return potential.plan(result.z)


def decay_curve(prob: MotProblem, etas: Sequence[float], seed: int = 0) -> List[DecayPoint]:
    """
    L1 distance between the entropic optimal plan and the LP optimum, for each eta.

    Raises:
        OracleScaleError: n exceeds MAX_DECAY_N
        OracleAmbiguity: the LP optimum is not unique
    """
    _check_scale(prob, MAX_DECAY_N)
    lp = solve_lp_mot(prob)
    if lp.status != LpStatus.OPTIMAL:
        raise OracleAmbiguity(f"LP is {lp.status.value}; no optimum to compare against")
    assert_unique_optimum(prob, lp, seed)

    points = []
    for eta in etas:
        gap = float(np.abs(entropic_plan(prob, eta) - lp.P).sum())
        logger.info(f"eta={eta:g}: ||P_eta - P*||_1 = {gap:.3e}")
        points.append(DecayPoint(eta=float(eta), gap=gap))
    return points


def fit_decay(points: Sequence[DecayPoint]) -> DecayFit:
    """Least-squares line through (eta, log gap)."""
    etas = np.array([p.eta for p in points])
    logs = np.log(np.array([p.gap for p in points]))
    slope, intercept = np.polyfit(etas, logs, 1)
    residual = logs - (slope * etas + intercept)
    spread = float(np.sum((logs - logs.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(residual ** 2)) / spread if spread > 0 else 1.0
    return DecayFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


def decay_instance(
    n: int = 5,
    seed: int = 0,
    epsilon: float = 0.05,
    eta: float = 1.0,
    cost_scale: float = DECAY_COST_SCALE,
) -> MotProblem:
    """
    Small MOT instance whose unique LP optimum is a seeded permutation coupling.

    Site i sends its whole weight r_i to target sigma(i), so c[sigma(i)] = r_i and
    W_i = r_i * v[sigma(i)]; the coupling meets the martingale constraint exactly.
    Costs are cost_scale * (1 off the permutation plus a perturbation in [0, 0.1)).
    Shrinking the costs by cost_scale stretches the eta axis by 1/cost_scale, so a
    grid of large eta still leaves gaps well above rounding.
    """
    rng = np.random.default_rng(seed)
    sigma = rng.permutation(n)
    weights = rng.uniform(0.5, 1.5, size=n)
    weights = weights / weights.sum()
    target = np.empty(n)
    target[sigma] = weights
    points = rng.uniform(0.0, 1.0, size=n)
    matched = np.zeros((n, n))
    matched[np.arange(n), sigma] = 1.0
    C = cost_scale * (1.0 - matched + 0.1 * rng.uniform(0.0, 1.0, size=(n, n)))
    return MotProblem(
        C=C, r=weights, c=target, V=points, W=weights * points[sigma], eta=eta, epsilon=epsilon,
    )


def permutation_optimum(prob: MotProblem) -> np.ndarray:
    """Coupling sending r_i to the cheapest target of row i; the LP optimum of decay_instance."""
    P = np.zeros_like(prob.C)
    P[np.arange(prob.n), np.argmin(prob.C, axis=1)] = prob.r
    return P
