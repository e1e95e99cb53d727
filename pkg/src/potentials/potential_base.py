"""Base class for the concave dual potentials of entropic MOT and SMOT."""

import math
from abc import ABC, abstractmethod
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from src.core.exceptions import PotentialOverflow, SizeMismatch
from src.core.numerics import (
    EXP_CEILING,
    exp_remainder,
    guarded_exp,
    guarded_total,
    symmetric_from_triplets,
    top_k_threshold,
)
from src.core.problem import SmotProblem


class SlackFamily(NamedTuple):
    """
    One exponential slack term -(1/eta) * sum exp(eta * (sum_b s_b * G_b + t * u) - 1).

    ``block_signs`` holds s_b for every constraint block G_b, ``budget_sign`` holds t.
    A scalar family depends on u alone and contributes a single exponential.
    """
    name: str
    block_signs: Tuple[float, ...]
    budget_sign: float = 0.0
    scalar: bool = False


class SplitDual(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    blocks: List[np.ndarray]
    u: float


def retained_count(n: int, rho: float) -> int:
    """Number of plan entries kept by the sparsified Hessian, ceil(rho * n^2)."""
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    return min(n * n, max(1, math.ceil(rho * n * n)))


class DualPotential(ABC):
    """
    Concave dual potential over the flat variable (x, y, G_1 columns, ..., G_m columns, [u]).

    The plan term is shared: log P = eta * (-C + (sum_b G_b) V^T + x 1^T + 1 y^T) - 1.
    Subclasses declare their constraint blocks and slack families; value, gradient,
    Hessian and ascent increments are derived from those declarations.
    """

    def __init__(self, problem: SmotProblem, name: str, description: str):
        """
        Initialize the potential.

        Args:
            problem: the problem instance the potential belongs to
            name: short identifier used in logs and summaries
            description: one-line description of the potential
        """
        self.problem = problem
        self.name = name
        self.description = description
        self.n = problem.n
        self.d = problem.d
        self.eta = problem.eta

    @property
    @abstractmethod
    def n_blocks(self) -> int:
        """Number of n x d constraint blocks coupled to the plan."""
        pass

    @property
    @abstractmethod
    def families(self) -> Tuple[SlackFamily, ...]:
        """Slack exponential families of the potential."""
        pass

    @property
    def budget(self) -> Optional[float]:
        """Violation budget multiplying u, or None when the potential has no u."""
        return None

    @abstractmethod
    def recover(self, z: np.ndarray):
        """Primal variables attached to the dual point z."""
        pass

    @abstractmethod
    def with_eta(self, eta: float) -> "DualPotential":
        pass

    # Layout

    @property
    def has_budget(self) -> bool:
        return self.budget is not None

    @property
    def dim(self) -> int:
        return 2 * self.n + self.n_blocks * self.n * self.d + (1 if self.has_budget else 0)

    @property
    def y_slice(self) -> slice:
        return slice(self.n, 2 * self.n)

    @property
    def gauge_index(self) -> int:
        """Coordinate held fixed when solving full Newton systems (the last y entry)."""
        return 2 * self.n - 1

    @property
    def budget_index(self) -> Optional[int]:
        return self.dim - 1 if self.has_budget else None

    def block_index(self, b: int) -> np.ndarray:
        """n x d array of flat indices of block b; entry (i, k) sits at offset k*n + i."""
        start = 2 * self.n + b * self.n * self.d
        return start + np.arange(self.n * self.d).reshape(self.d, self.n).T

    def block_coordinates(self) -> np.ndarray:
        """Flat indices of every variable except y, in increasing order."""
        keep = np.ones(self.dim, dtype=bool)
        keep[self.y_slice] = False
        return np.flatnonzero(keep)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dim)

    def split(self, z: np.ndarray) -> SplitDual:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise SizeMismatch(f"Dual vector of shape {z.shape}, expected ({self.dim},)")
        n, d = self.n, self.d
        blocks = []
        for b in range(self.n_blocks):
            start = 2 * n + b * n * d
            blocks.append(z[start:start + n * d].reshape(d, n).T)
        u = float(z[-1]) if self.has_budget else 0.0
        return SplitDual(x=z[:n], y=z[n:2 * n], blocks=blocks, u=u)

    def join(self, x: np.ndarray, y: np.ndarray, blocks: List[np.ndarray], u: float = 0.0) -> np.ndarray:
        if len(blocks) != self.n_blocks:
            raise SizeMismatch(f"Expected {self.n_blocks} constraint blocks, got {len(blocks)}")
        parts = [np.asarray(x, dtype=float).ravel(), np.asarray(y, dtype=float).ravel()]
        for block in blocks:
            block = np.asarray(block, dtype=float).reshape(self.n, self.d)
            parts.append(block.T.ravel())
        if self.has_budget:
            parts.append(np.array([u], dtype=float))
        z = np.concatenate(parts)
        if z.shape != (self.dim,):
            raise SizeMismatch(f"Dual parts assemble to {z.shape}, expected ({self.dim},)")
        return z

    # Exponents

    def _plan_exponent(self, parts: SplitDual, affine: bool) -> np.ndarray:
        coupling = sum(parts.blocks) if parts.blocks else np.zeros((self.n, self.d))
        arg = self.eta * (coupling @ self.problem.V.T + parts.x[:, None] + parts.y[None, :])
        if affine:
            arg = arg - self.eta * self.problem.C - 1.0
        return arg

    def _family_exponent(self, family: SlackFamily, parts: SplitDual, affine: bool) -> np.ndarray:
        if family.scalar:
            arg = np.array([self.eta * family.budget_sign * parts.u])
        else:
            arg = np.zeros((self.n, self.d))
            for sign, block in zip(family.block_signs, parts.blocks):
                if sign:
                    arg = arg + sign * block
            arg = self.eta * (arg + family.budget_sign * parts.u)
        return arg - 1.0 if affine else arg

    def log_plan(self, z: np.ndarray) -> np.ndarray:
        return self._plan_exponent(self.split(z), affine=True)

    def plan(self, z: np.ndarray) -> np.ndarray:
        return guarded_exp(self.log_plan(z), "plan")

    def slacks(self, z: np.ndarray) -> List[np.ndarray]:
        """Exponentials of every slack family, in declaration order."""
        parts = self.split(z)
        return [guarded_exp(self._family_exponent(f, parts, affine=True), f.name) for f in self.families]

    # Value and derivatives

    def value(self, z: np.ndarray) -> float:
        parts = self.split(z)
        prob = self.problem
        linear = float(parts.x @ prob.r + parts.y @ prob.c)
        for block in parts.blocks:
            linear += float(np.sum(block * prob.W))
        if self.has_budget:
            linear += self.budget * parts.u

        total = guarded_total(self._plan_exponent(parts, affine=True), "plan")
        for family in self.families:
            total += guarded_total(self._family_exponent(family, parts, affine=True), family.name)
        return linear - total / self.eta

    def gradient(self, z: np.ndarray) -> np.ndarray:
        parts = self.split(z)
        prob = self.problem
        P = guarded_exp(self._plan_exponent(parts, affine=True), "plan")
        PV = P @ prob.V
        grad_blocks = [prob.W - PV for _ in range(self.n_blocks)]
        grad_u = self.budget if self.has_budget else 0.0

        for family in self.families:
            e = guarded_exp(self._family_exponent(family, parts, affine=True), family.name)
            if not family.scalar:
                for b, sign in enumerate(family.block_signs):
                    if sign:
                        grad_blocks[b] = grad_blocks[b] - sign * e
            grad_u -= family.budget_sign * float(e.sum())

        return self.join(prob.r - P.sum(axis=1), prob.c - P.sum(axis=0), grad_blocks, grad_u)

    def hessian(self, z: np.ndarray, rho: Optional[float] = None, block: bool = False) -> sp.csc_matrix:
        """
        Symmetric sparse Hessian.

        Args:
            z: dual point
            rho: None for the exact Hessian; otherwise the y-x and y-G cross blocks
                are built from the ceil(rho * n^2) largest plan entries only
            block: drop y and return the Hessian restricted to block_coordinates()

        Returns:
            csc matrix of dimension dim (or dim - n with block=True)
        """
        parts = self.split(z)
        n, d, eta = self.n, self.d, self.eta
        V = self.problem.V
        P = guarded_exp(self._plan_exponent(parts, affine=True), "plan")
        index = [self.block_index(b) for b in range(self.n_blocks)]
        xi = np.arange(n)
        yi = n + np.arange(n)

        rows: List[np.ndarray] = [xi]
        cols: List[np.ndarray] = [xi]
        vals: List[np.ndarray] = [-eta * P.sum(axis=1)]

        PV = P @ V
        for b in range(self.n_blocks):
            for k in range(d):
                rows.append(xi)
                cols.append(index[b][:, k])
                vals.append(-eta * PV[:, k])

        for b in range(self.n_blocks):
            for b2 in range(b, self.n_blocks):
                for k in range(d):
                    for k2 in range(k if b2 == b else 0, d):
                        rows.append(index[b][:, k])
                        cols.append(index[b2][:, k2])
                        vals.append(-eta * (P @ (V[:, k] * V[:, k2])))

        if not block:
            if rho is None:
                cross = P
            else:
                kept = top_k_threshold(P, retained_count(n, rho))
                cross = np.where(kept.mask, P, 0.0)
            ii, jj = np.nonzero(cross)
            weights = cross[ii, jj]
            rows += [yi, yi[jj]]
            cols += [yi, xi[ii]]
            vals += [-eta * P.sum(axis=0), -eta * weights]
            for b in range(self.n_blocks):
                for k in range(d):
                    rows.append(yi[jj])
                    cols.append(index[b][ii, k])
                    vals.append(-eta * weights * V[jj, k])

        u_index = self.budget_index
        for family in self.families:
            e = guarded_exp(self._family_exponent(family, parts, affine=True), family.name)
            tau = family.budget_sign
            if tau and u_index is not None:
                rows.append(np.array([u_index]))
                cols.append(np.array([u_index]))
                vals.append(np.array([-eta * tau * tau * float(e.sum())]))
            if family.scalar:
                continue
            for b, sign in enumerate(family.block_signs):
                if not sign:
                    continue
                for b2 in range(b, self.n_blocks):
                    sign2 = family.block_signs[b2]
                    if not sign2:
                        continue
                    for k in range(d):
                        rows.append(index[b][:, k])
                        cols.append(index[b2][:, k])
                        vals.append(-eta * sign * sign2 * e[:, k])
                if tau and u_index is not None:
                    rows.append(index[b].T.ravel())
                    cols.append(np.full(n * d, u_index))
                    vals.append(-eta * sign * tau * e.T.ravel())

        h = symmetric_from_triplets(self.dim, rows, cols, vals)
        if block:
            keep = self.block_coordinates()
            h = h[keep][:, keep].tocsc()
        return h

    # Ascent increments

    def _remainder_total(self, arg: np.ndarray, delta: np.ndarray, term: str) -> float:
        """sum exp(arg) * (expm1(delta) - delta), refusing exponents above EXP_CEILING."""
        moved = arg + delta
        if moved.size:
            peak = float(np.max(moved))
            if not np.isfinite(peak) or peak > EXP_CEILING:
                raise PotentialOverflow(term, peak)
        base = guarded_exp(arg, term)
        small = np.abs(delta) < 1e-2
        total = float(np.sum(base[small] * exp_remainder(delta[small])))
        large = ~small
        total += float(np.sum(np.exp(moved[large]) - base[large] * (1.0 + delta[large])))
        return total

    def increment(self, z: np.ndarray, step: np.ndarray, grad: Optional[np.ndarray] = None) -> float:
        """
        f(z + step) - f(z), free of the cancellation that subtracting two values suffers.

        Every exponential family is affine in z, so the difference splits into the
        first-order term <grad, step> and a nonnegative remainder per family.
        """
        if grad is None:
            grad = self.gradient(z)
        parts = self.split(z)
        moves = self.split(step)
        remainder = self._remainder_total(
            self._plan_exponent(parts, affine=True),
            self._plan_exponent(moves, affine=False),
            "plan",
        )
        for family in self.families:
            remainder += self._remainder_total(
                self._family_exponent(family, parts, affine=True),
                self._family_exponent(family, moves, affine=False),
                family.name,
            )
        return float(np.dot(grad, step)) - remainder / self.eta

    # Site-separable pieces

    def site_dot(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Per-site inner product of two flat vectors over x_i and the block rows G_b[i, :]."""
        pa, pb = self.split(a), self.split(b)
        out = pa.x * pb.x
        for block_a, block_b in zip(pa.blocks, pb.blocks):
            out = out + np.sum(block_a * block_b, axis=1)
        return out

    def scale_sites(self, v: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Site part of v with site i scaled by weights[i]; y and u are zeroed."""
        parts = self.split(v)
        weights = np.asarray(weights, dtype=float)
        blocks = [block * weights[:, None] for block in parts.blocks]
        return self.join(parts.x * weights, np.zeros(self.n), blocks, 0.0)

    def _row_remainders(self, arg: np.ndarray, delta: np.ndarray) -> np.ndarray:
        """Row sums of exp(arg) * (expm1(delta) - delta); rows leaving the exponent range are inf."""
        moved = arg + delta
        out = np.full(arg.shape[0], np.inf)
        ok = np.all(np.isfinite(moved), axis=1) & (moved.max(axis=1, initial=-np.inf) <= EXP_CEILING)
        a, dl = arg[ok], delta[ok]
        base = np.exp(a)
        terms = np.empty_like(a)
        small = np.abs(dl) < 1e-2
        terms[small] = base[small] * exp_remainder(dl[small])
        large = ~small
        terms[large] = np.exp(a[large] + dl[large]) - base[large] * (1.0 + dl[large])
        out[ok] = terms.sum(axis=1)
        return out

    def site_increments(self, z: np.ndarray, step: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """
        Per-site share of f(z + step) - f(z) for a step that leaves y and u unchanged.

        With y and u fixed the potential is a sum of one term per site, so the shares
        add up to the full increment. Sites whose exponentials overflow get -inf.
        """
        parts = self.split(z)
        moves = self.split(step)
        remainder = self._row_remainders(
            self._plan_exponent(parts, affine=True),
            self._plan_exponent(moves, affine=False),
        )
        for family in self.families:
            if family.scalar:
                continue
            remainder = remainder + self._row_remainders(
                self._family_exponent(family, parts, affine=True),
                self._family_exponent(family, moves, affine=False),
            )
        return self.site_dot(grad, step) - remainder / self.eta

    def budget_update(self, z: np.ndarray) -> np.ndarray:
        """
        Maximize exactly in u: u = (log eps - log sum_k exp(a_k)) / eta.

        a_k are the u-free exponents of the families carrying u. A zero budget has
        no maximizer in u and leaves z unchanged.
        """
        if not self.has_budget or self.budget <= 0.0:
            return z
        parts = self.split(z)
        logs = []
        for family in self.families:
            if not family.budget_sign:
                continue
            if family.budget_sign != 1.0:
                raise ValueError(f"Family {family.name} enters u with sign {family.budget_sign}")
            logs.append(self._family_exponent(family, parts, affine=True).ravel() - self.eta * parts.u)
        z = np.array(z, dtype=float, copy=True)
        z[self.budget_index] = (math.log(self.budget) - float(logsumexp(np.concatenate(logs)))) / self.eta
        return z

    # Diagnostics

    def constraint_residual(self, P: np.ndarray) -> np.ndarray:
        """PV - W for a plan P."""
        return P @ self.problem.V - self.problem.W

    def marginal_errors(self, P: np.ndarray) -> Tuple[float, float]:
        """L1 errors of the row and column marginals of P."""
        row = float(np.abs(P.sum(axis=1) - self.problem.r).sum())
        col = float(np.abs(P.sum(axis=0) - self.problem.c).sum())
        return row, col

    @abstractmethod
    def violation(self, P: np.ndarray) -> float:
        """Constraint violation of P: ||PV - W||_1 for MOT, min(PV - W) for SMOT."""
        pass

    @abstractmethod
    def is_feasible(self, P: np.ndarray, tol: float) -> bool:
        pass
