"""Shared numeric kernels: log-domain reductions, top-k selection, symmetric solves."""

from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.linalg import splu
from scipy.special import logsumexp

from src.core.exceptions import EmptyRow, InvalidK, SingularSystem, PotentialOverflow

# exp(700) is the largest exponential evaluated anywhere in the package
EXP_CEILING = 700.0

REG_LADDER: Tuple[float, ...] = (0.0, 1e-12, 1e-9, 1e-6)
SOLVE_RTOL = 1e-10


class TopK(NamedTuple):
    threshold: float
    mask: np.ndarray


class LinearSolve(NamedTuple):
    x: np.ndarray
    residual: float
    reg: float


def log_sum_exp_rows(log_m: np.ndarray) -> np.ndarray:
    """
    Row-wise log(sum(exp(.))) with per-row max subtraction.

    Args:
        log_m: 2-d array, entries finite or -inf

    Returns:
        Vector r with r_i = log sum_j exp(log_m[i, j])
    """
    log_m = np.atleast_2d(np.asarray(log_m, dtype=float))
    row_max = log_m.max(axis=1)
    empty = np.flatnonzero(np.isneginf(row_max))
    if empty.size:
        raise EmptyRow(int(empty[0]))
    return logsumexp(log_m, axis=1)


def guarded_exp(arg: np.ndarray, term: str) -> np.ndarray:
    """exp(arg), refusing arguments beyond EXP_CEILING."""
    arg = np.asarray(arg, dtype=float)
    if arg.size:
        peak = float(np.max(arg))
        if not np.isfinite(peak) or peak > EXP_CEILING:
            raise PotentialOverflow(term, peak)
    return np.exp(arg)


def guarded_total(arg: np.ndarray, term: str) -> float:
    """sum(exp(arg)) evaluated through logsumexp, refusing overflow."""
    arg = np.asarray(arg, dtype=float)
    if arg.size == 0:
        return 0.0
    total = float(logsumexp(arg))
    if np.isnan(total) or total > EXP_CEILING:
        raise PotentialOverflow(term, total)
    return float(np.exp(total))


def exp_remainder(t: np.ndarray) -> np.ndarray:
    """expm1(t) - t without cancellation for small |t|."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = np.abs(t) < 1e-2
    ts = t[small]
    out[small] = ts * ts * (0.5 + ts * (1.0 / 6.0 + ts * (1.0 / 24.0 + ts * (1.0 / 120.0 + ts / 720.0))))
    tl = t[~small]
    out[~small] = np.expm1(tl) - tl
    return out


def top_k_threshold(m: np.ndarray, k: int) -> TopK:
    """
    Select the k largest entries of a nonnegative matrix.

    Ties are broken by row-major index order, earlier entries kept first.

    Args:
        m: 2-d array
        k: number of entries to keep, 1 <= k <= m.size

    Returns:
        TopK(threshold, mask) where threshold is the smallest kept value
    """
    m = np.asarray(m, dtype=float)
    if not 1 <= k <= m.size:
        raise InvalidK(f"k={k} outside 1..{m.size}")
    flat = m.ravel()
    # stable sort on the negated values keeps row-major order among ties
    order = np.argsort(-flat, kind="stable")[:k]
    mask = np.zeros(flat.size, dtype=bool)
    mask[order] = True
    return TopK(threshold=float(flat[order[-1]]), mask=mask.reshape(m.shape))


def symmetric_from_triplets(
    dim: int,
    rows: Iterable[np.ndarray],
    cols: Iterable[np.ndarray],
    vals: Iterable[np.ndarray],
) -> sp.csc_matrix:
    """
    Assemble a symmetric sparse matrix from triplet blocks.

    Off-diagonal blocks are given once; their transposes are added here.
    Entries on the diagonal (row == col) are taken as given. Duplicates are summed.
    """
    rows = [np.asarray(r, dtype=np.int64).ravel() for r in rows]
    cols = [np.asarray(c, dtype=np.int64).ravel() for c in cols]
    vals = [np.asarray(v, dtype=float).ravel() for v in vals]
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vals) if vals else np.zeros(0)
    off = r != c
    all_r = np.concatenate([r, c[off]])
    all_c = np.concatenate([c, r[off]])
    all_v = np.concatenate([v, v[off]])
    h = sp.coo_matrix((all_v, (all_r, all_c)), shape=(dim, dim)).tocsc()
    h.sum_duplicates()
    h.eliminate_zeros()
    return h


def solve_sym(h: sp.spmatrix, b: np.ndarray, reg: float = 0.0) -> LinearSolve:
    """
    Solve (H - reg*I) x = b for a symmetric sparse H.

    Args:
        h: symmetric sparse matrix
        b: right-hand side
        reg: nonnegative regularization subtracted from the diagonal

    Returns:
        LinearSolve with the solution and its relative infinity-norm residual
    """
    b = np.asarray(b, dtype=float)
    dim = h.shape[0]
    if b.shape != (dim,):
        raise SingularSystem(f"Right-hand side of shape {b.shape} does not match dimension {dim}")
    m = (sp.csc_matrix(h) - reg * sp.identity(dim, format="csc")).tocsc()
    try:
        lu = splu(m)
    except RuntimeError as e:
        raise SingularSystem(f"Factorization failed at reg={reg:g}: {e}") from e

    x = lu.solve(b)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if not np.all(np.isfinite(x)):
        raise SingularSystem(f"Non-finite solution at reg={reg:g}")
    residual = float(np.max(np.abs(m @ x - b))) / scale if b.size else 0.0
    if residual > SOLVE_RTOL:
        # one step of iterative refinement
        x = x + lu.solve(b - m @ x)
        residual = float(np.max(np.abs(m @ x - b))) / scale
    return LinearSolve(x=x, residual=residual, reg=reg)


def solve_with_ladder(h: sp.spmatrix, b: np.ndarray, ladder: Sequence[float] = REG_LADDER) -> LinearSolve:
    """Try solve_sym with increasing regularization until a usable solution appears."""
    last_error = None
    for reg in ladder:
        try:
            result = solve_sym(h, b, reg)
        except SingularSystem as e:
            logger.debug(f"Symmetric solve escalating past reg={reg:g}: {e}")
            last_error = e
            continue
        if result.residual <= SOLVE_RTOL or reg == ladder[-1]:
            return result
        logger.debug(f"Residual {result.residual:.2e} at reg={reg:g}, escalating")
        last_error = SingularSystem(f"Residual {result.residual:.2e} at reg={reg:g}")
    raise SingularSystem(f"Regularization ladder exhausted: {last_error}")
