"""Run summaries, trace files and the expected-position report."""

from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel

from src.core.exceptions import ZeroColumn
from src.solvers.trace import ConvergenceTrace
from src.utils.io_utils import atomic_write_text, format_float

TRACE_COLUMNS = ("iter", "stage", "objective", "grad_inf", "l1_to_ref", "wall_ms")


class RunSummary(BaseModel):
    """Final state of one solve."""
    solver: str
    problem: str
    n: int
    d: int
    eta: float
    epsilon: Optional[float] = None
    seed: Optional[int] = None
    status: str
    objective: float
    grad_inf: float
    row_error: float
    col_error: float
    violation: float
    feasible: bool = False
    transport_cost: float
    duality_gap: float
    iterations: Dict[str, int]
    l1_to_ref: Optional[float] = None
    warm_start_ms: float = 0.0
    solve_ms: float = 0.0


def expected_positions(P: np.ndarray) -> np.ndarray:
    """
    Expected position of every column under the plan: sum_k P_kj * k / sum_k P_kj, k = 1..n.

    Raises:
        ZeroColumn: a column carries no mass
    """
    P = np.asarray(P, dtype=float)
    mass = P.sum(axis=0)
    empty = np.flatnonzero(mass <= 0.0)
    if empty.size:
        raise ZeroColumn(f"Column {int(empty[0])} of the plan has no mass")
    positions = np.arange(1, P.shape[0] + 1, dtype=float)
    return (positions @ P) / mass


def format_trace(trace: ConvergenceTrace, timings: bool = False) -> str:
    """
    Header-free comma-separated rows: iter, stage, objective, grad_inf, l1_to_ref, wall_ms.

    Without timings the wall-clock column is written as 0 so files are reproducible.
    """
    lines: List[str] = []
    for record in trace:
        l1 = "nan" if record.l1_to_ref is None else format_float(record.l1_to_ref)
        wall = format_float(record.wall_ms) if timings else "0"
        lines.append(",".join([
            str(record.iteration),
            record.stage,
            format_float(record.objective),
            format_float(record.grad_inf),
            l1,
            wall,
        ]))
    return "\n".join(lines) + ("\n" if lines else "")


def write_trace(path: Union[str, Path], trace: ConvergenceTrace, timings: bool = False) -> None:
    atomic_write_text(path, format_trace(trace, timings))


def write_summary(path: Union[str, Path], summary: RunSummary) -> None:
    atomic_write_text(path, summary.model_dump_json(indent=2) + "\n")


def write_vector(path: Union[str, Path], values: np.ndarray) -> None:
    atomic_write_text(path, "".join(format_float(v) + "\n" for v in np.asarray(values).ravel()))


def write_table(path: Union[str, Path], rows: List[tuple]) -> None:
    """Comma-separated rows of floats, no header."""
    atomic_write_text(path, "".join(",".join(format_float(v) for v in row) + "\n" for row in rows))


class DecaySummary(BaseModel):
    """Fit of log ||P_eta - P*||_1 against eta."""
    n: int
    seed: int
    epsilon: float
    etas: List[float]
    gaps: List[float]
    slope: float
    intercept: float
    r_squared: float
    decreasing: bool
