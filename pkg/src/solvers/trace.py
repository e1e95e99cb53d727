"""Per-iteration convergence records."""

import time
from typing import Iterator, List, NamedTuple, Optional

import numpy as np

from src.core.exceptions import PotentialOverflow


class TraceRecord(NamedTuple):
    iteration: int
    stage: str
    objective: float
    grad_inf: float
    l1_to_ref: Optional[float]
    wall_ms: float


class ConvergenceTrace:
    """
    Ordered iteration records shared by every stage of a run.

    Iteration indices keep counting across stages, so a warm-up followed by a
    Newton stage yields one strictly increasing sequence.
    """

    def __init__(self, reference: Optional[np.ndarray] = None):
        """
        Args:
            reference: optional reference plan; when set, each record carries ||P - reference||_1
        """
        self.reference = reference
        self.records: List[TraceRecord] = []
        self._started = time.perf_counter()

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    @property
    def last(self) -> Optional[TraceRecord]:
        return self.records[-1] if self.records else None

    def next_iteration(self) -> int:
        return self.records[-1].iteration + 1 if self.records else 1

    def stage_count(self, stage: str) -> int:
        return sum(1 for record in self.records if record.stage == stage)

    def record(self, stage: str, potential, z: np.ndarray, grad: Optional[np.ndarray] = None) -> TraceRecord:
        """Append a record for the dual point z."""
        if grad is None:
            grad = potential.gradient(z)
        l1 = None
        if self.reference is not None:
            try:
                l1 = float(np.abs(potential.plan(z) - self.reference).sum())
            except PotentialOverflow:
                l1 = float("inf")
        entry = TraceRecord(
            iteration=self.next_iteration(),
            stage=stage,
            objective=potential.value(z),
            grad_inf=float(np.max(np.abs(grad))),
            l1_to_ref=l1,
            wall_ms=(time.perf_counter() - self._started) * 1000.0,
        )
        self.records.append(entry)
        return entry

    def objectives(self) -> np.ndarray:
        return np.array([record.objective for record in self.records])
