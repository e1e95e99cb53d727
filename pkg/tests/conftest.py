"""Shared problem fixtures."""

import numpy as np
import pytest

from src.core.problem import MotProblem, SmotProblem


@pytest.fixture
def small_mot():
    """Three-site martingale instance whose marginals are in convex order."""
    r = np.array([0.25, 0.5, 0.25])
    w = np.array([0.25, 0.5, 0.75])
    v = np.array([0.0, 0.5, 1.0])
    C = np.abs(w[:, None] - v[None, :])
    return MotProblem(C=C, r=r, c=r.copy(), V=v, W=r * w, eta=5.0, epsilon=0.05)


@pytest.fixture
def small_smot():
    """Three-site super-martingale instance with a strictly feasible plan."""
    r = np.array([0.25, 0.5, 0.25])
    c = np.array([0.5, 0.25, 0.25])
    v = np.array([1.0, 0.5, 0.0])
    C = np.array([[0.3, 0.1, 0.7], [0.2, 0.9, 0.4], [0.6, 0.5, 0.1]])
    return SmotProblem(C=C, r=r, c=c, V=v, W=r * 0.3, eta=4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
