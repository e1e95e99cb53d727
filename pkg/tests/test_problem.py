"""Tests for problem construction and validation."""

import numpy as np
import pytest

from src.core.exceptions import InvalidWeight, SizeMismatch
from src.core.problem import (
    MotProblem,
    QuantizedDistribution,
    SmotProblem,
    build_balance,
    build_mot,
    build_option_pricing,
    build_ranking,
    ideal_dcg,
    l1_cost,
    smoothed_uniform_cdf,
)


def _uniform(n):
    return np.full(n, 1.0 / n)


def test_vector_constraints_become_columns():
    """One-dimensional V and W are stored as n x 1 matrices."""
    prob = SmotProblem(C=np.zeros((2, 2)), r=_uniform(2), c=_uniform(2), V=[0.0, 1.0], W=[0.1, 0.2], eta=1.0)
    assert prob.V.shape == (2, 1)
    assert prob.W.shape == (2, 1)
    assert prob.n == 2
    assert prob.d == 1


def test_arrays_are_read_only():
    prob = SmotProblem(C=np.zeros((2, 2)), r=_uniform(2), c=_uniform(2), V=[0.0, 1.0], W=[0.0, 0.0], eta=1.0)
    with pytest.raises(ValueError):
        prob.C[0, 0] = 1.0


def test_size_mismatch():
    with pytest.raises(SizeMismatch):
        SmotProblem(C=np.zeros((2, 3)), r=_uniform(2), c=_uniform(2), V=[0.0, 1.0], W=[0.0, 0.0], eta=1.0)
    with pytest.raises(SizeMismatch):
        SmotProblem(C=np.zeros((2, 2)), r=_uniform(2), c=_uniform(2), V=[0.0, 1.0, 2.0], W=[0.0, 0.0], eta=1.0)


@pytest.mark.parametrize("r", [[0.5, 0.6], [1.5, -0.5], [1.0, 0.0]])
def test_invalid_weights(r):
    """Marginals must be positive and sum to one."""
    with pytest.raises(InvalidWeight):
        SmotProblem(C=np.zeros((2, 2)), r=np.array(r), c=_uniform(2), V=[0.0, 1.0], W=[0.0, 0.0], eta=1.0)


def test_invalid_eta_and_epsilon():
    with pytest.raises(ValueError):
        SmotProblem(C=np.zeros((2, 2)), r=_uniform(2), c=_uniform(2), V=[0.0, 1.0], W=[0.0, 0.0], eta=0.0)
    with pytest.raises(ValueError):
        MotProblem(C=np.zeros((2, 2)), r=_uniform(2), c=_uniform(2), V=[0.0, 1.0], W=[0.0, 0.0], eta=1.0, epsilon=-0.1)


def test_with_eta_keeps_type(small_mot):
    moved = small_mot.with_eta(40.0)
    assert isinstance(moved, MotProblem)
    assert moved.eta == 40.0
    assert moved.epsilon == small_mot.epsilon
    assert small_mot.eta == 5.0


def test_build_mot():
    """Costs come from the cost function and W holds r_i * w_i."""
    source = QuantizedDistribution(points=[0.0, 1.0], weights=[0.5, 0.5])
    target = QuantizedDistribution(points=[0.5, 2.0], weights=[0.25, 0.75])
    prob = build_mot(source, target, l1_cost, epsilon=0.1, eta=3.0)
    assert prob.C.tolist() == [[0.5, 2.0], [0.5, 1.0]]
    assert prob.W.ravel().tolist() == [0.0, 0.5]
    assert prob.V.ravel().tolist() == [0.5, 2.0]
    assert prob.epsilon == 0.1


def test_build_mot_size_mismatch():
    source = QuantizedDistribution(points=[0.0, 1.0], weights=[0.5, 0.5])
    target = QuantizedDistribution(points=[0.0, 1.0, 2.0], weights=[0.25, 0.25, 0.5])
    with pytest.raises(SizeMismatch):
        build_mot(source, target, l1_cost, epsilon=0.1, eta=1.0)


def test_smoothed_uniform_cdf():
    """The smoothed law is symmetric about 1/2 and close to uniform inside [0, 1]."""
    assert smoothed_uniform_cdf(0.5, 1e-2) == pytest.approx(0.5, abs=1e-12)
    assert smoothed_uniform_cdf(0.3, 1e-2) == pytest.approx(0.3, abs=1e-9)
    assert smoothed_uniform_cdf(-1.0, 1e-2) == pytest.approx(0.0, abs=1e-12)
    assert smoothed_uniform_cdf(2.0, 1e-2) == pytest.approx(1.0, abs=1e-12)


def test_build_option_pricing():
    prob = build_option_pricing(10, eta=100.0)
    assert prob.epsilon == pytest.approx(0.2)
    assert prob.r == pytest.approx(np.full(10, 0.1))
    w = (np.arange(1, 11) - 0.5) / 10
    v = prob.V.ravel()
    assert prob.W.ravel() == pytest.approx(0.1 * w)
    assert np.all(np.diff(v) > 0)
    assert v.mean() == pytest.approx(0.5, abs=1e-9)
    assert prob.C == pytest.approx(np.abs(w[:, None] - v[None, :]))
    assert [smoothed_uniform_cdf(t, 1e-2) for t in v] == pytest.approx(w, abs=1e-9)


def test_build_balance():
    """The uniform plan meets the balance constraint exactly."""
    prob = build_balance(10, size_a=3, size_b=3, epsilon=0.1, eta=50.0, seed=1)
    v = prob.V.ravel()
    assert v[:3] == pytest.approx(np.full(3, 10 / 3))
    assert v[3:6] == pytest.approx(np.full(3, -10 / 3))
    assert np.all(v[6:] == 0.0)
    assert np.all(prob.W == 0.0)
    P = np.full((10, 10), 0.01)
    assert np.abs(P @ prob.V - prob.W).sum() == pytest.approx(0.0, abs=1e-12)


def test_build_balance_is_seeded():
    a = build_balance(8, size_a=2, size_b=2, seed=3)
    b = build_balance(8, size_a=2, size_b=2, seed=3)
    assert np.array_equal(a.C, b.C)


def test_build_balance_groups_must_fit():
    with pytest.raises(ValueError):
        build_balance(4, size_a=3, size_b=3)


def test_build_ranking():
    """Costs are negated normalized DCG gains and the top positions need utility w_top."""
    scores = np.array([0.2, 0.9, 0.5, 0.1])
    utilities = np.array([0.1, 0.4, 0.7, 1.0])
    prob = build_ranking(4, k_top=2, w_top=0.3, eta=10.0, scores=scores, utilities=utilities)
    alpha = 1.0 / ideal_dcg(scores)
    assert prob.C[0] == pytest.approx(-alpha * scores)
    assert prob.C[2] == pytest.approx(-alpha * scores / 2.0)
    assert prob.W.ravel() == pytest.approx([0.075, 0.075, 0.0, 0.0])
    assert prob.V.ravel() == pytest.approx(utilities)


def test_ideal_dcg():
    assert ideal_dcg(np.array([1.0, 3.0])) == pytest.approx(3.0 + 1.0 / np.log2(3.0))
