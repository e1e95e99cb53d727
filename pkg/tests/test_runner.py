"""Desk-scale reruns of the three experiments through the runner."""

import numpy as np
import pytest

from src.experiments.runner import ExperimentRunner


@pytest.fixture(scope="module")
def runner():
    return ExperimentRunner()


def _assert_solved(summary, l1_tol=1e-8):
    assert summary.status == "converged"
    assert summary.grad_inf <= 1e-10
    assert summary.row_error <= 1e-8
    assert summary.col_error <= 1e-8
    assert summary.feasible
    if summary.l1_to_ref is not None:
        assert summary.l1_to_ref <= l1_tol


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_balance_reaches_reference_within_five_newton_steps(runner, seed):
    """Warm start plus ten Sinkhorn-type iterations leaves five Newton steps enough."""
    outcome = runner.balance(n=40, eta=1200.0, seed=seed, reference=True)
    summary = outcome.summary
    assert summary.iterations["sinkhorn"] <= 10
    assert summary.iterations.get("newton", 0) <= 5
    assert summary.epsilon == 0.1
    _assert_solved(summary)
    assert summary.violation <= 0.1 + 1e-8


def test_option_pricing_reaches_reference(runner):
    outcome = runner.option_pricing(n=30, eta=1200.0, reference=True)
    summary = outcome.summary
    assert summary.epsilon == pytest.approx(2.0 / 30)
    assert summary.iterations.get("newton", 0) <= 10
    _assert_solved(summary)
    assert abs(summary.duality_gap) <= 1e-6
    assert summary.transport_cost > 0.0


def test_option_pricing_bounds_are_ordered(runner):
    lower = runner.option_pricing(n=20, eta=1200.0).summary
    upper = runner.option_pricing(n=20, eta=1200.0, maximize=True).summary
    assert lower.feasible and upper.feasible
    assert upper.transport_cost > lower.transport_cost


def test_ranking_converges_without_warm_start(runner):
    outcome = runner.ranking(n=50, eta=1200.0)
    summary = outcome.summary
    assert summary.solver == "sinkhorn"
    assert summary.iterations["sinkhorn"] <= 30
    _assert_solved(summary)
    positions = np.arange(1, 51) @ outcome.plan / outcome.plan.sum(axis=0)
    assert np.all((positions >= 1.0) & (positions <= 50.0))


def test_apdagd_trails_sparse_newton(runner):
    """Same warm start and reference; 500 accelerated gradient steps stay further from it."""
    sns = runner.option_pricing(n=30, eta=1200.0, reference=True).summary
    apdagd = runner.option_pricing(n=30, eta=1200.0, reference=True, solver="apdagd", max_iter=500, tol=0.0).summary
    assert apdagd.iterations["apdagd"] == 500
    assert apdagd.l1_to_ref > sns.l1_to_ref
