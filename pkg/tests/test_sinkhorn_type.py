"""Tests for Sinkhorn-type alternating maximization."""

import numpy as np
import pytest

from src.core.config import SinkhornConfig
from src.core.exceptions import ColumnUnderflow
from src.potentials import make_potential
from src.solvers.sinkhorn_type import SinkhornSolver, column_scale, inner_block_step, run_sinkhorn
from src.solvers.solver_base import SolveStatus
from src.solvers.trace import ConvergenceTrace


@pytest.fixture(params=["small_mot", "small_smot"])
def problem(request):
    return request.getfixturevalue(request.param)


@pytest.fixture
def z(problem, rng):
    return 0.2 * rng.standard_normal(make_potential(problem).dim)


def test_column_scale_matches_columns(problem, z):
    potential = make_potential(problem)
    scaled = column_scale(problem, z, column_tol=1e-12)
    assert potential.plan(scaled).sum(axis=0) == pytest.approx(problem.c, abs=1e-14)
    changed = np.flatnonzero(scaled != z)
    assert np.all((changed >= potential.n) & (changed < 2 * potential.n))


def test_column_scale_is_idempotent(problem, z):
    once = column_scale(problem, z)
    twice = column_scale(problem, once)
    assert twice == pytest.approx(once, abs=1e-12)


def test_column_scale_maximizes_over_y(problem, z):
    potential = make_potential(problem)
    scaled = column_scale(problem, z)
    assert potential.value(scaled) >= potential.value(z)
    assert potential.gradient(scaled)[potential.y_slice] == pytest.approx(np.zeros(potential.n), abs=1e-14)


def test_column_scale_underflow(small_mot):
    potential = make_potential(small_mot)
    z = potential.zeros()
    z[potential.n] = -200.0
    with pytest.raises(ColumnUnderflow):
        column_scale(small_mot, z)


def test_inner_block_step_increases_objective(problem, z):
    potential = make_potential(problem)
    scaled = column_scale(problem, z)
    step = inner_block_step(problem, scaled)
    assert step.alpha > 0.0
    assert potential.value(step.z) > potential.value(scaled)
    assert np.array_equal(step.z[potential.y_slice], scaled[potential.y_slice])


def test_inner_block_step_reaches_block_optimum(small_smot):
    """Repeated block steps with y held fixed drive the block gradient to zero."""
    potential = make_potential(small_smot)
    z = potential.zeros()
    for _ in range(30):
        z = inner_block_step(potential, z).z
    step = inner_block_step(potential, z)
    assert np.max(np.abs(potential.gradient(step.z)[potential.block_coordinates()])) < 1e-9


def test_run_sinkhorn_is_monotone(problem):
    trace = ConvergenceTrace()
    result = run_sinkhorn(problem, cfg=SinkhornConfig(max_outer=15, grad_tol=0.0), trace=trace)
    assert result.status != SolveStatus.STAGNATED
    assert len(trace) == 15
    assert [record.iteration for record in trace] == list(range(1, 16))
    assert np.all(np.diff(trace.objectives()) >= -1e-12)


def test_run_sinkhorn_converges(problem):
    result = SinkhornSolver(SinkhornConfig(max_outer=500, grad_tol=1e-8)).solve(problem)
    assert result.status == SolveStatus.CONVERGED
    potential = make_potential(problem)
    P = potential.plan(result.z)
    row, col = potential.marginal_errors(P)
    assert row < 1e-7
    assert col < 1e-7


def test_run_sinkhorn_accepts_dual_bundle(small_smot):
    potential = make_potential(small_smot)
    bundle = potential.unpack(potential.zeros())
    result = run_sinkhorn(small_smot, bundle, SinkhornConfig(max_outer=2, grad_tol=0.0))
    assert result.z.shape == (potential.dim,)


def test_site_increments_add_up(problem, z, rng):
    """With y and u fixed the per-site shares sum to the full increment."""
    potential = make_potential(problem)
    step = potential.scale_sites(0.1 * rng.standard_normal(potential.dim), np.ones(potential.n))
    grad = potential.gradient(z)
    shares = potential.site_increments(z, step, grad)
    assert shares.shape == (potential.n,)
    assert shares.sum() == pytest.approx(potential.increment(z, step, grad), abs=1e-12)
    single = potential.scale_sites(step, np.eye(potential.n)[1])
    assert potential.site_increments(z, single, grad)[[0, 2]] == pytest.approx(np.zeros(2), abs=1e-15)


def test_budget_update_maximizes_over_u(small_mot, rng):
    potential = make_potential(small_mot)
    z = 0.2 * rng.standard_normal(potential.dim)
    updated = potential.budget_update(z)
    assert potential.gradient(updated)[potential.budget_index] == pytest.approx(0.0, abs=1e-12)
    assert potential.value(updated) >= potential.value(z)
    assert np.array_equal(np.delete(updated, potential.budget_index), np.delete(z, potential.budget_index))


def test_budget_update_without_budget(small_smot, rng):
    potential = make_potential(small_smot)
    z = rng.standard_normal(potential.dim)
    assert potential.budget_update(z) is z


def test_inner_block_step_recovers_from_a_perturbed_site(small_mot):
    """A site pushed far from its optimum backtracks on its own and the step still ascends."""
    potential = make_potential(small_mot)
    z = column_scale(small_mot, potential.zeros())
    for _ in range(20):
        z = inner_block_step(potential, z).z
    z[0] += 3.0
    z = column_scale(small_mot, z)
    step = inner_block_step(potential, z)
    assert 0.0 < step.alpha <= 1.0
    assert potential.value(step.z) > potential.value(z)
    assert np.array_equal(step.z[potential.y_slice], z[potential.y_slice])
