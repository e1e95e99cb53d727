"""Tests for the numeric kernels."""

import numpy as np
import pytest
import scipy.sparse as sp

from src.core.exceptions import EmptyRow, InvalidK, PotentialOverflow, SingularSystem
from src.core.numerics import (
    exp_remainder,
    guarded_exp,
    guarded_total,
    log_sum_exp_rows,
    solve_sym,
    solve_with_ladder,
    symmetric_from_triplets,
    top_k_threshold,
)


def test_log_sum_exp_rows():
    """Rows reduce to log(sum(exp(.))) and -inf entries drop out."""
    out = log_sum_exp_rows(np.array([[0.0, 0.0], [-np.inf, 3.0]]))
    assert out == pytest.approx([np.log(2.0), 3.0])


def test_log_sum_exp_rows_large_entries():
    """Large exponents do not overflow."""
    out = log_sum_exp_rows(np.array([[1000.0, 1000.0]]))
    assert out[0] == pytest.approx(1000.0 + np.log(2.0))


def test_log_sum_exp_rows_empty_row():
    """A row with only -inf entries is reported by index."""
    with pytest.raises(EmptyRow) as excinfo:
        log_sum_exp_rows(np.array([[0.0, 1.0], [-np.inf, -np.inf]]))
    assert excinfo.value.row == 1


def test_top_k_threshold_tie_break():
    """Equal values are kept in row-major order."""
    m = np.array([[1.0, 3.0], [2.0, 2.0]])
    kept = top_k_threshold(m, 2)
    assert kept.threshold == 2.0
    assert kept.mask.tolist() == [[False, True], [True, False]]


def test_top_k_threshold_keeps_everything():
    m = np.arange(6.0).reshape(2, 3)
    kept = top_k_threshold(m, 6)
    assert kept.mask.all()
    assert kept.threshold == 0.0


@pytest.mark.parametrize("k", [0, 5, -1])
def test_top_k_threshold_invalid_k(k):
    with pytest.raises(InvalidK):
        top_k_threshold(np.ones((2, 2)), k)


def test_guarded_exp():
    """Arguments up to the ceiling pass, anything above raises."""
    assert guarded_exp(np.array([0.0, 700.0]), "plan")[0] == 1.0
    with pytest.raises(PotentialOverflow) as excinfo:
        guarded_exp(np.array([0.0, 701.0]), "plan")
    assert excinfo.value.term == "plan"


def test_guarded_total():
    assert guarded_total(np.zeros(3), "S") == pytest.approx(3.0)
    assert guarded_total(np.zeros(0), "S") == 0.0
    with pytest.raises(PotentialOverflow):
        guarded_total(np.array([699.9, 699.9, 699.9]), "S")


def test_exp_remainder():
    """expm1(t) - t is accurate on both sides of the series cutoff."""
    t = np.array([-1e-8, 1e-5, 5e-3, -0.5, 2.0])
    expected = np.array([4.999999983333333e-17, 5.000016666708333e-11, np.expm1(5e-3) - 5e-3, np.expm1(-0.5) + 0.5, np.expm1(2.0) - 2.0])
    np.testing.assert_allclose(exp_remainder(t), expected, rtol=1e-9)
    assert np.all(exp_remainder(t) >= 0.0)


def test_symmetric_from_triplets():
    """Off-diagonal triplets are mirrored, diagonal ones are kept as given."""
    h = symmetric_from_triplets(2, [np.array([0]), np.array([1])], [np.array([1]), np.array([1])], [np.array([2.0]), np.array([3.0])])
    assert h.toarray().tolist() == [[0.0, 2.0], [2.0, 3.0]]


def test_symmetric_from_triplets_sums_duplicates():
    h = symmetric_from_triplets(2, [np.array([0, 0])], [np.array([0, 0])], [np.array([1.0, 2.0])])
    assert h.toarray()[0, 0] == 3.0


def test_solve_sym():
    """Regularization is subtracted from the diagonal."""
    h = sp.csc_matrix(np.array([[-2.0, 1.0], [1.0, -3.0]]))
    b = np.array([1.0, 2.0])
    solved = solve_sym(h, b)
    assert h @ solved.x == pytest.approx(b)
    assert solved.residual < 1e-12

    shifted = solve_sym(h, b, reg=1.0)
    assert (h.toarray() - np.eye(2)) @ shifted.x == pytest.approx(b)


def test_solve_sym_shape_mismatch():
    with pytest.raises(SingularSystem):
        solve_sym(sp.identity(2, format="csc"), np.ones(3))


def test_solve_with_ladder_regularizes_singular_system():
    """A singular system is solved at the first regularization that factorizes."""
    solved = solve_with_ladder(sp.csc_matrix((2, 2)), np.ones(2))
    assert solved.reg == 1e-12
    assert solved.x == pytest.approx([-1e12, -1e12])


def test_solve_with_ladder_exhausted():
    with pytest.raises(SingularSystem):
        solve_with_ladder(sp.csc_matrix((2, 2)), np.ones(2), ladder=(0.0,))
