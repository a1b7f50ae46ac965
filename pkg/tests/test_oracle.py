"""Tests for the exact-minimum oracles."""

import numpy as np
import pytest

from blockra import (
    brute_force_minimum,
    haus_integer_matrix,
    haus_integer_minimum,
    make_zero_sum_normal_matrix,
    sample_variance,
)


@pytest.mark.parametrize("shape", [(3, 3), (4, 3), (5, 3), (4, 4), (5, 4)])
def test_brute_force_matches_closed_form_on_integer_columns(shape):
    m, n = shape
    res = brute_force_minimum(haus_integer_matrix(m, n))
    closed, low_sum, count_lo = haus_integer_minimum(m, n)
    assert res.min_variance == pytest.approx(closed, abs=1e-12)
    sums = np.rint(res.argmin_matrix.values.sum(axis=1)).astype(int)
    assert int(np.sum(sums == low_sum)) == count_lo
    assert set(sums) <= {low_sum, low_sum + 1}


def test_closed_form_zero_when_mean_integer():
    v, low, count = haus_integer_minimum(3, 4)
    assert v == 0.0
    assert low == 4 * 3 * 4 // 2 // 3
    assert count == 3


def test_brute_force_reaches_zero_on_mixable_margins(local_min_4x4):
    res = brute_force_minimum(local_min_4x4)
    assert res.min_variance == pytest.approx(0.0, abs=1e-12)
    assert res.arrangements_scanned == 24 * 24


def test_brute_force_preserves_margins(uniform_8x3):
    X = np.asarray(uniform_8x3, dtype=float)[:5, :]
    res = brute_force_minimum(X)
    assert np.array_equal(
        np.sort(res.argmin_matrix.values, axis=0), np.sort(X, axis=0)
    )
    assert res.min_variance == pytest.approx(
        sample_variance(res.argmin_matrix.values.sum(axis=1))
    )


def test_brute_force_two_column_case():
    X = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])
    res = brute_force_minimum(X)
    # countermonotone pairing is optimal for two columns
    assert res.arrangements_scanned == 1
    expect = sample_variance(np.array([31.0, 22.0, 13.0]))
    assert res.min_variance == pytest.approx(expect)


def test_brute_force_budget_guard():
    X = np.zeros((9, 4))
    with pytest.raises(ValueError, match="budget"):
        brute_force_minimum(X)
    # explicit budgets move the cutoff
    with pytest.raises(ValueError):
        brute_force_minimum(np.zeros((4, 4)), max_arrangements=500)


def test_brute_force_shape_guard():
    with pytest.raises(ValueError):
        brute_force_minimum(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        brute_force_minimum(np.zeros((3, 1)))


def test_zero_sum_matrix_construction():
    X = make_zero_sum_normal_matrix(100, 4, rng_seed=2)
    assert X.values.shape == (100, 4)
    assert np.abs(X.values.sum(axis=1)).max() < 1e-12
    # per-entry variance stays near one after the demeaning correction
    assert X.values.var() == pytest.approx(1.0, abs=0.15)


def test_zero_sum_matrix_deterministic():
    a = make_zero_sum_normal_matrix(20, 5, rng_seed=9)
    b = make_zero_sum_normal_matrix(20, 5, rng_seed=9)
    assert np.array_equal(a.values, b.values)
