"""Core container, ranking, and countermonotone primitives."""

import numpy as np
import pytest

from blockra.matrix import (
    ObjectiveSpec,
    Partition,
    RearrangementMatrix,
    counter_permutation,
    countermonotone_rearrange,
    objective,
    permute_column,
    rank_vector,
    read_matrix_csv,
    row_sums,
    sample_variance,
    write_matrix_csv,
)

from conftest import SIGMA_CM_LOCAL_MIN, COMPLETE_MIX


def test_local_min_row_sums_and_variance(local_min_4x4):
    s = row_sums(local_min_4x4)
    assert np.allclose(s, [-0.2609, -0.0719, 0.1961, 0.1367], atol=1e-12)
    assert sample_variance(s) == pytest.approx(0.04346, abs=1e-4)


def test_complete_mix_variance_zero(complete_mix_4x4):
    assert sample_variance(row_sums(complete_mix_4x4)) == pytest.approx(0.0, abs=1e-12)


def test_row_sums_of_block():
    X = np.arange(12.0).reshape(4, 3)
    assert np.array_equal(row_sums(X, (0, 2)), X[:, 0] + X[:, 2])
    assert np.array_equal(row_sums(X), X.sum(axis=1))


def test_sample_variance_uses_m_minus_one():
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert sample_variance(v) == pytest.approx(np.var(v, ddof=1))


def test_rank_vector_tie_policies():
    assert np.array_equal(rank_vector([3, 1, 3], ties="average"), [2.5, 1.0, 2.5])
    assert np.array_equal(rank_vector([3, 1, 3], ties="stable-first"), [2.0, 1.0, 3.0])


def test_rank_vector_distinct_values_agree():
    v = np.array([0.4, -1.2, 3.3, 0.0])
    assert np.array_equal(rank_vector(v, ties="average"), rank_vector(v, ties="stable-first"))


def test_counter_permutation_opposes_sums():
    rng = np.random.default_rng(7)
    s_pi = rng.normal(size=30)
    s_bar = rng.normal(size=30)
    sigma = counter_permutation(s_pi, s_bar)
    assert sorted(sigma) == list(range(30))
    # pairing is countermonotone: largest target gets smallest block sum
    order = np.argsort(s_pi)
    assert np.all(np.diff(s_bar[sigma][order]) <= 0)
    assert sample_variance(s_pi + s_bar[sigma]) <= sample_variance(s_pi + s_bar) + 1e-15


def test_counter_permutation_tied_targets_keep_current_order():
    # Two tied targets: the block values they already hold stay in relative order.
    sigma = counter_permutation(np.array([1.0, 1.0, 0.0]), np.array([5.0, 7.0, 6.0]))
    assert np.array_equal(sigma, [0, 2, 1])


def test_counter_permutation_all_tied_is_identity():
    sigma = counter_permutation(np.zeros(4), np.array([3.0, 1.0, 2.0, 0.0]))
    assert np.array_equal(sigma, np.arange(4))


def test_countermonotone_rearrange_never_increases_variance(ra_stuck_4x4):
    before = sample_variance(row_sums(ra_stuck_4x4))
    for mask in range(1, 8):
        pi = Partition.from_mask(mask, 4)
        out = countermonotone_rearrange(ra_stuck_4x4, pi)
        assert sample_variance(row_sums(out.values)) <= before + 1e-12


def test_countermonotone_rearrange_preserves_margins(local_min_4x4):
    pi = Partition.from_mask(0b011, 4)
    out = countermonotone_rearrange(local_min_4x4, pi)
    for j in range(4):
        assert np.array_equal(np.sort(out.values[:, j]), np.sort(local_min_4x4[:, j]))


def test_permute_column_rejects_non_permutation():
    X = np.ones((3, 2))
    with pytest.raises(ValueError):
        permute_column(X, 0, [0, 0, 2])
    with pytest.raises(ValueError):
        permute_column(X, 5, [0, 1, 2])


def test_matrix_validates_shape():
    with pytest.raises(ValueError):
        RearrangementMatrix(np.ones(3))
    with pytest.raises(ValueError):
        RearrangementMatrix(np.array([[np.nan, 1.0], [0.0, 2.0]]))


def test_csv_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(6, 4)) * np.pi
    path = tmp_path / "mat.csv"
    write_matrix_csv(X, path)
    back = read_matrix_csv(path)
    assert np.array_equal(back.values, X)
    assert open(path).readline().count(",") == 3  # no header row


def test_objective_variance_and_expected_convex(local_min_4x4):
    s = row_sums(local_min_4x4)
    assert objective(local_min_4x4) == pytest.approx(sample_variance(s))
    spec = ObjectiveSpec.expected_convex(np.square)
    assert objective(local_min_4x4, spec) == pytest.approx(np.mean(s**2))
    with pytest.raises(ValueError):
        ObjectiveSpec(kind="expected-convex")


def test_partition_complement_and_mask():
    pi = Partition.from_mask(0b101, 4)
    assert tuple(pi.pi) == (0, 2)
    assert tuple(pi.complement()) == (1, 3)


def test_shared_margins_fixtures_agree():
    for j in range(4):
        assert np.array_equal(
            np.sort(SIGMA_CM_LOCAL_MIN[:, j]), np.sort(COMPLETE_MIX[:, j])
        )
