"""Tests for the distance statistics and acceptance thresholds."""

import math

import numpy as np
import pytest
from scipy import special, stats

from blockra import (
    TargetDistribution,
    Thresholds,
    default_thresholds,
    kolmogorov_asymptotic_cdf,
    ks_distance,
    normal_quantile,
    median_threshold,
    verdict,
    w2_distance,
)


def _midpoint_sample(target, m):
    return np.asarray(target.quantile((np.arange(m) + 0.5) / m))


def test_normal_quantile_matches_reference():
    p = np.concatenate([
        np.array([1e-12, 1e-9, 1e-4, 0.02425, 0.5, 0.97575, 1 - 1e-4]),
        np.linspace(0.001, 0.999, 997),
    ])
    ours = normal_quantile(p)
    ref = special.ndtri(p)
    assert np.max(np.abs(special.ndtr(ours) - p)) < 1e-9
    assert np.max(np.abs(ours - ref)) < 1e-7
    assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-15)


def test_ks_near_floor_on_midpoint_sample():
    target = TargetDistribution.normal()
    m = 10_000
    xs = _midpoint_sample(target, m)
    # perfect placement leaves only the half-step discretization gap
    assert ks_distance(xs, target) == pytest.approx(0.5 / m, rel=1e-6)


def test_ks_detects_location_shift():
    target = TargetDistribution.normal()
    xs = _midpoint_sample(target, 100_000) + 0.1
    # sup_x |Phi(x - 0.1) - Phi(x)| = 2 Phi(0.05) - 1
    expect = 2.0 * stats.norm.cdf(0.05) - 1.0
    assert expect == pytest.approx(0.0399, abs=1e-4)
    assert ks_distance(xs, target) == pytest.approx(expect, abs=2e-4)


def test_ks_agrees_with_scipy():
    rng = np.random.default_rng(8)
    xs = rng.normal(size=4000)
    ours = ks_distance(xs, TargetDistribution.normal())
    ref = stats.kstest(xs, "norm").statistic
    assert ours == pytest.approx(ref, abs=1e-12)


def test_w2_zero_on_own_quantiles_and_shift_scaling():
    target = TargetDistribution.uniform(-1.0, 1.0)
    m = 50_000
    xs = _midpoint_sample(target, m)
    assert w2_distance(xs, target) == pytest.approx(0.0, abs=1e-9)
    # constant shift c integrates to c^2
    assert w2_distance(xs + 0.02, target) == pytest.approx(4e-4, rel=1e-3)


def test_w2_requires_sorted_input():
    with pytest.raises(ValueError):
        w2_distance(np.array([1.0, 0.0]), TargetDistribution.normal())


def test_kolmogorov_cdf_reference_points():
    # median of the limit law sits at 0.82757
    assert kolmogorov_asymptotic_cdf(0.82757) == pytest.approx(0.5, abs=1e-4)
    assert kolmogorov_asymptotic_cdf(3.0) == pytest.approx(1.0, abs=1e-7)
    assert kolmogorov_asymptotic_cdf(0.0) == 0.0
    ts = np.linspace(0.01, 3.0, 200)
    vals = [kolmogorov_asymptotic_cdf(t) for t in ts]
    # left tail is cancellation-limited around 1e-16, hence the epsilon
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    assert kolmogorov_asymptotic_cdf(1.0) == pytest.approx(
        stats.kstwobign.cdf(1.0), abs=1e-12
    )


def test_threshold_constants_at_calibrated_size():
    normal = default_thresholds(TargetDistribution.normal(), 10**6)
    assert normal.ks == pytest.approx(8.2e-4)
    assert normal.w2 == pytest.approx(3.5e-6)
    # W2 rescales with target variance, KS does not
    wide = default_thresholds(TargetDistribution.normal(0.0, 2.0), 10**6)
    assert wide.ks == normal.ks
    assert wide.w2 == pytest.approx(4.0 * 3.5e-6)
    unif = default_thresholds(TargetDistribution.uniform(-1.0, 1.0), 10**6)
    assert unif.w2 == pytest.approx(4.7e-7)
    unif4 = default_thresholds(TargetDistribution.uniform(-4.0, 4.0), 10**6)
    assert unif4.w2 == pytest.approx(16.0 * 4.7e-7)


def test_asymptotic_ks_threshold_scaling():
    t = default_thresholds(
        TargetDistribution.normal(), 10_000, ks_asymptotic=True, n_replicates=11
    )
    assert t.ks == pytest.approx(0.8276 / math.sqrt(10_000))


def test_median_threshold_brackets_true_median():
    target = TargetDistribution.normal()
    med = median_threshold("ks", target, 400, n_replicates=41, rng_seed=0)
    # asymptotic median 0.8276/sqrt(m) is a good anchor already at m=400
    assert med == pytest.approx(0.8276 / 20.0, rel=0.25)
    with pytest.raises(ValueError):
        median_threshold("cvm", target, 100)
    with pytest.raises(ValueError):
        median_threshold("ks", target, 100, n_replicates=5)


def test_verdict_composition():
    target = TargetDistribution.normal()
    xs = _midpoint_sample(target, 10_000)
    # normal-tail truncation on the evaluation grid leaves ~8.5e-6 of W2
    v = verdict(xs, target, thresholds=Thresholds(ks=1e-3, w2=1e-5))
    assert v.ks_ok and v.w2_ok and v.both_ok
    v_bad = verdict(xs + 0.5, target, thresholds=Thresholds(ks=1e-3, w2=1e-5))
    assert not v_bad.ks_ok and not v_bad.w2_ok and not v_bad.both_ok
    # tuple thresholds accepted; both_ok is the conjunction
    v_mixed = verdict(xs, target, thresholds=(1e-9, 1e6))
    assert (not v_mixed.ks_ok) and v_mixed.w2_ok and not v_mixed.both_ok


def test_empirical_target_roundtrip():
    rng = np.random.default_rng(3)
    pool = rng.normal(size=2000)
    target = TargetDistribution.empirical(pool)
    assert ks_distance(pool, target) <= 1.0 / 2000 + 1e-12
    assert w2_distance(np.sort(pool), target) == pytest.approx(0.0, abs=1e-12)
