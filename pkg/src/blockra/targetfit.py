"""Fit the dependence of n given margins so their sum matches a target law.

The working object is an m x (n+1) matrix: n margin columns plus one column
holding the negated target quantiles.  Driving the variance of the full row
sums toward zero forces margin-sum order statistics onto the target grid.
Scalable margin families (symmetric uniform, centered normal) additionally
recalibrate a single scale factor at the start of every pass so the margin
sums keep the target's variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algorithms import BlockRaConfig, block_ra2, sample_partitions
from .gof import TargetDistribution, Thresholds, default_thresholds, ks_distance, w2_distance
from .matrix import RearrangementMatrix, _rearrange_block_inplace, sample_variance

__all__ = [
    "MarginSpec",
    "FitConfig",
    "FitReport",
    "SpreadResult",
    "discretize_quantiles",
    "fit_sum_to_target",
    "extend_with_countermonotone_pairs",
    "spread_dependence",
]


@dataclass(frozen=True)
class MarginSpec:
    """Common law of the n margin columns.

    scale is the half-width a for the symmetric uniform family and sigma for
    the centered normal family; empirical margins carry a fixed quantile
    table instead and are never rescaled.
    """

    family: str
    n: int
    scale: float = 1.0
    table: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("need at least two margin columns")
        if self.family in ("uniform-symmetric", "normal"):
            if not self.scale > 0:
                raise ValueError("margin scale must be positive")
        elif self.family == "empirical":
            if self.table is None:
                raise ValueError("empirical margins need a quantile table")
        else:
            raise ValueError(f"unknown margin family: {self.family!r}")

    @classmethod
    def uniform_symmetric(cls, n: int, a: float = 1.5) -> "MarginSpec":
        return cls(family="uniform-symmetric", n=n, scale=float(a))

    @classmethod
    def normal(cls, n: int, sigma: float = 0.4) -> "MarginSpec":
        return cls(family="normal", n=n, scale=float(sigma))

    @classmethod
    def empirical(cls, n: int, quantile_table: Sequence[float]) -> "MarginSpec":
        tab = np.asarray(quantile_table, dtype=np.float64)
        if tab.ndim != 1 or tab.size < 2:
            raise ValueError("quantile table must be a vector of at least 2 values")
        if np.any(np.diff(tab) < 0):
            raise ValueError("quantile table must be nondecreasing")
        tab = tab.copy()
        tab.setflags(write=False)
        return cls(family="empirical", n=n, table=tab)

    @property
    def scalable(self) -> bool:
        return self.family != "empirical"

    def unit_law(self) -> TargetDistribution:
        """The family member at scale 1 (the stored table for empirical)."""
        if self.family == "uniform-symmetric":
            return TargetDistribution.uniform(-1.0, 1.0)
        if self.family == "normal":
            return TargetDistribution.normal(0.0, 1.0)
        return TargetDistribution.empirical(self.table)


@dataclass(frozen=True)
class FitConfig:
    """Fit loop settings.

    One pass = a sweep over n_sim sampled canonical partitions followed by
    scale recalibration.  The loop stops when the achieved row-sum variance
    and the scale both move by less than rel_tol between passes.
    recalibrate=None means automatic: on for scalable families, off for
    empirical margins; an explicit True on empirical margins is an error.
    accelerate_scale applies a clamped geometric-series extrapolation to
    the scale iteration; it changes only how fast the same fixed point is
    reached, and turning it off recovers the literal one-step-per-pass
    recalibration.
    """

    n_sim: Optional[int] = None
    rel_tol: float = 1e-8
    max_passes: int = 500
    rng_seed: int = 0
    grid_points: int = 50_000
    recalibrate: Optional[bool] = None
    accelerate_scale: bool = True

    def __post_init__(self) -> None:
        if self.n_sim is not None and self.n_sim < 1:
            raise ValueError("n_sim must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be positive")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


@dataclass(frozen=True)
class FitReport:
    fitted_scale: float
    final_matrix: RearrangementMatrix
    ks: float
    w2: float
    ks_threshold: float
    w2_threshold: float
    verdict: str
    iterations: int

    def to_dict(self) -> dict:
        return {
            "fitted_scale": self.fitted_scale,
            "ks": self.ks,
            "w2": self.w2,
            "ks_threshold": self.ks_threshold,
            "w2_threshold": self.w2_threshold,
            "verdict": self.verdict,
            "iterations": self.iterations,
        }


def discretize_quantiles(dist: TargetDistribution, m: int) -> np.ndarray:
    """Quantile grid F^{-1}(i/(m+1)), i = 1..m, ascending."""
    if m < 1:
        raise ValueError("m must be positive")
    probs = np.arange(1, m + 1, dtype=np.float64) / (m + 1)
    return np.asarray(dist.quantile(probs), dtype=np.float64).reshape(m)


# Scale-walk acceleration: window length for the geometric-series
# extrapolation, damping on the extrapolated step, and the per-jump
# clamp on the multiplicative step.
_ACCEL_WINDOW = 25
_ACCEL_DAMPING = 0.75
_ACCEL_MAX_LOG_STEP = float(np.log(1.05))


def _fit_move(arr: np.ndarray, pi_cols, comp_cols) -> None:
    """Countermonotone move used inside the fit loop.

    Same map as the shared rearrangement kernel but with plain argsorts:
    where sums tie exactly the order within the tie class is unspecified,
    which cannot change any row-sum variance.  The quantile grids moved
    here make exact ties rare, and the fit's stopping rule looks only at
    the variance and the scale, so the cheaper kernel is safe.
    """
    pi_cols = list(pi_cols)
    comp_cols = list(comp_cols)
    s_pi = arr[:, pi_cols].sum(axis=1) if len(pi_cols) > 1 else arr[:, pi_cols[0]]
    s_bar = arr[:, comp_cols].sum(axis=1) if len(comp_cols) > 1 else arr[:, comp_cols[0]]
    sigma = np.empty(arr.shape[0], dtype=np.intp)
    sigma[np.argsort(s_pi)] = np.argsort(-s_bar)
    arr[:, comp_cols] = arr[np.ix_(sigma, comp_cols)]


def _geometric_limit_factor(scale_log: Sequence[float], window: int) -> float:
    """Extrapolation factor from three consecutive windows of scale values.

    The per-pass recalibration multiplies the scale by ratios whose logs
    decay geometrically as the walk approaches its fixed point, so summing
    the series predicts the limit.  Every scale at or past the fixed point
    is absorbing: a jump that lands beyond it cannot be walked back.  The
    step is therefore gated and damped.  The decay ratio is estimated on
    two overlapping window pairs and a jump happens only when both are
    contractive; the smaller implied step is used, damped, capped by a
    multiple of the growth actually observed in the history (so jumps die
    off as the walk settles), and clamped to a few percent per application.
    """
    s1 = np.log(scale_log[-1] / scale_log[-1 - window])
    s2 = np.log(scale_log[-1 - window] / scale_log[-1 - 2 * window])
    s3 = np.log(scale_log[-1 - 2 * window] / scale_log[-1 - 3 * window])
    if s2 <= 0.0 or s3 <= 0.0:
        return 1.0
    r_new = s1 / s2
    r_old = s2 / s3
    if not (0.0 < r_new < 1.0 and 0.0 < r_old < 1.0):
        return 1.0
    step = _ACCEL_DAMPING * s1 * min(r_new / (1.0 - r_new), r_old / (1.0 - r_old))
    step = min(step, 5.0 * (s1 + s2 + s3), _ACCEL_MAX_LOG_STEP)
    if step <= 0.0:
        return 1.0
    return float(np.exp(step))


def _verdict_label(ks_ok: bool, w2_ok: bool) -> str:
    if ks_ok and w2_ok:
        return "indistinguishable"
    if ks_ok:
        return "ks-only"
    if w2_ok:
        return "w2-only"
    return "neither"


def fit_sum_to_target(margins: MarginSpec, target: TargetDistribution, m: int,
                      config: Optional[FitConfig] = None,
                      thresholds: Optional[Thresholds] = None) -> FitReport:
    """Optimize the joint arrangement of n margins against a target law.

    Builds [margin columns, -(target quantiles)], then alternates scale
    recalibration with partition-sampled countermonotone passes until both
    the variance of the full row sums and the scale settle.  Distances are
    measured between the margin-column row sums and the target.
    """
    cfg = config or FitConfig()
    if m < 2:
        raise ValueError("m must be at least 2")
    recalibrate = cfg.recalibrate
    if recalibrate is None:
        recalibrate = margins.scalable
    elif recalibrate and not margins.scalable:
        raise ValueError("empirical margins have no free scale to recalibrate")
    if margins.family == "empirical" and margins.table.size != m:
        raise ValueError(f"empirical margin table has {margins.table.size} rows, fit needs {m}")

    n = margins.n
    n_cols = n + 1
    rng = np.random.default_rng(cfg.rng_seed)

    unit_grid = discretize_quantiles(margins.unit_law(), m)
    scale = margins.scale if margins.scalable else 1.0
    target_grid = discretize_quantiles(target, m)
    # The recalibration constant aims at the sample variance of the
    # discretized target, not the law's analytic variance.  The sweep can
    # at best couple the margin sums to the target grid, whose variance
    # sits O(1/m) below the analytic value, so aiming at the analytic
    # number leaves the per-pass rescale ratio bounded away from 1 and the
    # scale inflates without an absorbing state.  Against the grid's own
    # variance the settled coupling makes the ratio exactly 1.
    var_target = sample_variance(target_grid)

    arr = np.empty((m, n_cols), dtype=np.float64)
    for j in range(n):
        arr[:, j] = scale * unit_grid
    arr[:, n] = -target_grid

    n_sim = cfg.n_sim if cfg.n_sim is not None else min(512, (1 << (n_cols - 1)) - 1)

    def rebuild_margins() -> None:
        # Each margin column becomes one multiply of the pristine unit grid,
        # killing the drift accumulated by in-place ratio multiplies and
        # making sorted column values exact.
        scaled = scale * unit_grid
        for j in range(n):
            arr[np.argsort(arr[:, j], kind="stable"), j] = scaled

    prev_var = np.inf
    prev_scale = scale
    scale_log: list[float] = [scale]
    next_jump_pass = 3 * _ACCEL_WINDOW
    passes = 0
    for _ in range(cfg.max_passes):
        passes += 1
        for part in sample_partitions(n_cols, n_sim, rng):
            _fit_move(arr, part.pi, part.complement())
        if recalibrate:
            v = sample_variance(arr[:, :n].sum(axis=1))
            if v > 0:
                ratio = float(np.sqrt(var_target / v))
                scale *= ratio
                arr[:, :n] *= ratio
            scale_log.append(scale)
            if (cfg.accelerate_scale and passes >= next_jump_pass
                    and len(scale_log) > 3 * _ACCEL_WINDOW):
                factor = _geometric_limit_factor(scale_log, _ACCEL_WINDOW)
                if factor != 1.0:
                    scale *= factor
                    rebuild_margins()
                    scale_log = [scale]
                    next_jump_pass = passes + 3 * _ACCEL_WINDOW
        var_all = sample_variance(arr.sum(axis=1))
        var_settled = abs(var_all - prev_var) <= max(cfg.rel_tol * prev_var, 1e-18)
        scale_settled = abs(scale - prev_scale) <= max(cfg.rel_tol * abs(prev_scale), 1e-18)
        if var_settled and scale_settled:
            break
        prev_var = var_all
        prev_scale = scale

    if recalibrate:
        rebuild_margins()
    margin_sums = arr[:, :n].sum(axis=1)
    if thresholds is None:
        thresholds = default_thresholds(target, m)
    ks = ks_distance(margin_sums, target, cfg.grid_points)
    w2 = w2_distance(np.sort(margin_sums), target, cfg.grid_points)
    ks_ok = ks <= thresholds.ks
    w2_ok = w2 <= thresholds.w2
    return FitReport(
        fitted_scale=scale,
        final_matrix=RearrangementMatrix(arr),
        ks=ks,
        w2=w2,
        ks_threshold=thresholds.ks,
        w2_threshold=thresholds.w2,
        verdict=_verdict_label(ks_ok, w2_ok),
        iterations=passes,
    )


def extend_with_countermonotone_pairs(X_fit, n_target: int,
                                      rng_seed: int = 0) -> RearrangementMatrix:
    """Widen a fitted matrix to n_target margin columns with zero-sum pairs.

    Appends (n_target - n_base)/2 column pairs (V, -V) sharing one random
    row order, where V carries the base margin's quantile values; each
    pair's row sums vanish identically, so the distribution of the margin
    sums, and hence every fit distance, is unchanged.  The negated-target
    column stays last.
    """
    mat = X_fit if isinstance(X_fit, RearrangementMatrix) else RearrangementMatrix(X_fit)
    arr = np.array(mat.values, copy=True)
    m, n_cols = arr.shape
    n_base = n_cols - 1
    extra = n_target - n_base
    if extra < 0:
        raise ValueError(f"fit already has {n_base} margin columns, cannot shrink to {n_target}")
    if extra % 2 != 0:
        raise ValueError("extension must add an even number of margin columns")
    base_sorted = np.sort(arr[:, 0])
    if np.max(np.abs(base_sorted + base_sorted[::-1])) > 1e-9 * max(1.0, np.max(np.abs(base_sorted))):
        raise ValueError("countermonotone-pair extension needs margins symmetric about 0")
    if extra == 0:
        return mat
    rng = np.random.default_rng(rng_seed)
    pairs = []
    for _ in range(extra // 2):
        v = base_sorted[rng.permutation(m)]
        pairs.extend([v, -v])
    new_arr = np.column_stack([arr[:, :n_base], *pairs, arr[:, n_base]])
    return RearrangementMatrix(new_arr)


@dataclass(frozen=True)
class SpreadResult:
    """Two-asset dependence recovered from three marginal quantile tables."""

    copula: RearrangementMatrix
    residual_variance: float

    def to_dict(self) -> dict:
        return {
            "residual_variance": self.residual_variance,
            "rows": self.copula.m,
        }


def spread_dependence(fp_quantiles, fg_quantiles, fs_quantiles, m: int,
                      config: Optional[BlockRaConfig] = None) -> SpreadResult:
    """Joint law of two assets consistent with a given spread law.

    Stacks the three quantile tables as [first asset, -(second asset),
    -(spread)] and minimizes the row-sum variance; the joint sample is the
    first column paired with the second negated back to asset scale, and
    the achieved variance reports how close asset1 - asset2 - spread came
    to zero row by row.  An incompatible spread law just leaves a positive
    residual.
    """
    cols = []
    for name, tab in (("fp", fp_quantiles), ("fg", fg_quantiles), ("fs", fs_quantiles)):
        v = np.asarray(tab, dtype=np.float64).ravel()
        if v.size != m:
            raise ValueError(f"{name} quantile table length {v.size} does not match m={m}")
        cols.append(v)
    X = np.column_stack([cols[0], -cols[1], -cols[2]])
    result = block_ra2(X, config or BlockRaConfig())
    final = result.final_matrix.values
    return SpreadResult(
        copula=RearrangementMatrix(np.column_stack([final[:, 0], -final[:, 1]])),
        residual_variance=result.final_objective,
    )
