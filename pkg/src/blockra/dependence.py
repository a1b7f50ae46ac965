"""Multivariate dependence diagnostics over two-block column partitions.

The headline quantity is the average, over every unordered two-block split of
the columns, of the Spearman correlation between the two block sums.  It is
-1 exactly when every split is countermonotone, which is the stopping target
for the block rearrangement algorithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix import Partition, RearrangementMatrix, _as_values, rank_vector

__all__ = [
    "DependenceReport",
    "spearman",
    "multivariate_dependence_exact",
    "multivariate_dependence_sampled",
    "pearson_partition_correlations",
]

EXACT_PARTITION_CAP = 20  # columns; 2^(cap-1) - 1 partitions is the real limit


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson correlation of average-tie ranks.

    Constant input is an error (rank variance vanishes and the coefficient
    is undefined).  Tie-free inputs take an exact integer path so perfectly
    opposite orderings return -1.0 exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman expects two vectors of equal length")
    m = x.size
    if m < 2:
        raise ValueError("spearman needs at least 2 observations")
    ux = np.unique(x).size
    uy = np.unique(y).size
    if ux == 1:
        raise ValueError("undefined Spearman: first input is constant")
    if uy == 1:
        raise ValueError("undefined Spearman: second input is constant")
    rx = rank_vector(x, ties="average")
    ry = rank_vector(y, ties="average")
    if ux == m and uy == m:
        d = rx.astype(np.int64) - ry.astype(np.int64)
        d2 = int(np.sum(d * d, dtype=np.int64))
        denom = m * (m * m - 1)
        return 1.0 - 6.0 * d2 / denom
    rx -= rx.mean()
    ry -= ry.mean()
    sx = float(np.sqrt(np.sum(rx * rx)))
    sy = float(np.sqrt(np.sum(ry * ry)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("undefined Spearman: constant ranks")
    return float(np.dot(rx, ry) / (sx * sy))


@dataclass(frozen=True)
class DependenceReport:
    """Result of a dependence-measure evaluation.

    ``worst_partition`` is the split whose block sums are least opposed
    (largest Spearman value), the natural next rearrangement target.
    """

    rho: float
    mode: str
    partitions_evaluated: int
    worst_partition: tuple[int, ...]
    worst_value: float
    per_partition: Optional[dict[tuple[int, ...], float]] = None

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "mode": self.mode,
            "partitions_evaluated": self.partitions_evaluated,
            "worst_partition": list(self.worst_partition),
            "worst_value": self.worst_value,
        }


def _block_spearman(arr: np.ndarray, pi_cols: tuple[int, ...]) -> float:
    total = arr.sum(axis=1)
    s_pi = arr[:, pi_cols].sum(axis=1) if len(pi_cols) > 1 else arr[:, pi_cols[0]]
    return spearman(s_pi, total - s_pi)


def multivariate_dependence_exact(X, cap: int = EXACT_PARTITION_CAP) -> DependenceReport:
    """Average block-sum Spearman over the full canonical partition enumeration.

    Walks all 2^(n-1) - 1 canonical splits (last column always in the
    complement).  Refuses n > cap; use the sampled estimator there.
    """
    arr = _as_values(X)
    n = arr.shape[1]
    if n > cap:
        raise ValueError(
            f"exact enumeration needs 2^{n - 1}-1 partitions for n={n} > cap={cap}; "
            "use multivariate_dependence_sampled"
        )
    per: dict[tuple[int, ...], float] = {}
    worst_pi: tuple[int, ...] = ()
    worst = -np.inf
    for part in Partition.enumerate_canonical(n):
        phi = _block_spearman(arr, part.pi)
        per[part.pi] = phi
        if phi > worst:
            worst = phi
            worst_pi = part.pi
    rho = math.fsum(per.values()) / len(per)
    return DependenceReport(
        rho=rho,
        mode="exact",
        partitions_evaluated=len(per),
        worst_partition=worst_pi,
        worst_value=worst,
        per_partition=per,
    )


def multivariate_dependence_sampled(X, n_samples: int, rng_seed: int) -> DependenceReport:
    """Monte-Carlo estimate of the exact measure.

    Each draw is an iid Bernoulli(1/2) column indicator vector, rejected
    unless both blocks are nonempty; the estimator is unbiased because every
    unordered split is hit with equal probability.  Deterministic per seed.
    """
    arr = _as_values(X)
    n = arr.shape[1]
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(rng_seed)
    total = arr.sum(axis=1)
    values = np.empty(n_samples, dtype=np.float64)
    worst_pi: tuple[int, ...] = ()
    worst = -np.inf
    for k in range(n_samples):
        while True:
            indicator = rng.integers(0, 2, size=n)
            ones = int(indicator.sum())
            if 0 < ones < n:
                break
        pi_cols = tuple(int(j) for j in np.flatnonzero(indicator))
        s_pi = arr[:, pi_cols].sum(axis=1) if len(pi_cols) > 1 else arr[:, pi_cols[0]]
        phi = spearman(s_pi, total - s_pi)
        values[k] = phi
        if phi > worst:
            worst = phi
            worst_pi = Partition(pi_cols, n).canonical().pi
    return DependenceReport(
        rho=float(math.fsum(values) / n_samples),
        mode="sampled",
        partitions_evaluated=n_samples,
        worst_partition=worst_pi,
        worst_value=worst,
        per_partition=None,
    )


def pearson_partition_correlations(X) -> dict[tuple[int, ...], Optional[float]]:
    """Pearson correlation of block sums for every canonical split.

    The n-by-n column covariance matrix is computed once; each split's block
    variances and cross-covariance are quadratic forms in it.  A block with
    (numerically) zero variance has no defined correlation and maps to None.
    """
    arr = _as_values(X)
    n = arr.shape[1]
    cov = np.cov(arr.T, ddof=1)
    out: dict[tuple[int, ...], Optional[float]] = {}
    for part in Partition.enumerate_canonical(n):
        mask = np.zeros(n, dtype=np.float64)
        mask[list(part.pi)] = 1.0
        comp = 1.0 - mask
        var_pi = float(mask @ cov @ mask)
        var_bar = float(comp @ cov @ comp)
        # Cancellation scale: if the quadratic form is this far below its
        # constituent terms, the block sum is constant for practical purposes.
        scale_pi = float(np.abs(np.outer(mask, mask) * cov).sum())
        scale_bar = float(np.abs(np.outer(comp, comp) * cov).sum())
        if var_pi <= 1e-12 * max(scale_pi, 1e-300) or var_bar <= 1e-12 * max(scale_bar, 1e-300):
            out[part.pi] = None
            continue
        cross = float(mask @ cov @ comp)
        out[part.pi] = cross / math.sqrt(var_pi * var_bar)
    return out
