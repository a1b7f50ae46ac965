"""Rearrangement algorithms: column-wise RA and the two block variants.

All three drive the variance of the full row sums down by countermonotone
rearrangement; they differ in which blocks they move and when they stop.

* ``standard_ra``: cycles columns, each made countermonotone with the sum of
  the others; stops when a full sweep changes nothing.
* ``block_ra1``: repeatedly rearranges the sampled partition whose block sums
  are least opposed, stopping once the dependence measure reaches a floor.
* ``block_ra2``: applies every sampled partition each pass, stopping when a
  pass no longer improves the variance materially.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dependence import (
    EXACT_PARTITION_CAP,
    multivariate_dependence_exact,
    multivariate_dependence_sampled,
    spearman,
)
from .matrix import (
    Partition,
    RearrangementMatrix,
    _rearrange_block_inplace,
    sample_variance,
)

__all__ = [
    "BlockRaConfig",
    "RunResult",
    "standard_ra",
    "sample_partitions",
    "block_ra1",
    "block_ra2",
]

# Consecutive argmax-rearrangement no-ops tolerated under partition
# subsampling before block_ra1 gives up; with full enumeration the first
# confirmed no-op already proves the algorithm is stuck.
_STALL_LIMIT = 10


@dataclass(frozen=True)
class BlockRaConfig:
    """Knobs shared by the block algorithms.

    ``n_sim=None`` resolves to min(512, 2^(n-1) - 1) at run time.  The
    dependence floor ``rho_stop`` only matters to block_ra1; the pass-level
    ``improvement_tol`` (relative, with a 1e-15 absolute floor) only to
    block_ra2.
    """

    n_sim: Optional[int] = None
    rho_stop: float = -0.9999
    improvement_tol: float = 1e-12
    max_sweeps: int = 1000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_sim is not None and self.n_sim < 1:
            raise ValueError("n_sim must be positive")
        if not -1.0 <= self.rho_stop < 0.0:
            raise ValueError("rho_stop must lie in [-1, 0)")
        if self.improvement_tol < 0:
            raise ValueError("improvement_tol must be nonnegative")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")

    def resolve_n_sim(self, n_columns: int) -> int:
        full = (1 << (n_columns - 1)) - 1
        if self.n_sim is None:
            return min(512, full)
        return self.n_sim


@dataclass(frozen=True)
class RunResult:
    """Outcome of one algorithm run.

    ``stop_reason`` is one of dependence-threshold, no-improvement,
    max-iterations.  ``objective_trace`` records the row-sum variance after
    each sweep (standard RA / block RA2 pass) or iteration (block RA1),
    starting with the input's variance; it is non-increasing.
    """

    final_matrix: RearrangementMatrix
    final_objective: float
    sweeps: int
    rearrangements_applied: int
    stop_reason: str
    objective_trace: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "final_objective": self.final_objective,
            "sweeps": self.sweeps,
            "rearrangements_applied": self.rearrangements_applied,
            "stop_reason": self.stop_reason,
            "objective_trace": list(self.objective_trace),
        }


def _working_copy(X) -> np.ndarray:
    mat = X if isinstance(X, RearrangementMatrix) else RearrangementMatrix(X)
    return np.array(mat.values, copy=True)


def standard_ra(X, config: Optional[BlockRaConfig] = None) -> RunResult:
    """Column-cycling rearrangement to a sweep-stable point.

    Column j is rearranged countermonotonically against the sum of the other
    columns, for j = 0..n-1 in order; the run stops after the first full
    sweep that changes no column, or when the sweep budget runs out.
    """
    cfg = config or BlockRaConfig()
    arr = _working_copy(X)
    m, n = arr.shape
    all_cols = tuple(range(n))
    trace = [sample_variance(arr.sum(axis=1))]
    applied = 0
    sweeps = 0
    reason = "max-iterations"
    for _ in range(cfg.max_sweeps):
        sweeps += 1
        changed_any = False
        for j in range(n):
            pi_cols = all_cols[:j] + all_cols[j + 1:]
            if _rearrange_block_inplace(arr, pi_cols, (j,)):
                applied += 1
                changed_any = True
        trace.append(sample_variance(arr.sum(axis=1)))
        if not changed_any:
            reason = "no-improvement"
            break
    return RunResult(
        final_matrix=RearrangementMatrix(arr),
        final_objective=trace[-1],
        sweeps=sweeps,
        rearrangements_applied=applied,
        stop_reason=reason,
        objective_trace=tuple(trace),
    )


def sample_partitions(
    n: int,
    n_sim: int,
    rng_seed: Union[int, np.random.Generator] = 0,
) -> list[Partition]:
    """Canonical partitions for one algorithm pass.

    Returns the full 2^(n-1) - 1 enumeration (binary-counter order) when
    n_sim covers it, otherwise n_sim distinct canonical partitions drawn
    uniformly without replacement.  Deterministic given the seed.
    """
    if n < 2:
        raise ValueError("need at least 2 columns")
    if n_sim < 1:
        raise ValueError("n_sim must be positive")
    full = (1 << (n - 1)) - 1
    if n_sim >= full:
        return list(Partition.enumerate_canonical(n))
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    seen: set[int] = set()
    out: list[Partition] = []
    while len(out) < n_sim:
        bits = rng.integers(0, 2, size=n - 1)
        mask = 0
        for j in np.flatnonzero(bits):
            mask |= 1 << int(j)
        if mask == 0 or mask in seen:
            continue
        seen.add(mask)
        out.append(Partition.from_mask(mask, n))
    return out


def _block_sums(arr: np.ndarray, cols: tuple[int, ...]) -> np.ndarray:
    if len(cols) == 1:
        return arr[:, cols[0]]
    return arr[:, cols].sum(axis=1)


def _dependence_estimate(arr: np.ndarray, n_sim: int, rng: np.random.Generator) -> float:
    """Exact measure when enumerable, sampled fallback for very wide matrices."""
    n = arr.shape[1]
    if n <= EXACT_PARTITION_CAP:
        return multivariate_dependence_exact(arr).rho
    seed = int(rng.integers(0, 2**63 - 1))
    return multivariate_dependence_sampled(arr, n_samples=n_sim, rng_seed=seed).rho


def block_ra1(X, config: Optional[BlockRaConfig] = None) -> RunResult:
    """Greedy block rearrangement guided by the dependence measure.

    Each iteration samples partitions, finds the one whose block sums are
    least opposed (largest Spearman), and rearranges its complement block.
    The dependence measure is recomputed exactly every 10 iterations, and
    always before a stop is declared, to keep the exact-enumeration cost off
    the hot path.
    """
    cfg = config or BlockRaConfig()
    arr = _working_copy(X)
    m, n = arr.shape
    n_sim = cfg.resolve_n_sim(n)
    full_enumeration = n_sim >= (1 << (n - 1)) - 1
    rng = np.random.default_rng(cfg.rng_seed)
    trace = [sample_variance(arr.sum(axis=1))]
    applied = 0
    sweeps = 0
    stall = 0
    reason = "max-iterations"
    check_every = 10
    for it in range(1, cfg.max_sweeps + 1):
        sweeps = it
        parts = sample_partitions(n, n_sim, rng)
        total = arr.sum(axis=1)
        best_phi = -np.inf
        best_part = parts[0]
        for part in parts:
            s_pi = _block_sums(arr, part.pi)
            phi = spearman(s_pi, total - s_pi)
            if phi > best_phi:
                best_phi = phi
                best_part = part
        changed = _rearrange_block_inplace(arr, best_part.pi, best_part.complement())
        if changed:
            applied += 1
            stall = 0
        else:
            stall += 1
        trace.append(sample_variance(arr.sum(axis=1)))
        if it % check_every == 0 or not changed:
            rho = _dependence_estimate(arr, n_sim, rng)
            if rho <= cfg.rho_stop:
                reason = "dependence-threshold"
                break
            if not changed and (full_enumeration or stall >= _STALL_LIMIT):
                reason = "no-improvement"
                break
    return RunResult(
        final_matrix=RearrangementMatrix(arr),
        final_objective=trace[-1],
        sweeps=sweeps,
        rearrangements_applied=applied,
        stop_reason=reason,
        objective_trace=tuple(trace),
    )


def block_ra2(X, config: Optional[BlockRaConfig] = None) -> RunResult:
    """Exhaustive-pass block rearrangement.

    Each pass samples partitions (resampled every pass) and applies the
    countermonotone rearrangement for each in order; the run stops when a
    pass improves the row-sum variance by less than the relative tolerance
    (absolute floor 1e-15).
    """
    cfg = config or BlockRaConfig()
    arr = _working_copy(X)
    m, n = arr.shape
    n_sim = cfg.resolve_n_sim(n)
    rng = np.random.default_rng(cfg.rng_seed)
    prev_var = sample_variance(arr.sum(axis=1))
    trace = [prev_var]
    applied = 0
    sweeps = 0
    reason = "max-iterations"
    for _ in range(cfg.max_sweeps):
        sweeps += 1
        parts = sample_partitions(n, n_sim, rng)
        for part in parts:
            if _rearrange_block_inplace(arr, part.pi, part.complement()):
                applied += 1
        var = sample_variance(arr.sum(axis=1))
        trace.append(var)
        if prev_var - var < max(cfg.improvement_tol * var, 1e-15):
            reason = "no-improvement"
            break
        prev_var = var
    return RunResult(
        final_matrix=RearrangementMatrix(arr),
        final_objective=trace[-1],
        sweeps=sweeps,
        rearrangements_applied=applied,
        stop_reason=reason,
        objective_trace=tuple(trace),
    )
