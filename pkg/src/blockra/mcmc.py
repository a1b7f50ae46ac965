"""Metropolis search over arrangement classes with Gumbel-ranked proposals.

Each iteration picks a uniform random two-block column split, proposes a new
joint ordering of the second block by ranking Gumbel-perturbed negative
first-block sums, and accepts with probability min(1, f_current/f_proposed),
i.e. a Metropolis step targeting a distribution proportional to 1/f.  States
with objective at (numerical) zero absorb the chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .matrix import ObjectiveSpec, Partition, RearrangementMatrix, rank_vector

__all__ = [
    "McmcConfig",
    "ChainTrace",
    "gumbel_sample",
    "propose_permutation",
    "resolve_rate",
    "mcmc_block_ra",
]

# Default Gumbel rate: noise scale is this fraction of the starting row-sum spread.
_RATE_OVER_SD = 5.0


@dataclass(frozen=True)
class McmcConfig:
    """Chain settings.

    ``r`` is the Gumbel rate (noise scale 1/r); None resolves it once at
    chain start to 5 / sd(starting row sums).  Keeping the rate fixed for
    the whole run preserves uphill mobility after the objective has shrunk.
    ``absorb_tol`` is the objective level at which the state is declared
    absorbing and the run stops.
    """

    objective: ObjectiveSpec = ObjectiveSpec.variance()
    r: Optional[float] = None
    n_iter: int = 10_000
    rng_seed: int = 0
    absorb_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.r is not None and not self.r > 0:
            raise ValueError("Gumbel rate r must be positive")
        if self.n_iter < 1:
            raise ValueError("n_iter must be positive")
        if self.absorb_tol < 0:
            raise ValueError("absorb_tol must be nonnegative")


@dataclass(frozen=True)
class ChainTrace:
    """Per-iteration record of the chain.

    ``objective_per_iter[k]`` is the objective of the state occupied after
    iteration k; ``best_matrix`` is the best state actually visited
    (including the start).  ``absorbed_at`` is the iteration count at
    absorption, 0 when the start already absorbs, None otherwise.
    """

    objective_per_iter: np.ndarray
    accepted: np.ndarray
    best_objective: float
    best_matrix: RearrangementMatrix
    absorbed_at: Optional[int]

    def to_dict(self) -> dict:
        return {
            "iterations": int(self.objective_per_iter.size),
            "best_objective": self.best_objective,
            "acceptance_rate": float(self.accepted.mean()) if self.accepted.size else 0.0,
            "absorbed_at": self.absorbed_at,
        }


def gumbel_sample(r: float, rng: np.random.Generator, size=None) -> Union[float, np.ndarray]:
    """Inverse-CDF draw(s) from the Gumbel law with rate r (scale 1/r).

    z = -ln(-ln(u))/r, so u = exp(-1) maps to z = 0 and the median is
    -ln(ln 2)/r.
    """
    if not r > 0:
        raise ValueError("Gumbel rate r must be positive")
    u = rng.random(size)
    u = np.maximum(u, np.finfo(np.float64).tiny)
    return -np.log(-np.log(u)) / r


def propose_permutation(s_pi: np.ndarray, r: float, rng: np.random.Generator) -> np.ndarray:
    """Random rank pattern for the block opposite the given sums.

    Draws w_i = Y_i - s_pi[i] with iid Gumbel(r) noise Y and returns the
    0-based ranks of w.  Placing the block rows sorted ascending by block
    sum into these slots makes the rearranged block sums ranked identically
    to w: the largest block sum lands where w is largest.  As r grows the
    noise vanishes and the pattern tends to the countermonotone one; a
    constant s_pi yields a uniformly random permutation.
    """
    s_pi = np.asarray(s_pi, dtype=np.float64)
    m = s_pi.size
    if m == 1:
        return np.zeros(1, dtype=np.intp)
    w = gumbel_sample(r, rng, m) - s_pi
    return rank_vector(w, ties="stable-first").astype(np.intp) - 1


def _objective_of_sums(s: np.ndarray, spec: ObjectiveSpec) -> float:
    if spec.kind == "variance":
        return float(s.var(ddof=1))
    return float(np.mean(spec.f(s)))


def _draw_canonical_mask(n: int, rng: np.random.Generator) -> int:
    width = n - 1
    if width <= 62:
        return int(rng.integers(1, (1 << width)))
    while True:  # wide matrices: assemble the mask from raw bits
        bits = rng.integers(0, 2, size=width)
        mask = 0
        for j in np.flatnonzero(bits):
            mask |= 1 << int(j)
        if mask:
            return mask


def resolve_rate(X, config: Optional[McmcConfig] = None) -> float:
    """The Gumbel rate the chain will use from this start.

    An explicit config.r wins; otherwise the rate is set once from the
    spread of the starting row sums so the noise scale matches the
    objective landscape (degenerate starts get an effectively rigid rate).
    """
    cfg = config or McmcConfig()
    if cfg.r is not None:
        return cfg.r
    mat = X if isinstance(X, RearrangementMatrix) else RearrangementMatrix(X)
    sd = float(mat.values.sum(axis=1).std(ddof=1))
    return _RATE_OVER_SD / sd if sd > 0 else 1e12


def mcmc_block_ra(X, config: Optional[McmcConfig] = None) -> ChainTrace:
    """Run the Metropolis chain from a starting matrix.

    Deterministic given the seed: each iteration consumes one partition
    draw, m Gumbel variates, and one acceptance uniform, in that order.
    """
    cfg = config or McmcConfig()
    mat = X if isinstance(X, RearrangementMatrix) else RearrangementMatrix(X)
    arr = np.array(mat.values, copy=True)
    m, n = arr.shape
    rng = np.random.default_rng(cfg.rng_seed)
    spec = cfg.objective

    s_cur = arr.sum(axis=1)
    f_cur = _objective_of_sums(s_cur, spec)
    if not np.isfinite(f_cur):
        raise ValueError("objective is not finite at the start")
    best_f = f_cur
    best_arr = arr.copy()

    rate = resolve_rate(mat, cfg)
    objectives = np.empty(cfg.n_iter, dtype=np.float64)
    accepted = np.zeros(cfg.n_iter, dtype=bool)
    absorbed_at: Optional[int] = None

    if f_cur <= cfg.absorb_tol:
        return ChainTrace(
            objective_per_iter=objectives[:0],
            accepted=accepted[:0],
            best_objective=best_f,
            best_matrix=RearrangementMatrix(best_arr),
            absorbed_at=0,
        )

    rows = np.arange(m)
    for it in range(1, cfg.n_iter + 1):
        part = Partition.from_mask(_draw_canonical_mask(n, rng), n)
        pi_cols = list(part.pi)
        comp_cols = list(part.complement())
        s_pi = arr[:, pi_cols].sum(axis=1) if len(pi_cols) > 1 else arr[:, pi_cols[0]].copy()
        s_bar = s_cur - s_pi
        slots = propose_permutation(s_pi, rate, rng)
        order_block = np.argsort(s_bar, kind="stable")
        sigma = order_block[slots]
        s_new = s_pi + s_bar[sigma]
        f_prop = _objective_of_sums(s_new, spec)
        u = rng.random()
        accept = f_prop <= 0 or u * f_prop < f_cur  # min(1, f_cur/f_prop) Metropolis rule
        if accept:
            arr[np.ix_(rows, comp_cols)] = arr[np.ix_(sigma, comp_cols)]
            s_cur = s_new
            f_cur = f_prop
            accepted[it - 1] = True
            if f_cur < best_f:
                best_f = f_cur
                best_arr = arr.copy()
        objectives[it - 1] = f_cur
        if f_cur <= cfg.absorb_tol:
            absorbed_at = it
            break

    n_done = cfg.n_iter if absorbed_at is None else absorbed_at
    return ChainTrace(
        objective_per_iter=objectives[:n_done].copy(),
        accepted=accepted[:n_done].copy(),
        best_objective=best_f,
        best_matrix=RearrangementMatrix(best_arr),
        absorbed_at=absorbed_at,
    )
