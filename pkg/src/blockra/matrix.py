"""Core matrix model: fixed column margins, block sums, countermonotone rearrangement.

A rearrangement matrix is an m-by-n array whose columns are fixed multisets;
the only admissible operation is reordering values within columns.  Everything
else in this package (dependence diagnostics, block algorithms, oracles, the
target-sum fitting workflow) is built on the handful of primitives here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Optional

import numpy as np

__all__ = [
    "RearrangementMatrix",
    "Partition",
    "ObjectiveSpec",
    "row_sums",
    "objective",
    "rank_vector",
    "countermonotone_rearrange",
    "permute_column",
    "read_matrix_csv",
    "write_matrix_csv",
]


@dataclass(frozen=True)
class RearrangementMatrix:
    """Immutable m-by-n float matrix whose columns are fixed multisets.

    Rows index joint realizations, columns index components.  m >= 2 and
    n >= 2; a single-row matrix admits no rearrangement and is rejected.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got ndim={arr.ndim}")
        m, n = arr.shape
        if m < 2:
            raise ValueError(f"need at least 2 rows, got m={m}")
        if n < 2:
            raise ValueError(f"need at least 2 columns, got n={n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def sorted_columns(self) -> np.ndarray:
        """Column-wise sorted copy; the invariant object every operation preserves."""
        return np.sort(self.values, axis=0)

    def with_values(self, values: np.ndarray) -> "RearrangementMatrix":
        return RearrangementMatrix(values)


@dataclass(frozen=True)
class Partition:
    """An ordered two-block split of the column index set.

    ``pi`` holds the indices (0-based) of the first block; the complement is
    the second block, the one rearrangement operations physically move.  The
    canonical representative of an unordered split excludes the last column
    from ``pi``, which is what enumeration and reporting use.
    """

    pi: tuple[int, ...]
    n_columns: int

    def __post_init__(self) -> None:
        pi = tuple(sorted(int(j) for j in self.pi))
        n = int(self.n_columns)
        if not 0 < len(pi) < n:
            raise ValueError("empty partition side")
        if len(set(pi)) != len(pi):
            raise ValueError(f"duplicate column indices in {pi}")
        if pi[0] < 0 or pi[-1] >= n:
            raise ValueError(f"column index out of range for n={n}: {pi}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "n_columns", n)

    def complement(self) -> tuple[int, ...]:
        keep = set(self.pi)
        return tuple(j for j in range(self.n_columns) if j not in keep)

    def canonical(self) -> "Partition":
        """Representative of the unordered split with the last column in the complement."""
        if self.n_columns - 1 in self.pi:
            return Partition(self.complement(), self.n_columns)
        return self

    @classmethod
    def from_mask(cls, mask: int, n_columns: int) -> "Partition":
        """Canonical partition from a nonzero bitmask over the first n-1 columns."""
        pi = tuple(j for j in range(n_columns - 1) if mask >> j & 1)
        return cls(pi, n_columns)

    def mask(self) -> int:
        return sum(1 << j for j in self.pi)

    @classmethod
    def enumerate_canonical(cls, n_columns: int) -> Iterable["Partition"]:
        """All 2^(n-1) - 1 canonical partitions, in binary-counter order."""
        for mask in range(1, 1 << (n_columns - 1)):
            yield cls.from_mask(mask, n_columns)


@dataclass(frozen=True)
class ObjectiveSpec:
    """What the rearrangement algorithms minimize over the row sums.

    ``variance`` is the sample variance (m-1 divisor) of the full row sums.
    ``expected-convex`` averages a user-supplied convex function f over the
    row sums; f must accept an ndarray and return one elementwise.
    """

    kind: Literal["variance", "expected-convex"] = "variance"
    f: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("variance", "expected-convex"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "expected-convex" and self.f is None:
            raise ValueError("expected-convex objective needs a function f")

    @classmethod
    def variance(cls) -> "ObjectiveSpec":
        return cls(kind="variance")

    @classmethod
    def expected_convex(cls, f: Callable[[np.ndarray], np.ndarray]) -> "ObjectiveSpec":
        return cls(kind="expected-convex", f=f)


def _as_values(X) -> np.ndarray:
    if isinstance(X, RearrangementMatrix):
        return X.values
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return arr


def row_sums(X, pi: Partition | Iterable[int] | None = None) -> np.ndarray:
    """Row sums over all columns, or over the columns of one block.

    ``pi`` may be a Partition (its first block is summed), an iterable of
    column indices, or None for the full matrix.
    """
    arr = _as_values(X)
    if pi is None:
        return arr.sum(axis=1)
    cols = pi.pi if isinstance(pi, Partition) else tuple(int(j) for j in pi)
    if len(cols) == 0:
        raise ValueError("empty partition side")
    if len(cols) == 1:
        return arr[:, cols[0]].copy()
    return arr[:, cols].sum(axis=1)


def sample_variance(s: np.ndarray) -> float:
    """Sample variance with m-1 divisor, the objective convention package-wide."""
    s = np.asarray(s, dtype=np.float64)
    if s.size < 2:
        raise ValueError("sample variance needs at least 2 values")
    return float(s.var(ddof=1))


def objective(X, spec: ObjectiveSpec | None = None) -> float:
    """Evaluate an objective on the full row sums.  Non-finite entries are an error."""
    arr = _as_values(X)
    if not np.isfinite(arr).all():
        raise ValueError("matrix has non-finite entries")
    s = arr.sum(axis=1)
    if spec is None or spec.kind == "variance":
        return sample_variance(s)
    vals = np.asarray(spec.f(s), dtype=np.float64)
    if vals.shape != s.shape:
        raise ValueError("objective function must map row sums elementwise")
    return float(vals.mean())


def rank_vector(v, ties: Literal["average", "stable-first"] = "average") -> np.ndarray:
    """1-based ranks of a vector.

    ``average`` assigns tied values their midrank (the Spearman convention);
    ``stable-first`` breaks ties by original position, always returning a
    permutation of 1..m.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("rank_vector expects a 1-D vector")
    m = v.size
    order = np.argsort(v, kind="stable")
    ranks = np.empty(m, dtype=np.float64)
    if ties == "stable-first":
        ranks[order] = np.arange(1, m + 1, dtype=np.float64)
        return ranks
    if ties != "average":
        raise ValueError(f"unknown tie mode {ties!r}")
    sorted_v = v[order]
    # Midranks: average the 1-based positions within each run of equal values.
    starts = np.flatnonzero(np.r_[True, sorted_v[1:] != sorted_v[:-1]])
    ends = np.r_[starts[1:], m]
    mid_per_run = (starts + ends - 1) / 2.0 + 1.0
    ranks[order] = np.repeat(mid_per_run, ends - starts)
    return ranks


def counter_permutation(target: np.ndarray, block_sums: np.ndarray) -> np.ndarray:
    """Permutation placing block rows countermonotonically against target sums.

    Returns sigma with new_block[i] = old_block[sigma[i]]: the row whose
    target sum is smallest receives the largest block sum.  Ties in the
    target keep the current relative block assignment, so an input that is
    already countermonotone (up to ties) maps to the identity.
    """
    target = np.asarray(target, dtype=np.float64)
    block_sums = np.asarray(block_sums, dtype=np.float64)
    m = target.size
    # Positions sorted by target ascending; among tied targets, the position
    # currently holding the larger block sum comes first so it keeps it.
    order_pos = np.lexsort((-block_sums, target))
    order_rows = np.argsort(-block_sums, kind="stable")
    sigma = np.empty(m, dtype=np.intp)
    sigma[order_pos] = order_rows
    return sigma


def _rearrange_block_inplace(arr: np.ndarray, pi_cols: tuple[int, ...],
                             comp_cols: tuple[int, ...]) -> bool:
    """Apply the countermonotone rearrangement to ``arr`` in place.

    Rows of the complement block move jointly; the pi block is untouched.
    Returns True when the matrix changed.
    """
    s_pi = arr[:, pi_cols].sum(axis=1) if len(pi_cols) > 1 else arr[:, pi_cols[0]]
    block = arr[:, comp_cols]
    s_bar = block.sum(axis=1) if len(comp_cols) > 1 else arr[:, comp_cols[0]]
    sigma = counter_permutation(s_pi, s_bar)
    if np.array_equal(sigma, np.arange(arr.shape[0])):
        return False
    new_block = arr[np.ix_(sigma, comp_cols)]
    if np.array_equal(new_block, arr[:, comp_cols]):
        return False
    arr[:, comp_cols] = new_block
    return True


def countermonotone_rearrange(X, pi: Partition) -> RearrangementMatrix:
    """Jointly permute the complement block so its sums oppose the pi-block sums.

    The first block of ``pi`` stays fixed; rows of the complement block are
    jointly reordered so the complement sums are ordered opposite to the
    pi-block sums.  Never increases the variance of the full row sums.
    """
    mat = X if isinstance(X, RearrangementMatrix) else RearrangementMatrix(X)
    if pi.n_columns != mat.n:
        raise ValueError(f"partition is over {pi.n_columns} columns, matrix has {mat.n}")
    arr = np.array(mat.values, copy=True)
    var_before = arr.sum(axis=1).var(ddof=1)
    _rearrange_block_inplace(arr, pi.pi, pi.complement())
    var_after = arr.sum(axis=1).var(ddof=1)
    # Rearrangement inequality guarantees this up to roundoff.
    assert var_after <= var_before + 1e-12 * max(1.0, var_before), \
        "countermonotone rearrangement increased variance"
    return RearrangementMatrix(arr)


def permute_column(X, j: int, sigma) -> RearrangementMatrix:
    """Reorder a single column by an explicit permutation; other columns fixed."""
    mat = X if isinstance(X, RearrangementMatrix) else RearrangementMatrix(X)
    sigma = np.asarray(sigma, dtype=np.intp)
    m = mat.m
    if not 0 <= j < mat.n:
        raise ValueError(f"column index {j} out of range for n={mat.n}")
    if sigma.shape != (m,) or not np.array_equal(np.sort(sigma), np.arange(m)):
        raise ValueError("sigma is not a permutation of 0..m-1")
    arr = np.array(mat.values, copy=True)
    arr[:, j] = arr[sigma, j]
    return RearrangementMatrix(arr)


def write_matrix_csv(X, path) -> None:
    """Comma-separated rows, no header, 17 significant digits (lossless round-trip)."""
    arr = _as_values(X)
    with open(path, "w") as fh:
        for row in arr:
            fh.write(",".join("%.17g" % x for x in row) + "\n")


def read_matrix_csv(path) -> RearrangementMatrix:
    """Parse a matrix written by :func:`write_matrix_csv`."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return RearrangementMatrix(arr)
