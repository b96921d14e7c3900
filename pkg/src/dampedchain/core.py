"""Core value types and matrix operations for damped Markov chains.

A damped chain mixes a base transition matrix with a rank-one "teleport"
matrix whose identical rows are a damping vector d:

    P(eps) = (1 - eps) * P0 + eps * D,    D[i, j] = d[j].

Everything here is dense float64 and immutable; the target scale is a few
thousand states at most.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatchError, ValidationError

DEFAULT_ROW_TOL = 1e-12


def _as_float_array(values, name, ndim):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or infinite entries")
    return arr


def _freeze(obj, field, arr):
    arr = arr.copy()
    arr.setflags(write=False)
    object.__setattr__(obj, field, arr)


@dataclass(frozen=True)
class StochasticMatrix:
    """Dense row-stochastic matrix.

    Every entry must lie in [0, 1] and every row must sum to 1 within
    ``row_tol``. The entry array is copied and marked read-only, so values
    are safe to share across threads.
    """

    entries: np.ndarray
    row_tol: float = DEFAULT_ROW_TOL

    def __post_init__(self):
        arr = _as_float_array(self.entries, "matrix", 2)
        if arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValidationError("matrix entries must lie in [0, 1]")
        sums = arr.sum(axis=1)
        bad = np.abs(sums - 1.0) > self.row_tol
        if np.any(bad):
            i = int(np.argmax(np.abs(sums - 1.0)))
            raise ValidationError(
                f"row {i} sums to {sums[i]!r}, off by more than row_tol={self.row_tol}"
            )
        _freeze(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self.entries[i]


@dataclass(frozen=True)
class DampingVector:
    """Strictly positive probability weights of the rank-one damping matrix."""

    weights: np.ndarray
    row_tol: float = DEFAULT_ROW_TOL

    def __post_init__(self):
        arr = _as_float_array(self.weights, "damping vector", 1)
        if np.any(arr <= 0.0):
            raise ValidationError("damping weights must be strictly positive")
        if abs(arr.sum() - 1.0) > self.row_tol:
            raise ValidationError(f"damping weights sum to {arr.sum()!r}, expected 1")
        _freeze(self, "weights", arr)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def uniform(cls, dim: int) -> "DampingVector":
        return cls(np.full(dim, 1.0 / dim))

    def matrix(self) -> StochasticMatrix:
        """The rank-one damping matrix D with every row equal to the weights."""
        return StochasticMatrix(np.tile(self.weights, (self.dim, 1)), self.row_tol)

    def as_distribution(self) -> "Distribution":
        return Distribution(self.weights, self.row_tol)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over states; zero entries are allowed.

    Entries within ``row_tol`` below zero are clipped to zero so that exact
    linear-algebra output (which may carry -1e-17 noise) validates cleanly.
    """

    probs: np.ndarray
    row_tol: float = DEFAULT_ROW_TOL

    def __post_init__(self):
        arr = _as_float_array(self.probs, "distribution", 1)
        if np.any(arr < -self.row_tol) or np.any(arr > 1.0 + self.row_tol):
            raise ValidationError("distribution entries must lie in [0, 1]")
        if abs(arr.sum() - 1.0) > self.row_tol:
            raise ValidationError(f"distribution sums to {arr.sum()!r}, expected 1")
        arr = np.clip(arr, 0.0, 1.0)
        _freeze(self, "probs", arr)

    @property
    def dim(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, dim: int) -> "Distribution":
        return cls(np.full(dim, 1.0 / dim))

    @classmethod
    def point_mass(cls, dim: int, state: int) -> "Distribution":
        if not 0 <= state < dim:
            raise ValidationError(f"state {state} outside 0..{dim - 1}")
        probs = np.zeros(dim)
        probs[state] = 1.0
        return cls(probs)


@dataclass(frozen=True)
class DampedChain:
    """Base matrix, damping vector and mixing weight epsilon in [0, 1]."""

    p0: StochasticMatrix
    damping: DampingVector
    epsilon: float

    def __post_init__(self):
        if self.p0.dim != self.damping.dim:
            raise DimensionMismatchError(
                f"matrix dim {self.p0.dim} != damping dim {self.damping.dim}"
            )
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def dim(self) -> int:
        return self.p0.dim

    @cached_property
    def matrix(self) -> StochasticMatrix:
        return build_damped_matrix(self)


def build_damped_matrix(chain: DampedChain) -> StochasticMatrix:
    """Mix the base matrix with the damping matrix.

    Parameters
    ----------
    chain : DampedChain
        Base matrix P0, damping weights d and mixing weight epsilon.

    Returns
    -------
    StochasticMatrix
        Matrix with entries ``(1 - eps) * P0[i, j] + eps * d[j]``.
    """
    eps = chain.epsilon
    entries = (1.0 - eps) * chain.p0.entries + eps * chain.damping.weights[np.newaxis, :]
    return StochasticMatrix(entries, chain.p0.row_tol)


def matrix_power(P: StochasticMatrix, n: int) -> StochasticMatrix:
    """n-step transition matrix P**n via repeated squaring.

    ``n = 0`` yields the identity. The result is validated with tolerance
    ``n * row_tol`` to absorb accumulated rounding.
    """
    if n < 0:
        raise ValidationError(f"power must be non-negative, got {n}")
    result = np.linalg.matrix_power(P.entries, n)
    return StochasticMatrix(result, max(1, n) * P.row_tol)


def propagate(p: Distribution, P: StochasticMatrix, n: int) -> Distribution:
    """Push a distribution forward n steps: ``p @ P**n``.

    Uses n vector-matrix products rather than forming P**n, which is the
    cheaper route whenever a trajectory is consumed step by step.
    """
    if p.dim != P.dim:
        raise DimensionMismatchError(f"distribution dim {p.dim} != matrix dim {P.dim}")
    if n < 0:
        raise ValidationError(f"step count must be non-negative, got {n}")
    v = p.probs
    for _ in range(n):
        v = v @ P.entries
    return Distribution(v, max(1, n) * P.row_tol)


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Total variation distance ``0.5 * sum |p_k - q_k|`` in [0, 1]."""
    if p.dim != q.dim:
        raise DimensionMismatchError(f"dims differ: {p.dim} vs {q.dim}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())
