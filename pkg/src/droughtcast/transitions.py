"""Empirical t-step transition matrices and stationary distributions.

Each lag's matrix is estimated directly from the lag-t pairs of the
sequence (within contiguous non-missing runs), not as a matrix power of
the one-step matrix: the per-lag empirical structure is exactly what the
kappa-based weighting measures. A matrix-power mode exists purely for
comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .classification import ClassSequence
from .errors import InsufficientDataError, NoUniqueStationaryError
from .kappa import all_lag_counts

ESTIMATION_MODES = ("empirical", "power")

_ROW_TOL = 1e-12


@dataclass(frozen=True)
class TransitionMatrixSet:
    """Transition matrices for lags 1..max_lag plus their raw counts.

    ``row_support[t-1][i]`` is true when state i has at least one
    observed departure at lag t; rows without support are all-zero in
    the unsmoothed empirical mode. A whole lag with no pairs at all is
    "unavailable": its matrix is entirely zero and its support vector
    entirely false.
    """

    class_count: int
    max_lag: int
    matrices: tuple[tuple[tuple[float, ...], ...], ...]
    counts: tuple[tuple[tuple[int, ...], ...], ...]
    row_support: tuple[tuple[bool, ...], ...]
    mode: str = "empirical"
    smoothing: float = 0.0

    def __post_init__(self) -> None:
        d, m = self.class_count, self.max_lag
        if d < 1 or m < 1:
            raise ValueError("class_count and max_lag must be >= 1")
        if not (len(self.matrices) == len(self.counts) == len(self.row_support) == m):
            raise ValueError("need exactly one matrix, count table, and support vector per lag")
        for matrix in self.matrices:
            if len(matrix) != d or any(len(row) != d for row in matrix):
                raise ValueError("every matrix must be class_count x class_count")
            for row in matrix:
                s = sum(row)
                if any(p < 0.0 or not math.isfinite(p) for p in row):
                    raise ValueError("transition probabilities must be finite and >= 0")
                if s != 0.0 and abs(s - 1.0) > _ROW_TOL:
                    raise ValueError("rows must sum to 1 (supported) or 0 (unsupported)")

    def matrix(self, lag: int) -> np.ndarray:
        return np.array(self.matrices[self._idx(lag)], dtype=float)

    def count_matrix(self, lag: int) -> np.ndarray:
        return np.array(self.counts[self._idx(lag)], dtype=np.int64)

    def support(self, lag: int) -> np.ndarray:
        return np.array(self.row_support[self._idx(lag)], dtype=bool)

    def _idx(self, lag: int) -> int:
        if not 1 <= lag <= self.max_lag:
            raise ValueError(f"lag {lag} outside 1..{self.max_lag}")
        return lag - 1

    @property
    def available(self) -> tuple[bool, ...]:
        return tuple(any(sup) for sup in self.row_support)

    def available_lags(self) -> tuple[int, ...]:
        return tuple(t + 1 for t, ok in enumerate(self.available) if ok)


def matrices_from_counts(
    counts_by_lag: Sequence[np.ndarray],
    *,
    smoothing: float = 0.0,
    mode: str = "empirical",
) -> TransitionMatrixSet:
    """Normalize per-lag pair counts into a TransitionMatrixSet.

    ``smoothing`` adds a Laplace pseudo-count to every cell of an
    available lag before normalizing (0 = raw frequencies; the default,
    since smoothing changes the worked-example reproductions). In
    ``power`` mode the lag-1 matrix is estimated from counts and every
    deeper lag is its matrix power, with unsupported states treated as
    absorbing while powering.
    """
    if smoothing < 0.0:
        raise ValueError("smoothing must be >= 0")
    if mode not in ESTIMATION_MODES:
        raise ValueError(f"mode must be one of {ESTIMATION_MODES}, got {mode!r}")
    count_arrays = [np.asarray(c, dtype=np.int64) for c in counts_by_lag]
    if not count_arrays:
        raise ValueError("need counts for at least one lag")
    d = count_arrays[0].shape[0]
    max_lag = len(count_arrays)
    if any(c.shape != (d, d) for c in count_arrays):
        raise ValueError("count matrices must all be square with the same class count")
    if all(c.sum() == 0 for c in count_arrays):
        raise InsufficientDataError(
            f"no contiguous run yields a single transition pair at any lag 1..{max_lag}"
        )

    def normalize(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        row_sums = counts.sum(axis=1)
        support = row_sums > 0
        probs = np.zeros((d, d), dtype=float)
        if counts.sum() > 0:
            if smoothing > 0.0:
                probs = (counts + smoothing) / (row_sums + smoothing * d)[:, None]
            else:
                probs[support] = counts[support] / row_sums[support, None]
        return probs, support

    matrices: list[np.ndarray] = []
    supports: list[np.ndarray] = []
    if mode == "power":
        if count_arrays[0].sum() == 0:
            raise InsufficientDataError("matrix-power mode needs pairs at lag 1")
        p1, support1 = normalize(count_arrays[0])
        zero_rows = p1.sum(axis=1) == 0.0
        base = p1.copy()
        # zero rows would bleed mass away under powering; treat those
        # states as absorbing, then blank their rows out again
        base[zero_rows] = np.eye(d)[zero_rows]
        for t in range(1, max_lag + 1):
            if t == 1:
                stepped = p1
            else:
                stepped = np.linalg.matrix_power(base, t)
                stepped[zero_rows] = 0.0
            matrices.append(stepped)
            supports.append(support1.copy())
            count_arrays[t - 1] = count_arrays[0] if t == 1 else np.zeros((d, d), np.int64)
    else:
        for counts in count_arrays:
            probs, support = normalize(counts)
            matrices.append(probs)
            supports.append(support)

    return TransitionMatrixSet(
        class_count=d,
        max_lag=max_lag,
        matrices=tuple(tuple(tuple(float(p) for p in row) for row in mat) for mat in matrices),
        counts=tuple(tuple(tuple(int(c) for c in row) for row in cnt) for cnt in count_arrays),
        row_support=tuple(tuple(bool(b) for b in sup) for sup in supports),
        mode=mode,
        smoothing=smoothing,
    )


def estimate_transitions(
    seq: ClassSequence,
    max_lag: int,
    *,
    smoothing: float = 0.0,
    mode: str = "empirical",
) -> TransitionMatrixSet:
    """Estimate lag-1..max_lag transition matrices from a class sequence.

    Pairs are counted only within contiguous non-missing runs. A lag too
    deep for every run is left unavailable rather than failing; only a
    sequence with no usable lag at all raises.
    """
    return matrices_from_counts(
        all_lag_counts(seq, max_lag), smoothing=smoothing, mode=mode
    )


@dataclass(frozen=True)
class StationaryDistribution:
    """A fixed point of the one-step chain, with solver diagnostics."""

    probabilities: tuple[float, ...]
    residual: float
    method: str

    def __post_init__(self) -> None:
        if any(p < 0.0 or not math.isfinite(p) for p in self.probabilities):
            raise ValueError("stationary probabilities must be finite and >= 0")
        if abs(sum(self.probabilities) - 1.0) > 1e-10:
            raise ValueError("stationary probabilities must sum to 1")
        if self.method not in ("power-iteration", "linear-solve"):
            raise ValueError(f"unknown method {self.method!r}")


def _closed_class_count(Q: np.ndarray) -> int:
    """Number of closed communicating classes of a stochastic matrix."""
    n_comp, labels = connected_components(
        csr_matrix(Q > 0.0), directed=True, connection="strong"
    )
    closed = set(range(n_comp))
    rows, cols = np.nonzero(Q > 0.0)
    for i, j in zip(rows, cols):
        if labels[i] != labels[j]:
            closed.discard(labels[i])
    return len(closed)


def stationary(
    matrix,
    *,
    start: Sequence[float] | None = None,
    tolerance: float = 1e-10,
    max_iterations: int = 100_000,
    residual_tolerance: float = 1e-8,
) -> StationaryDistribution:
    """Solve pi @ P = pi for the unique stationary distribution.

    Rows must be stochastic or all-zero (a state with no observed
    departures); the chain is restricted to the supported states, which
    must not leak probability into unsupported ones. Power iteration
    runs first, started from ``start`` (e.g. empirical class
    frequencies; uniform when omitted); if it stalls, a direct linear
    solve of the balance equations takes over. A chain whose supported
    part has more than one closed communicating class (an identity
    matrix, say) has no unique fixed point and raises.
    """
    P = np.asarray(matrix, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("transition matrix must be square")
    if not np.all(np.isfinite(P)) or np.any(P < 0.0):
        raise ValueError("transition probabilities must be finite and >= 0")
    row_sums = P.sum(axis=1)
    supported = row_sums > 0.0
    if not supported.any():
        raise NoUniqueStationaryError("matrix has no supported rows")
    if np.any(np.abs(row_sums[supported] - 1.0) > 1e-9):
        raise ValueError("rows must sum to 1 (supported) or 0 (unsupported)")
    leak = P[np.ix_(supported, ~supported)].sum()
    if leak > 0.0:
        raise NoUniqueStationaryError(
            "chain leaks probability into states with no observed departures"
        )
    Q = P[np.ix_(supported, supported)]
    k = Q.shape[0]
    if _closed_class_count(Q) != 1:
        raise NoUniqueStationaryError(
            "chain has multiple closed communicating classes; every one "
            "carries its own stationary distribution"
        )

    if start is None:
        x = np.full(k, 1.0 / k)
    else:
        x = np.clip(np.asarray(start, dtype=float)[supported], 0.0, None)
        x = np.full(k, 1.0 / k) if x.sum() <= 0.0 else x / x.sum()

    method = None
    for _ in range(max_iterations):
        x_next = x @ Q
        x_next /= x_next.sum()
        if np.abs(x_next - x).max() < tolerance:
            x = x_next
            method = "power-iteration"
            break
        x = x_next
    if method is None:
        # periodic chains oscillate under iteration; the balance equations
        # (Q^T - I) pi = 0 with sum(pi) = 1 still pin the unique fixed point
        A = np.vstack([Q.T - np.eye(k), np.ones((1, k))])
        b = np.concatenate([np.zeros(k), [1.0]])
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        if x.min() < -1e-9:
            raise NoUniqueStationaryError("linear solve produced negative probabilities")
        x = np.clip(x, 0.0, None)
        x /= x.sum()
        method = "linear-solve"

    residual = float(np.abs(x @ Q - x).max())
    if residual > residual_tolerance:
        raise NoUniqueStationaryError(
            f"no stationary fixed point found (residual {residual:.3e} "
            f"exceeds {residual_tolerance:.1e})"
        )
    probabilities = np.zeros(P.shape[0])
    probabilities[supported] = x
    return StationaryDistribution(
        probabilities=tuple(float(p) for p in probabilities),
        residual=residual,
        method=method,
    )


def steady_state_lag(
    matrix_set: TransitionMatrixSet,
    tolerance: float = 0.01,
    *,
    start: Sequence[float] | None = None,
) -> int:
    """Smallest lag whose supported rows all sit within ``tolerance``
    (infinity norm) of the one-step stationary distribution.

    Falls back to ``max_lag`` when no lag qualifies. Unavailable lags
    can never qualify and are skipped.
    """
    pi = np.array(stationary(matrix_set.matrix(1), start=start).probabilities)
    for lag in range(1, matrix_set.max_lag + 1):
        support = matrix_set.support(lag)
        if not support.any():
            continue
        gap = np.abs(matrix_set.matrix(lag)[support] - pi).max()
        if gap < tolerance:
            return lag
    return matrix_set.max_lag
