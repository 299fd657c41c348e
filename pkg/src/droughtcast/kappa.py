"""Quadratic-weighted Cohen's kappa between a class sequence and its
lagged self, and the normalization of per-lag kappas into the weight
vector used by the weighted Markov forecaster.

Disagreement between ranks i and j is penalized by (i - j)^2, so kappa
here is the quadratic-weighted variant. The weight vector divides each
lag's |kappa| (or |z|) by the sum of absolute values over the defined
lags, which keeps weights non-negative even when some kappas are
negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .classification import ClassSequence
from .errors import EmptyTableError, InsufficientDataError

WEIGHT_BASES = ("kappa", "z")


def sequence_codes(seq: ClassSequence) -> np.ndarray:
    """The sequence as 0-based rank codes, with -1 marking gaps."""
    return np.fromiter(
        (-1 if v is None else v.rank - 1 for v in seq.values),
        dtype=np.int64,
        count=len(seq),
    )


def pair_counts_from_codes(codes: np.ndarray, class_count: int, lag: int) -> np.ndarray:
    """Count (earlier, later) pairs at the given lag in a code array.

    A pair (k, k + lag) is counted only when every month k..k + lag is
    present, i.e. both ends lie in the same contiguous non-missing run,
    so gaps never create artificial transitions. Returns a d x d integer
    matrix indexed by code.
    """
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    d = class_count
    n = codes.size
    if n <= lag:
        return np.zeros((d, d), dtype=np.int64)
    present = np.concatenate(([0], np.cumsum(codes >= 0)))
    # window [k, k+lag] is gap-free exactly when it holds lag+1 present months
    full = (present[lag + 1 :] - present[: n - lag]) == lag + 1
    pairs = codes[: n - lag][full] * d + codes[lag:][full]
    return np.bincount(pairs, minlength=d * d).reshape(d, d)


def lagged_pair_counts(seq: ClassSequence, lag: int) -> np.ndarray:
    """Pair counts at one lag for a class sequence (see pair_counts_from_codes)."""
    return pair_counts_from_codes(sequence_codes(seq), seq.scheme.class_count, lag)


def all_lag_counts(seq: ClassSequence, max_lag: int) -> tuple[np.ndarray, ...]:
    """Pair-count matrices for every lag 1..max_lag, in one pass."""
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    codes = sequence_codes(seq)
    d = seq.scheme.class_count
    return tuple(pair_counts_from_codes(codes, d, lag) for lag in range(1, max_lag + 1))


@dataclass(frozen=True)
class ContingencyTable:
    """Joint proportions of two paired categorical ratings.

    ``cells[i][j]`` is the proportion of pairs whose earlier member had
    rank i + 1 and later member rank j + 1.
    """

    cells: tuple[tuple[float, ...], ...]
    pair_count: int

    def __post_init__(self) -> None:
        d = len(self.cells)
        if d == 0 or any(len(row) != d for row in self.cells):
            raise ValueError("cells must form a non-empty square matrix")
        flat = [p for row in self.cells for p in row]
        if any(not math.isfinite(p) or p < 0.0 for p in flat):
            raise ValueError("cell proportions must be finite and non-negative")
        if abs(sum(flat) - 1.0) > 1e-12:
            raise ValueError("cell proportions must sum to 1")
        if self.pair_count < 1:
            raise ValueError("pair_count must be >= 1")

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "ContingencyTable":
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total <= 0:
            raise EmptyTableError("no pairs to tabulate")
        cells = counts / total
        # renormalize exactly so the sum-to-one invariant survives float division
        cells = cells / cells.sum()
        return cls(
            cells=tuple(tuple(float(p) for p in row) for row in cells),
            pair_count=int(total),
        )

    @property
    def class_count(self) -> int:
        return len(self.cells)

    def as_array(self) -> np.ndarray:
        return np.array(self.cells, dtype=float)

    @property
    def row_marginals(self) -> tuple[float, ...]:
        return tuple(float(s) for s in self.as_array().sum(axis=1))

    @property
    def col_marginals(self) -> tuple[float, ...]:
        return tuple(float(s) for s in self.as_array().sum(axis=0))


def lagged_table(seq: ClassSequence, lag: int) -> ContingencyTable:
    """Joint table of (X_{k-lag}, X_k) pairs within contiguous runs."""
    counts = lagged_pair_counts(seq, lag)
    if counts.sum() == 0:
        raise EmptyTableError(f"no valid pairs at lag {lag}")
    return ContingencyTable.from_counts(counts)


@dataclass(frozen=True)
class KappaResult:
    """Kappa with its large-sample null z-statistic and two-sided p.

    ``kappa`` is ``None`` when both marginals sit entirely on one
    identical class, which zeroes the chance-disagreement denominator.
    ``z_stat``/``p_value`` are ``None`` whenever kappa is, or when the
    null variance degenerates to zero.
    """

    kappa: float | None
    z_stat: float | None
    p_value: float | None


def weighted_kappa(table: ContingencyTable) -> KappaResult:
    """Quadratic-weighted kappa of a joint proportion table.

    kappa = 1 - (sum_ij v_ij p_ij) / (sum_ij v_ij p_i. p_.j) with
    disagreement weights v_ij = (i - j)^2. The z-statistic uses the
    large-sample standard error of weighted kappa under the null of
    independence (Fleiss-Cohen form), and the p-value is the two-sided
    normal approximation.
    """
    p = table.as_array()
    d = table.class_count
    ranks = np.arange(d, dtype=float)
    v = np.subtract.outer(ranks, ranks) ** 2
    pi = p.sum(axis=1)
    pj = p.sum(axis=0)
    chance = np.outer(pi, pj)
    denom = float((v * chance).sum())
    if denom == 0.0:
        return KappaResult(kappa=None, z_stat=None, p_value=None)
    kappa = 1.0 - float((v * p).sum()) / denom

    # Null variance in the equivalent agreement-weight formulation
    # (w = 1 - v / (d-1)^2), the standard form of the Fleiss-Cohen SE.
    w = 1.0 - v / (d - 1) ** 2
    pe = float((w * chance).sum())
    w_row = w @ pj
    w_col = w.T @ pi
    var0 = float((chance * (w - (w_row[:, None] + w_col[None, :])) ** 2).sum()) - pe**2
    var0 /= table.pair_count * (1.0 - pe) ** 2
    if var0 <= 0.0:
        return KappaResult(kappa=kappa, z_stat=None, p_value=None)
    z = kappa / math.sqrt(var0)
    return KappaResult(kappa=kappa, z_stat=z, p_value=float(2.0 * stats.norm.sf(abs(z))))


@dataclass(frozen=True)
class LagWeight:
    """Agreement diagnostics and the normalized weight for one lag."""

    lag: int
    kappa: float | None
    z_stat: float | None
    p_value: float | None
    weight: float
    pair_count: int


@dataclass(frozen=True)
class LagWeightProfile:
    """Per-lag kappa diagnostics plus the normalized weight vector.

    ``uniform_fallback`` is set when every basis value was undefined or
    zero, in which case the weight mass is spread uniformly over the
    lags that had at least one valid pair.
    """

    max_lag: int
    basis: str
    lags: tuple[LagWeight, ...]
    uniform_fallback: bool

    def __post_init__(self) -> None:
        if self.basis not in WEIGHT_BASES:
            raise ValueError(f"basis must be one of {WEIGHT_BASES}, got {self.basis!r}")
        if len(self.lags) != self.max_lag:
            raise ValueError("profile must carry exactly one record per lag")

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(rec.weight for rec in self.lags)


def normalize_weights(
    values: Sequence[float | None],
    available: Iterable[bool] | None = None,
) -> tuple[tuple[float, ...], bool]:
    """Normalize basis values to weights: W_t = |v_t| / sum |v_u|.

    ``None`` entries are undefined: they get weight 0 and stay out of
    the normalizer. If nothing is left to normalize (all undefined or
    all zero), weights fall back to uniform over the ``available``
    entries (default: the defined ones) and the second return value is
    True.
    """
    vals = list(values)
    if not vals:
        raise ValueError("cannot normalize an empty weight vector")
    avail = [v is not None for v in vals] if available is None else list(available)
    total = sum(abs(v) for v in vals if v is not None)
    if total > 0.0:
        return tuple(abs(v) / total if v is not None else 0.0 for v in vals), False
    n_avail = sum(avail)
    if n_avail == 0:
        raise InsufficientDataError("no lag has any valid pairs to weight")
    return tuple(1.0 / n_avail if a else 0.0 for a in avail), True


def profile_from_counts(
    counts_by_lag: Sequence[np.ndarray], basis: str = "kappa"
) -> LagWeightProfile:
    """Build a weight profile from precomputed per-lag pair counts.

    Lags with no valid pairs, or with undefined kappa, contribute weight
    0 without failing the whole profile; only a profile with no usable
    lag at all raises.
    """
    if basis not in WEIGHT_BASES:
        raise ValueError(f"basis must be one of {WEIGHT_BASES}, got {basis!r}")
    if not counts_by_lag:
        raise ValueError("need counts for at least one lag")

    results: list[KappaResult] = []
    pair_counts: list[int] = []
    for counts in counts_by_lag:
        n = int(np.asarray(counts).sum())
        pair_counts.append(n)
        if n == 0:
            results.append(KappaResult(kappa=None, z_stat=None, p_value=None))
        else:
            results.append(weighted_kappa(ContingencyTable.from_counts(counts)))

    basis_values = [r.kappa if basis == "kappa" else r.z_stat for r in results]
    weights, fallback = normalize_weights(
        basis_values, available=[n > 0 for n in pair_counts]
    )
    max_lag = len(results)
    lags = tuple(
        LagWeight(
            lag=t + 1,
            kappa=results[t].kappa,
            z_stat=results[t].z_stat,
            p_value=results[t].p_value,
            weight=weights[t],
            pair_count=pair_counts[t],
        )
        for t in range(max_lag)
    )
    return LagWeightProfile(
        max_lag=max_lag, basis=basis, lags=lags, uniform_fallback=fallback
    )


def weight_profile(
    seq: ClassSequence, max_lag: int, basis: str = "kappa"
) -> LagWeightProfile:
    """Kappa per lag 1..max_lag, normalized into the WMC weight vector."""
    return profile_from_counts(all_lag_counts(seq, max_lag), basis)
