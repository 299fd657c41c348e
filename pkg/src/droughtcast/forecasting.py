"""The weighted-Markov-chain predictor.

The next-step class distribution is a convex combination of transition
rows: for each lag t, take the row of the lag-t matrix belonging to the
state observed t months before the target, weight it by the lag's
normalized kappa weight, and sum. The forecast class is the argmax,
with a deterministic three-stage tie-break.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .classification import DEFAULT_SCHEME, ClassificationScheme, ClassSequence, DroughtClass
from .errors import NoForecastError
from .kappa import LagWeightProfile, pair_counts_from_codes, profile_from_counts, sequence_codes
from .transitions import (
    StationaryDistribution,
    TransitionMatrixSet,
    matrices_from_counts,
    stationary,
    steady_state_lag,
)


@dataclass(frozen=True)
class ForecastDistribution:
    """One-step (or one iterated step) class probabilities and the pick.

    ``renormalized`` is set when any weight mass had to be redistributed
    because a lag was unusable (missing history month or unsupported
    transition row). ``used_lags`` lists the lags that contributed.
    """

    probabilities: tuple[float, ...]
    predicted_class: DroughtClass
    used_lags: tuple[int, ...]
    renormalized: bool
    tie_break_applied: bool

    def __post_init__(self) -> None:
        p = self.probabilities
        if any(not np.isfinite(v) or v < 0.0 for v in p):
            raise ValueError("forecast probabilities must be finite and >= 0")
        if abs(sum(p) - 1.0) > 1e-10:
            raise ValueError("forecast probabilities must sum to 1")
        if p[self.predicted_class.rank - 1] != max(p):
            raise ValueError("predicted class must attain the maximum probability")


@dataclass(frozen=True)
class TraceRecord:
    """One lag's contribution to a forecast.

    ``weight`` is the profile weight; ``applied_weight`` is the weight
    actually used after dropping unusable lags (0 when this lag was
    dropped). ``source_state`` is None when the history has no
    observation t months back.
    """

    lag: int
    source_state: DroughtClass | None
    row: tuple[float, ...] | None
    weight: float
    applied_weight: float
    used: bool


@dataclass(frozen=True)
class ForecastTrace:
    """Per-lag working of a forecast; the weighted sum is reproducible
    from the records exactly."""

    records: tuple[TraceRecord, ...]
    distribution: ForecastDistribution


def _select_class(
    probabilities: np.ndarray,
    scheme: ClassificationScheme,
    frequencies: Sequence[float] | None,
) -> tuple[DroughtClass, bool]:
    best = probabilities.max()
    tied = [i for i in range(probabilities.size) if probabilities[i] == best]
    if len(tied) == 1:
        return scheme.classes[tied[0]], False
    if frequencies is not None:
        freq = np.asarray(frequencies, dtype=float)
        top = max(freq[i] for i in tied)
        tied = [i for i in tied if freq[i] == top]
        if len(tied) == 1:
            return scheme.classes[tied[0]], True
    nearest = min(abs(i + 1 - scheme.neutral_rank) for i in tied)
    tied = [i for i in tied if abs(i + 1 - scheme.neutral_rank) == nearest]
    return scheme.classes[min(tied)], True


def argmax_class(
    probabilities: Sequence[float],
    scheme: ClassificationScheme | None = None,
    frequencies: Sequence[float] | None = None,
) -> DroughtClass:
    """The class with maximal probability, deterministically tie-broken.

    Exact ties go to (1) the class with the higher historical marginal
    frequency (skipped when ``frequencies`` is omitted), then (2) the
    class ordinally closest to the neutral class, then (3) the lower
    rank.
    """
    scheme = scheme or DEFAULT_SCHEME
    p = np.asarray(probabilities, dtype=float)
    if p.size != scheme.class_count:
        raise ValueError(
            f"expected {scheme.class_count} probabilities, got {p.size}"
        )
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise ValueError("probabilities must be finite and >= 0")
    return _select_class(p, scheme, frequencies)[0]


def _combine(
    history: Sequence[DroughtClass | None],
    matrices: TransitionMatrixSet,
    weights: LagWeightProfile,
    scheme: ClassificationScheme,
    frequencies: Sequence[float] | None,
) -> tuple[tuple[TraceRecord, ...], ForecastDistribution]:
    if len(history) < 1:
        raise ValueError("history must contain at least one observation")
    if matrices.max_lag != weights.max_lag:
        raise ValueError(
            f"matrices cover {matrices.max_lag} lags but weights cover {weights.max_lag}"
        )
    if matrices.class_count != scheme.class_count:
        raise ValueError("matrices and scheme disagree on the class count")

    m = matrices.max_lag
    usable: list[int] = []
    states: list[DroughtClass | None] = []
    rows: list[np.ndarray | None] = []
    for t in range(1, m + 1):
        state = history[-t] if t <= len(history) else None
        states.append(state)
        if state is None:
            rows.append(None)
            continue
        if not 1 <= state.rank <= matrices.class_count:
            raise ValueError(
                f"history state {state} is outside the {matrices.class_count}-class scheme"
            )
        row = matrices.matrix(t)[state.rank - 1]
        rows.append(row)
        if row.sum() > 0.0:
            usable.append(t)
    if not usable:
        raise NoForecastError(
            "no lag is usable: each is beyond the observed history or has "
            "an unsupported transition row"
        )

    total = sum(weights.weights[t - 1] for t in usable)
    if total > 0.0:
        applied = {t: weights.weights[t - 1] / total for t in usable}
        renormalized = total < 1.0 - 1e-12
    else:
        # the entire weight mass sat on dropped lags; spread it evenly
        applied = {t: 1.0 / len(usable) for t in usable}
        renormalized = True
    used = [t for t in usable if applied[t] > 0.0]

    combined = np.zeros(matrices.class_count)
    for t in used:
        combined += applied[t] * rows[t - 1]
    predicted, tie_break = _select_class(combined, scheme, frequencies)

    records = tuple(
        TraceRecord(
            lag=t,
            source_state=states[t - 1],
            row=None if rows[t - 1] is None else tuple(float(v) for v in rows[t - 1]),
            weight=weights.weights[t - 1],
            applied_weight=applied.get(t, 0.0),
            used=t in used,
        )
        for t in range(1, m + 1)
    )
    distribution = ForecastDistribution(
        probabilities=tuple(float(v) for v in combined),
        predicted_class=predicted,
        used_lags=tuple(used),
        renormalized=renormalized,
        tie_break_applied=tie_break,
    )
    return records, distribution


def predict_one(
    history: Sequence[DroughtClass | None],
    matrices: TransitionMatrixSet,
    weights: LagWeightProfile,
    *,
    scheme: ClassificationScheme | None = None,
    frequencies: Sequence[float] | None = None,
) -> ForecastDistribution:
    """Weighted one-step-ahead forecast from the most recent states.

    ``history`` is ordered oldest to newest; entry -t feeds lag t. Lags
    whose source month is missing, or whose transition row has no
    support, are dropped and the remaining weights renormalized.
    """
    return _combine(history, matrices, weights, scheme or DEFAULT_SCHEME, frequencies)[1]


def forecast_trace(
    history: Sequence[DroughtClass | None],
    matrices: TransitionMatrixSet,
    weights: LagWeightProfile,
    *,
    scheme: ClassificationScheme | None = None,
    frequencies: Sequence[float] | None = None,
) -> ForecastTrace:
    """Like predict_one, but keeps the per-lag working for reporting."""
    records, distribution = _combine(
        history, matrices, weights, scheme or DEFAULT_SCHEME, frequencies
    )
    return ForecastTrace(records=records, distribution=distribution)


def predict_iterated(
    history: Sequence[DroughtClass | None],
    matrices: TransitionMatrixSet,
    weights: LagWeightProfile,
    horizon: int,
    *,
    scheme: ClassificationScheme | None = None,
    frequencies: Sequence[float] | None = None,
    propagate: bool = False,
) -> list[ForecastDistribution]:
    """Multi-step forecast, horizon >= 1 steps ahead.

    The point forecast (argmax class) is appended to the history and the
    predictor re-applied, so each step conditions on predicted classes.
    ``propagate=True`` switches to an extension mode in which the full
    step-1 distribution is pushed through the lag-1 matrix instead of
    collapsing to a point forecast at each step.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    scheme = scheme or DEFAULT_SCHEME
    first = predict_one(
        history, matrices, weights, scheme=scheme, frequencies=frequencies
    )
    out = [first]
    if propagate:
        p = np.array(first.probabilities)
        p1 = matrices.matrix(1)
        for _ in range(horizon - 1):
            p = p @ p1
            mass = p.sum()
            if mass <= 0.0:
                raise NoForecastError("probability mass vanished during propagation")
            renormalized = mass < 1.0 - 1e-12
            p = p / mass
            cls, tie_break = _select_class(p, scheme, frequencies)
            out.append(
                ForecastDistribution(
                    probabilities=tuple(float(v) for v in p),
                    predicted_class=cls,
                    used_lags=(1,),
                    renormalized=renormalized,
                    tie_break_applied=tie_break,
                )
            )
        return out
    rolling = list(history)
    for _ in range(horizon - 1):
        rolling.append(out[-1].predicted_class)
        out.append(
            predict_one(
                rolling, matrices, weights, scheme=scheme, frequencies=frequencies
            )
        )
    return out


class WeightedMarkovForecaster(BaseEstimator):
    """Estimator wrapping the full fit-and-forecast pipeline.

    ``fit`` takes a :class:`ClassSequence`, estimates the per-lag
    transition matrices and the kappa weight profile, and remembers the
    trailing states. ``predict`` then forecasts the months following the
    training data (or any explicitly supplied history).

    Parameters
    ----------
    max_lag:
        Number of lags to combine, or "auto" to pick the lag at which
        the chain's rows first come within ``steady_tolerance`` of the
        stationary distribution (capped at ``auto_max_lag``).
    weight_basis:
        "kappa" weights lags by |kappa|, "z" by |z-statistic|.
    smoothing:
        Laplace pseudo-count added to transition cells (0 = raw).
    mode:
        "empirical" estimates each lag from its own pairs; "power"
        raises the lag-1 matrix to the t-th power instead.
    """

    def __init__(
        self,
        max_lag: int | str = 7,
        weight_basis: str = "kappa",
        smoothing: float = 0.0,
        mode: str = "empirical",
        steady_tolerance: float = 0.01,
        auto_max_lag: int = 12,
    ):
        self.max_lag = max_lag
        self.weight_basis = weight_basis
        self.smoothing = smoothing
        self.mode = mode
        self.steady_tolerance = steady_tolerance
        self.auto_max_lag = auto_max_lag

    def fit(self, X: ClassSequence, y=None) -> "WeightedMarkovForecaster":
        if not isinstance(X, ClassSequence):
            raise TypeError(f"expected a ClassSequence, got {type(X).__name__}")
        if self.max_lag == "auto":
            cap = int(self.auto_max_lag)
        elif isinstance(self.max_lag, int) and self.max_lag >= 1:
            cap = self.max_lag
        else:
            raise ValueError(f'max_lag must be a positive integer or "auto", got {self.max_lag!r}')

        scheme = X.scheme
        codes = sequence_codes(X)
        counts = [
            pair_counts_from_codes(codes, scheme.class_count, lag)
            for lag in range(1, cap + 1)
        ]
        frequencies = np.bincount(codes[codes >= 0], minlength=scheme.class_count)

        if self.max_lag == "auto":
            probe = matrices_from_counts(counts, smoothing=self.smoothing, mode=self.mode)
            m = steady_state_lag(probe, self.steady_tolerance, start=frequencies)
            counts = counts[:m]
        else:
            m = cap

        self.scheme_ = scheme
        self.max_lag_ = m
        self.class_frequencies_ = tuple(int(c) for c in frequencies)
        self.transitions_ = matrices_from_counts(
            counts, smoothing=self.smoothing, mode=self.mode
        )
        self.weight_profile_ = profile_from_counts(counts, self.weight_basis)
        self.history_ = tuple(X.values[-m:])
        return self

    def _history(self, X) -> Sequence[DroughtClass | None]:
        if X is None:
            return self.history_
        if isinstance(X, ClassSequence):
            return X.values[-self.max_lag_ :]
        return list(X)

    def forecast(
        self, X=None, horizon: int = 1, propagate: bool = False
    ) -> list[ForecastDistribution]:
        """Full forecast distributions for 1..horizon steps ahead."""
        check_is_fitted(self, "transitions_")
        return predict_iterated(
            self._history(X),
            self.transitions_,
            self.weight_profile_,
            horizon,
            scheme=self.scheme_,
            frequencies=self.class_frequencies_,
            propagate=propagate,
        )

    def predict(self, X=None, horizon: int = 1) -> list[DroughtClass]:
        """Point forecasts (argmax classes) for 1..horizon steps ahead."""
        return [f.predicted_class for f in self.forecast(X, horizon)]

    def predict_proba(self, X=None, horizon: int = 1) -> np.ndarray:
        """Forecast probabilities, one row per step ahead."""
        return np.array([f.probabilities for f in self.forecast(X, horizon)])

    def trace(self, X=None) -> ForecastTrace:
        """One-step forecast with the per-lag working attached."""
        check_is_fitted(self, "transitions_")
        return forecast_trace(
            self._history(X),
            self.transitions_,
            self.weight_profile_,
            scheme=self.scheme_,
            frequencies=self.class_frequencies_,
        )

    def steady_state(self) -> StationaryDistribution:
        """Stationary distribution of the fitted one-step chain."""
        check_is_fitted(self, "transitions_")
        return stationary(self.transitions_.matrix(1), start=self.class_frequencies_)

    def steady_lag(self, tolerance: float | None = None) -> int:
        """Lag at which the fitted chain's rows first look stationary."""
        check_is_fitted(self, "transitions_")
        return steady_state_lag(
            self.transitions_,
            self.steady_tolerance if tolerance is None else tolerance,
            start=self.class_frequencies_,
        )
