"""Rolling-origin backtesting of the weighted forecaster against
baselines, plus the forecast-versus-stationary comparison.

Every fold trains strictly on months before its target month, so no
estimate ever sees data at or after the forecast origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classification import ClassSequence, DroughtClass
from .errors import InsufficientDataError, NoForecastError, NumericalError
from .forecasting import ForecastDistribution, argmax_class, predict_one
from .kappa import pair_counts_from_codes, profile_from_counts, sequence_codes
from .series import Period
from .transitions import StationaryDistribution, matrices_from_counts, stationary

METHODS = ("wmc", "markov-lag1", "climatology")


@dataclass(frozen=True)
class MethodScore:
    """Hit tally for one forecasting method over the evaluated folds."""

    hits: int
    evaluated: int

    @property
    def hit_rate(self) -> float | None:
        return None if self.evaluated == 0 else self.hits / self.evaluated


@dataclass(frozen=True)
class FoldRecord:
    """One holdout month: what was observed and what the WMC predicted."""

    origin: Period
    observed: DroughtClass
    predicted: DroughtClass | None
    probabilities: tuple[float, ...] | None


@dataclass(frozen=True)
class SteadyComparison:
    """Per-class gap between a forecast and the stationary distribution."""

    labels: tuple[str, ...]
    forecast: tuple[float, ...]
    stationary: tuple[float, ...]
    differences: tuple[float, ...]
    max_abs_difference: float


def compare_steady(
    forecast: ForecastDistribution,
    steady: StationaryDistribution,
    labels: Sequence[str],
) -> SteadyComparison:
    """Elementwise forecast-minus-stationary differences.

    Large gaps are a finding, not a failure: they flag months whose
    short-term outlook departs from climatology.
    """
    if not (len(forecast.probabilities) == len(steady.probabilities) == len(labels)):
        raise ValueError("forecast, stationary vector, and labels must share one class set")
    diffs = tuple(
        f - s for f, s in zip(forecast.probabilities, steady.probabilities)
    )
    return SteadyComparison(
        labels=tuple(labels),
        forecast=forecast.probabilities,
        stationary=steady.probabilities,
        differences=diffs,
        max_abs_difference=max(abs(v) for v in diffs) if diffs else 0.0,
    )


@dataclass(frozen=True)
class BacktestReport:
    """Aggregated rolling-origin results for one station.

    ``confusion`` covers the WMC forecasts only (rows = observed class,
    columns = predicted class), so trace/total equals the WMC hit rate.
    ``skipped`` lists (month, reason) for requested folds that could not
    be evaluated.
    """

    station_id: str
    labels: tuple[str, ...]
    max_lag: int
    weight_basis: str
    refit: bool
    requested_folds: int
    folds: tuple[FoldRecord, ...]
    skipped: tuple[tuple[str, str], ...]
    scores: dict[str, MethodScore]
    confusion: tuple[tuple[int, ...], ...]
    steady_comparison: SteadyComparison | None
    notes: tuple[str, ...] = field(default=())

    @property
    def hit_rate(self) -> float | None:
        return self.scores["wmc"].hit_rate


def _fit_components(codes: np.ndarray, d: int, max_lag: int, basis: str, smoothing: float, mode: str):
    counts = [pair_counts_from_codes(codes, d, lag) for lag in range(1, max_lag + 1)]
    matrices = matrices_from_counts(counts, smoothing=smoothing, mode=mode)
    profile = profile_from_counts(counts, basis)
    frequencies = np.bincount(codes[codes >= 0], minlength=d)
    return matrices, profile, frequencies


def backtest(
    seq: ClassSequence,
    *,
    max_lag: int = 7,
    weight_basis: str = "kappa",
    holdout_months: int = 12,
    refit: bool = True,
    min_train: int | None = None,
    smoothing: float = 0.0,
    mode: str = "empirical",
) -> BacktestReport:
    """Rolling one-step-ahead evaluation over the trailing months.

    For each of the last ``holdout_months`` months, the forecaster is
    fitted on everything strictly earlier (once, before the first fold,
    when ``refit`` is false) and its prediction compared with the
    observed class. The markov-lag1 baseline uses only the lag-1 row of
    the last state; climatology predicts the training window's modal
    class. ``min_train`` (default 10 x max_lag) is the fewest
    non-missing training months a fold may have.
    """
    if not isinstance(seq, ClassSequence):
        raise TypeError(f"expected a ClassSequence, got {type(seq).__name__}")
    if holdout_months < 1:
        raise ValueError(f"holdout_months must be >= 1, got {holdout_months}")
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    scheme = seq.scheme
    d = scheme.class_count
    min_train = 10 * max_lag if min_train is None else min_train
    codes = sequence_codes(seq)
    n = codes.size

    targets = range(max(1, n - holdout_months), n)
    if len(targets) == 0:
        raise InsufficientDataError("series has no month with any earlier training data")
    valid_before = np.concatenate(([0], np.cumsum(codes >= 0)))
    if valid_before[targets[-1]] < min_train:
        raise InsufficientDataError(
            f"largest training window holds {int(valid_before[targets[-1]])} non-missing "
            f"months; at least {min_train} are required (min_train)"
        )

    fixed = None
    if not refit:
        fixed = _fit_components(codes[: targets[0]], d, max_lag, weight_basis, smoothing, mode)

    folds: list[FoldRecord] = []
    skipped: list[tuple[str, str]] = []
    tallies = {m: [0, 0] for m in METHODS}
    confusion = np.zeros((d, d), dtype=np.int64)

    for t in targets:
        origin = seq.period_at(t)
        if codes[t] < 0:
            skipped.append((str(origin), "observed class missing"))
            continue
        if valid_before[t] < min_train:
            skipped.append(
                (str(origin), f"training window has {int(valid_before[t])} non-missing months")
            )
            continue
        if refit:
            try:
                matrices, profile, frequencies = _fit_components(
                    codes[:t], d, max_lag, weight_basis, smoothing, mode
                )
            except InsufficientDataError as exc:
                skipped.append((str(origin), str(exc)))
                continue
        else:
            matrices, profile, frequencies = fixed

        observed = scheme.classes[codes[t]]
        history = [
            None if c < 0 else scheme.classes[c] for c in codes[max(0, t - max_lag) : t]
        ]

        predicted: DroughtClass | None = None
        probabilities: tuple[float, ...] | None = None
        try:
            dist = predict_one(
                history, matrices, profile, scheme=scheme, frequencies=frequencies
            )
            predicted = dist.predicted_class
            probabilities = dist.probabilities
        except NoForecastError:
            pass

        last = codes[t - 1]
        lag1_row = matrices.matrix(1)[last] if last >= 0 else None
        lag1 = (
            argmax_class(lag1_row, scheme, frequencies)
            if lag1_row is not None and lag1_row.sum() > 0.0
            else None
        )
        total = frequencies.sum()
        modal = (
            argmax_class(frequencies / total, scheme, frequencies) if total > 0 else None
        )

        for name, guess in (("wmc", predicted), ("markov-lag1", lag1), ("climatology", modal)):
            if guess is not None:
                tallies[name][1] += 1
                tallies[name][0] += int(guess == observed)
        if predicted is not None:
            confusion[observed.rank - 1, predicted.rank - 1] += 1
        folds.append(
            FoldRecord(
                origin=origin,
                observed=observed,
                predicted=predicted,
                probabilities=probabilities,
            )
        )

    if not folds:
        reasons = "; ".join(sorted(set(r for _, r in skipped))) or "no folds requested"
        raise InsufficientDataError(f"every holdout fold was skipped: {reasons}")

    notes: list[str] = []
    steady_comparison = None
    try:
        matrices, profile, frequencies = _fit_components(
            codes, d, max_lag, weight_basis, smoothing, mode
        )
        history = [None if c < 0 else scheme.classes[c] for c in codes[-max_lag:]]
        final = predict_one(
            history, matrices, profile, scheme=scheme, frequencies=frequencies
        )
        steady = stationary(matrices.matrix(1), start=frequencies)
        steady_comparison = compare_steady(final, steady, scheme.labels)
    except (NumericalError, InsufficientDataError) as exc:
        notes.append(f"steady-state comparison unavailable: {exc}")

    return BacktestReport(
        station_id=seq.station_id,
        labels=scheme.labels,
        max_lag=max_lag,
        weight_basis=weight_basis,
        refit=refit,
        requested_folds=len(targets),
        folds=tuple(folds),
        skipped=tuple(skipped),
        scores={m: MethodScore(hits=h, evaluated=e) for m, (h, e) in tallies.items()},
        confusion=tuple(tuple(int(c) for c in row) for row in confusion),
        steady_comparison=steady_comparison,
        notes=tuple(notes),
    )
