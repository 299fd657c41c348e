"""Turning a raw climate variable into a standardized index.

Each observation is mapped through the cumulative distribution of a
fitted parametric model and then through the standard normal quantile
function, so the output is an equiprobability z-score. Fitting is done
either per calendar month (the default, which removes seasonality) or
once on the pooled sample.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .distributions import FAMILIES, METHODS, fit_candidates, select_model
from .errors import DataError
from .series import IndexSeries, MonthlySeries

GROUPINGS = ("month", "pooled")

# Fitted CDF values are clamped away from 0 and 1 before the normal
# quantile so an out-of-range observation yields a large finite index.
CDF_EPSILON = 1e-6


def _require_series(X) -> MonthlySeries:
    if isinstance(X, MonthlySeries):
        return X
    raise TypeError(
        "expected a monthly series (calendar months are needed to group "
        f"observations), got {type(X).__name__}"
    )


def _group_samples(series: MonthlySeries, grouping: str):
    """Yield (group key, sample list) pairs of the non-missing values."""
    if grouping == "pooled":
        yield "pooled", [v for v in series.values if v is not None]
        return
    buckets: dict[int, list[float]] = {m: [] for m in range(1, 13)}
    for offset, value in enumerate(series.values):
        if value is not None:
            buckets[(series.start + offset).month].append(value)
    yield from buckets.items()


class IndexStandardizer(TransformerMixin, BaseEstimator):
    """Fit per-group distributions and map observations to index values.

    Parameters
    ----------
    grouping:
        "month" fits one model per calendar month; "pooled" fits a
        single model on all values.
    families, methods:
        Candidate distribution families and estimation methods handed to
        the fitting routine; the AIC-minimal combination wins per group.
    min_samples:
        Fewest non-missing values a group may have before fitting fails.
    shift_nonpositive:
        Allow positive-support families on data containing zeros or
        negatives by shifting the sample first.

    Attributes
    ----------
    models_: dict mapping group key (month number or "pooled") to the
        selected :class:`~droughtcast.distributions.FittedModel`.
    candidate_fits_: dict mapping group key to every converged fit,
        kept for diagnostics and reporting.
    """

    def __init__(
        self,
        grouping: str = "month",
        families: tuple[str, ...] = FAMILIES,
        methods: tuple[str, ...] = METHODS,
        min_samples: int = 20,
        shift_nonpositive: bool = False,
    ):
        self.grouping = grouping
        self.families = families
        self.methods = methods
        self.min_samples = min_samples
        self.shift_nonpositive = shift_nonpositive

    def fit(self, X, y=None):
        series = _require_series(X)
        if self.grouping not in GROUPINGS:
            raise ValueError(f"grouping must be one of {GROUPINGS}, got {self.grouping!r}")
        self.candidate_fits_ = {}
        self.models_ = {}
        for group, samples in _group_samples(series, self.grouping):
            fits = fit_candidates(
                samples,
                families=tuple(self.families),
                methods=tuple(self.methods),
                min_samples=self.min_samples,
                shift_nonpositive=self.shift_nonpositive,
                group=group,
            )
            self.candidate_fits_[group] = fits
            self.models_[group] = select_model(fits)
        return self

    def transform(self, X) -> IndexSeries:
        check_is_fitted(self, "models_")
        series = _require_series(X)
        out = np.full(len(series.values), np.nan)
        offsets = np.array(
            [i for i, v in enumerate(series.values) if v is not None], dtype=int
        )
        if offsets.size:
            vals = np.array([series.values[i] for i in offsets], dtype=float)
            if self.grouping == "month":
                months = np.array([(series.start + int(i)).month for i in offsets])
            else:
                months = np.zeros(offsets.size, dtype=int)
            for group in np.unique(months):
                key = "pooled" if group == 0 else int(group)
                model = self.models_.get(key)
                if model is None:
                    raise DataError(f"no fitted model for group {key!r}")
                sel = months == group
                p = np.clip(model.cdf(vals[sel]), CDF_EPSILON, 1.0 - CDF_EPSILON)
                out[offsets[sel]] = stats.norm.ppf(p)
        return IndexSeries(
            station_id=series.station_id,
            start=series.start,
            values=tuple(None if math.isnan(v) else float(v) for v in out),
        )


def standardize(series: MonthlySeries, **params) -> IndexSeries:
    """One-shot fit-and-transform with :class:`IndexStandardizer`."""
    return IndexStandardizer(**params).fit_transform(series)
