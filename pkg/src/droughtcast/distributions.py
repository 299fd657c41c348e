"""Candidate-distribution fitting for index standardization.

Three two-parameter families (normal, gamma, log-normal) are fitted by
L-moments and by maximum likelihood; the winning fit is the one with the
lowest AIC. The Kolmogorov-Smirnov statistic is carried along purely as
a goodness-of-fit diagnostic and never drives selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateSampleError, InsufficientDataError, NoViableModelError

FAMILIES = ("normal", "gamma", "log-normal")
METHODS = ("l-moments", "mle")

# Hosking's rational-function approximations for the gamma shape from
# the L-CV ratio t = l2/l1 (low- and high-CV branches).
_GAMMA_LO = (-0.3080, -0.05812, 0.01765)
_GAMMA_HI = (0.7213, -0.5947, -2.1817, 1.2113)


def sample_lmoments(x: np.ndarray) -> tuple[float, float]:
    """First two sample L-moments (unbiased), from order statistics."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if n < 2:
        raise InsufficientDataError("need at least 2 samples for L-moments")
    b0 = x.mean()
    b1 = float(np.dot(np.arange(n), x)) / (n * (n - 1))
    return float(b0), float(2.0 * b1 - b0)


def _gamma_shape_from_lmoments(l1: float, l2: float) -> float:
    if l1 <= 0 or l2 <= 0 or l2 >= l1:
        raise ValueError("L-moments incompatible with a gamma fit")
    cv = l2 / l1
    if cv < 0.5:
        t = math.pi * cv * cv
        a1, a2, a3 = _GAMMA_LO
        return (1.0 + a1 * t) / (t * (1.0 + t * (a2 + t * a3)))
    t = 1.0 - cv
    b1, b2, b3, b4 = _GAMMA_HI
    return t * (b1 + t * b2) / (1.0 + t * (b3 + t * b4))


def _frozen_dist(family: str, params: tuple[float, ...]):
    if family == "normal":
        return stats.norm(loc=params[0], scale=params[1])
    if family == "gamma":
        return stats.gamma(params[0], loc=0.0, scale=params[1])
    return stats.lognorm(params[1], loc=0.0, scale=math.exp(params[0]))


@dataclass(frozen=True)
class FittedModel:
    """One converged (family, method) fit for a sample group.

    ``params`` is family-specific: (mu, sigma) for normal, (shape, scale)
    for gamma, (log-mu, log-sigma) for log-normal. ``shift`` was
    subtracted from the data before fitting (0.0 unless a location shift
    was requested for a positive-support family).
    """

    family: str
    params: tuple[float, ...]
    method: str
    aic: float
    ks_statistic: float
    group: int | str
    shift: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError("parameters must be finite")
        if not (math.isfinite(self.aic) and math.isfinite(self.ks_statistic)):
            raise ValueError("aic and ks_statistic must be finite")
        if self.params[1] <= 0 or (self.family == "gamma" and self.params[0] <= 0):
            raise ValueError(f"{self.family} parameters violate family constraints")

    def cdf(self, x):
        return _frozen_dist(self.family, self.params).cdf(np.asarray(x, dtype=float) - self.shift)

    def ppf(self, q):
        return _frozen_dist(self.family, self.params).ppf(q) + self.shift


def _estimate(family: str, method: str, x: np.ndarray) -> tuple[float, ...]:
    if family == "log-normal":
        return _estimate("normal", method, np.log(x))
    if method == "l-moments":
        l1, l2 = sample_lmoments(x)
        if family == "normal":
            return (l1, l2 * math.sqrt(math.pi))
        shape = _gamma_shape_from_lmoments(l1, l2)
        return (shape, l1 / shape)
    if family == "normal":
        return (float(x.mean()), float(x.std(ddof=0)))
    shape, _, scale = stats.gamma.fit(x, floc=0.0)
    return (float(shape), float(scale))


def fit_candidates(
    samples,
    *,
    families: tuple[str, ...] = FAMILIES,
    methods: tuple[str, ...] = METHODS,
    min_samples: int = 20,
    shift_nonpositive: bool = False,
    group: int | str = "pooled",
) -> list[FittedModel]:
    """Fit every (family, method) combination that converges.

    Families whose support excludes the data (gamma/log-normal with
    non-positive samples) are skipped unless ``shift_nonpositive``
    requests a location shift of ``min(samples) - 1e-9``. Fits that fail
    to converge or produce non-finite criteria are dropped; an empty
    result is left for :func:`select_model` to reject.
    """
    x = np.asarray(list(samples), dtype=float)
    if x.size < min_samples:
        raise InsufficientDataError(
            f"group {group!r}: {x.size} samples, need at least {min_samples}"
        )
    if not np.all(np.isfinite(x)):
        raise DegenerateSampleError(f"group {group!r}: samples must be finite")
    if np.ptp(x) == 0.0:
        raise DegenerateSampleError(f"group {group!r}: all samples equal ({x[0]})")

    fits: list[FittedModel] = []
    for family in families:
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        shift = 0.0
        y = x
        if family in ("gamma", "log-normal") and x.min() <= 0.0:
            if not shift_nonpositive:
                continue
            shift = float(x.min()) - 1e-9
            y = x - shift
        for method in methods:
            try:
                params = tuple(float(p) for p in _estimate(family, method, y))
                dist = _frozen_dist(family, params)
                loglik = float(np.sum(dist.logpdf(y)))
                model = FittedModel(
                    family=family,
                    params=params,
                    method=method,
                    aic=2.0 * len(params) - 2.0 * loglik,
                    ks_statistic=float(stats.kstest(y, dist.cdf).statistic),
                    group=group,
                    shift=shift,
                )
            except (ValueError, FloatingPointError, RuntimeError):
                continue
            fits.append(model)
    return fits


def select_model(fits: list[FittedModel]) -> FittedModel:
    """The fit with minimal AIC.

    Ties go to the smaller KS statistic, then to the fixed family order
    (normal, gamma, log-normal), then to the method order (l-moments,
    mle), so selection is fully deterministic.
    """
    if not fits:
        raise NoViableModelError("no candidate distribution could be fitted")
    return min(
        fits,
        key=lambda f: (f.aic, f.ks_statistic, FAMILIES.index(f.family), METHODS.index(f.method)),
    )
