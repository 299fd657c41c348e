"""Ordinal drought classes and the index-value-to-class mapping.

The default seven-class scheme follows the standard SPI convention, as a
true partition of the real line (threshold values map away from the
near-normal centre, toward the more extreme class):

    ED  x <= -2.0         extreme drought
    SD  -2.0 < x <= -1.5  severe drought
    MD  -1.5 < x <= -1.0  moderate drought
    NN  -1.0 < x < 1.0    near normal
    MW  1.0 <= x < 1.5    moderately wet
    SW  1.5 <= x < 2.0    severely wet
    EW  x >= 2.0          extremely wet

Schemes with other class counts or cut points can be substituted; every
downstream module is parametric in the class count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError
from .series import IndexSeries, MonthlySeries, Period


@dataclass(frozen=True, order=True)
class DroughtClass:
    """One ordinal category; rank 1 is the driest class."""

    rank: int
    label: str

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class ClassificationScheme:
    """An ordered partition of index values into ordinal classes.

    ``cuts[k]`` separates ``classes[k]`` from ``classes[k+1]``; a value
    exactly on a cut belongs to the upper class when ``cut_to_upper[k]``
    is true, otherwise to the lower one. ``neutral_rank`` names the
    climatologically neutral class, used only for forecast tie-breaking.
    """

    classes: tuple[DroughtClass, ...]
    cuts: tuple[float, ...]
    cut_to_upper: tuple[bool, ...]
    neutral_rank: int

    def __post_init__(self) -> None:
        n = len(self.classes)
        if n < 2:
            raise ValueError("a scheme needs at least two classes")
        if tuple(c.rank for c in self.classes) != tuple(range(1, n + 1)):
            raise ValueError("class ranks must be 1..n in order")
        if len(set(c.label for c in self.classes)) != n:
            raise ValueError("class labels must be unique")
        if len(self.cuts) != n - 1 or len(self.cut_to_upper) != n - 1:
            raise ValueError("need exactly one cut (and direction) per class boundary")
        if any(b >= a for a, b in zip(self.cuts[1:], self.cuts[:-1])):
            raise ValueError("cuts must be strictly increasing")
        if not any(c.rank == self.neutral_rank for c in self.classes):
            raise ValueError(f"neutral_rank {self.neutral_rank} is not a class rank")

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)

    def by_rank(self, rank: int) -> DroughtClass:
        if not 1 <= rank <= len(self.classes):
            raise ValueError(f"rank {rank} outside 1..{len(self.classes)}")
        return self.classes[rank - 1]

    def by_label(self, label: str) -> DroughtClass:
        for c in self.classes:
            if c.label == label:
                return c
        raise DataError(f"unknown class label {label!r} (expected one of {self.labels})")

    def classify(self, value: float) -> DroughtClass:
        """Map a finite index value to its unique class."""
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DataError(f"cannot classify non-finite value {value!r}")
        k = 0
        for cut, to_upper in zip(self.cuts, self.cut_to_upper):
            if value > cut or (value == cut and to_upper):
                k += 1
        return self.classes[k]


ED = DroughtClass(1, "ED")
SD = DroughtClass(2, "SD")
MD = DroughtClass(3, "MD")
NN = DroughtClass(4, "NN")
MW = DroughtClass(5, "MW")
SW = DroughtClass(6, "SW")
EW = DroughtClass(7, "EW")

DEFAULT_SCHEME = ClassificationScheme(
    classes=(ED, SD, MD, NN, MW, SW, EW),
    cuts=(-2.0, -1.5, -1.0, 1.0, 1.5, 2.0),
    # dry-side boundaries stay with the drier class, wet-side with the wetter
    cut_to_upper=(False, False, False, True, True, True),
    neutral_rank=NN.rank,
)


@dataclass(frozen=True)
class ClassSequence(MonthlySeries):
    """A gap-aware monthly sequence of drought classes for one station."""

    scheme: ClassificationScheme = field(default=DEFAULT_SCHEME)

    def _check_value(self, value: Any, period: Period) -> None:
        if not isinstance(value, DroughtClass):
            raise DataError(f"expected a DroughtClass at {period}, got {value!r}")
        if self.scheme.by_rank(value.rank) != value:
            raise DataError(f"class {value} at {period} does not belong to the scheme")


def classify(value: float, scheme: ClassificationScheme | None = None) -> DroughtClass:
    """Classify one index value under ``scheme`` (default: seven classes)."""
    return (scheme or DEFAULT_SCHEME).classify(value)


def classify_series(
    series: IndexSeries, scheme: ClassificationScheme | None = None
) -> ClassSequence:
    """Classify a whole index series element-wise; gaps stay gaps."""
    scheme = scheme or DEFAULT_SCHEME
    values = tuple(None if v is None else scheme.classify(v) for v in series.values)
    return ClassSequence(
        station_id=series.station_id, start=series.start, values=values, scheme=scheme
    )


class DroughtClassifier(TransformerMixin, BaseEstimator):
    """Stateless transformer from index values to drought classes.

    ``transform`` accepts an :class:`IndexSeries` (returning a
    :class:`ClassSequence`) or any iterable of floats (returning a list
    of :class:`DroughtClass`).
    """

    def __init__(self, scheme: ClassificationScheme | None = None):
        self.scheme = scheme

    def fit(self, X=None, y=None) -> "DroughtClassifier":
        return self

    def transform(self, X):
        scheme = self.scheme or DEFAULT_SCHEME
        if isinstance(X, IndexSeries):
            return classify_series(X, scheme)
        return [scheme.classify(float(x)) for x in X]
