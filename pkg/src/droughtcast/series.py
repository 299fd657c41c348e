"""Calendar-month periods and gap-aware monthly series containers.

A monthly series stores one value slot per calendar month over a
contiguous range, so a gap in the record is an explicit ``None`` and can
never be skipped silently. Consumers that must not look across gaps work
on the contiguous runs exposed by :meth:`MonthlySeries.runs`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .errors import DataError

_PERIOD_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=True)
class Period:
    """A calendar month, e.g. ``Period(2017, 12)``."""

    year: int
    month: int

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @classmethod
    def parse(cls, text: str) -> "Period":
        """Parse a ``YYYY-MM`` string."""
        m = _PERIOD_RE.match(text.strip())
        if not m:
            raise ValueError(f"period must look like YYYY-MM, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    @property
    def index(self) -> int:
        """Months since year 0, used for arithmetic and ordering."""
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_index(cls, index: int) -> "Period":
        return cls(index // 12, index % 12 + 1)

    def __add__(self, months: int) -> "Period":
        return Period.from_index(self.index + months)

    def __sub__(self, other: "Period | int") -> "Period | int":
        if isinstance(other, Period):
            return self.index - other.index
        return Period.from_index(self.index - other)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True)
class MonthlySeries:
    """A station's monthly record: one slot per month, ``None`` marks a gap.

    ``values[i]`` belongs to ``start + i``, which makes the
    strictly-monotone-by-one-month invariant structural rather than
    something to re-validate downstream.
    """

    station_id: str
    start: Period
    values: tuple = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        for i, value in enumerate(self.values):
            if value is not None:
                self._check_value(value, self.start + i)

    def _check_value(self, value: Any, period: Period) -> None:
        """Hook for subclasses; raises if a non-missing value is invalid."""

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[tuple[Period, Any]]:
        for i, value in enumerate(self.values):
            yield self.start + i, value

    def period_at(self, offset: int) -> Period:
        return self.start + offset

    @property
    def periods(self) -> tuple[Period, ...]:
        return tuple(self.start + i for i in range(len(self.values)))

    @property
    def valid_count(self) -> int:
        return sum(1 for v in self.values if v is not None)

    def runs(self) -> list[tuple[int, tuple]]:
        """Maximal contiguous non-missing stretches as (offset, values)."""
        out: list[tuple[int, tuple]] = []
        run_start: int | None = None
        for i, value in enumerate(self.values):
            if value is None:
                if run_start is not None:
                    out.append((run_start, self.values[run_start:i]))
                    run_start = None
            elif run_start is None:
                run_start = i
        if run_start is not None:
            out.append((run_start, self.values[run_start:]))
        return out

    @classmethod
    def from_entries(
        cls,
        station_id: str,
        entries: Iterable[tuple[Period, Any]],
        **extra: Any,
    ):
        """Build a series from (period, value) pairs in chronological order.

        Calendar months absent from ``entries`` become explicit gaps.
        Raises :class:`DataError` on duplicate or non-monotone periods.
        """
        pairs = list(entries)
        if not pairs:
            return cls(station_id=station_id, start=Period(1900, 1), values=(), **extra)
        start = pairs[0][0]
        values: list[Any] = []
        last_index = start.index - 1
        for period, value in pairs:
            if period.index == last_index:
                raise DataError(f"duplicate period {period} for station {station_id!r}")
            if period.index < last_index:
                raise DataError(f"periods not increasing at {period} for station {station_id!r}")
            values.extend([None] * (period.index - last_index - 1))
            values.append(value)
            last_index = period.index
        return cls(station_id=station_id, start=start, values=tuple(values), **extra)


class RawSeries(MonthlySeries):
    """Monthly raw aggregate values (e.g. precipitation totals)."""

    def _check_value(self, value: Any, period: Period) -> None:
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DataError(f"non-finite raw value {value!r} at {period}")


class IndexSeries(MonthlySeries):
    """Monthly standardized (dimensionless) index values."""

    def _check_value(self, value: Any, period: Period) -> None:
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DataError(f"non-finite index value {value!r} at {period}")
