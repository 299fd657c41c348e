"""Exception hierarchy.

Two broad families matter to callers: :class:`DataError` (bad or
insufficient input, CLI exit code 2) and :class:`NumericalError`
(an estimation or solver step failed, CLI exit code 3).
"""

from __future__ import annotations


class DroughtcastError(Exception):
    """Base class for all droughtcast errors."""


class DataError(DroughtcastError):
    """Input data is malformed, inconsistent, or insufficient."""


class IngestError(DataError):
    """A file could not be parsed; carries the offending location."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where = f" [{where}]"
        elif line is not None:
            where = f" [line {line}]"
        super().__init__(f"{message}{where}")


class InsufficientDataError(DataError):
    """Not enough observations to carry out the requested estimation."""


class EmptyTableError(InsufficientDataError):
    """No valid lagged pairs exist, so no contingency table can be formed."""


class NumericalError(DroughtcastError):
    """A numerical procedure failed to produce a usable result."""


class DegenerateSampleError(NumericalError):
    """The sample has zero variance; no distribution can be fitted."""


class NoViableModelError(NumericalError):
    """Every candidate distribution fit failed or was skipped."""


class NoUniqueStationaryError(NumericalError):
    """The transition matrix has no unique stationary distribution."""


class NoForecastError(NumericalError):
    """Every lag was dropped, leaving nothing to combine into a forecast."""
