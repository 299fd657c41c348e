"""CSV ingestion for the three accepted input kinds.

All files are UTF-8 CSV with a header. Formats:

    raw-climate:          station,period,precip_mm,tmean_c
    precomputed-index:    station,period,index
    precomputed-classes:  station,period,class

``period`` is ``YYYY-MM``; an empty value field is an explicit gap. A
file may hold several stations; each station's rows must be in
chronological order, and months absent from the file become gaps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources

from .classification import DEFAULT_SCHEME, ClassificationScheme, ClassSequence
from .errors import IngestError
from .series import IndexSeries, MonthlySeries, Period, RawSeries

KINDS = ("raw-climate", "precomputed-index", "precomputed-classes")
RAW_VARIABLES = ("precip_mm", "tmean_c")

_HEADERS = {
    "raw-climate": ("station", "period", "precip_mm", "tmean_c"),
    "precomputed-index": ("station", "period", "index"),
    "precomputed-classes": ("station", "period", "class"),
}


@dataclass(frozen=True)
class StationDataset:
    """One station's parsed series, tagged with the input kind."""

    station_id: str
    kind: str
    series: MonthlySeries

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def bundled_dataset_path() -> str:
    """Path of the bundled synthetic four-station raw-climate dataset."""
    return str(resources.files("droughtcast").joinpath("data/synthetic_climate.csv"))


def detect_kind(header: tuple[str, ...]) -> str:
    """Infer the input kind from the header columns."""
    for kind, expected in _HEADERS.items():
        if header == expected:
            return kind
    raise IngestError(
        f"unrecognized header {list(header)}; expected one of "
        + " | ".join(",".join(cols) for cols in _HEADERS.values())
    )


def _parse_float(text: str, column: str, path: str, line: int) -> float | None:
    text = text.strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise IngestError(f"{column} value {text!r} is not a number", path=path, line=line)
    if not math.isfinite(value):
        raise IngestError(f"{column} value {text!r} is not finite", path=path, line=line)
    return value


def ingest(
    path: str,
    kind: str = "auto",
    *,
    variable: str = "precip_mm",
    scheme: ClassificationScheme | None = None,
) -> list[StationDataset]:
    """Parse one input file into per-station datasets.

    ``variable`` picks which raw-climate column becomes the series.
    Malformed rows raise :class:`IngestError` carrying the file path and
    1-based line number.
    """
    if kind != "auto" and kind not in KINDS:
        raise ValueError(f'kind must be "auto" or one of {KINDS}, got {kind!r}')
    if variable not in RAW_VARIABLES:
        raise ValueError(f"variable must be one of {RAW_VARIABLES}, got {variable!r}")
    scheme = scheme or DEFAULT_SCHEME

    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot open input file: {exc}", path=path)

    stations: dict[str, list[tuple[Period, object]]] = {}
    last_period: dict[str, tuple[Period, int]] = {}
    with handle:
        reader = csv.reader(handle)
        try:
            raw_header = next(reader)
        except StopIteration:
            raise IngestError("file is empty", path=path)
        header = tuple(col.strip().lower() for col in raw_header)
        if kind == "auto":
            try:
                kind = detect_kind(header)
            except IngestError as exc:
                raise IngestError(str(exc), path=path, line=1)
        elif header != _HEADERS[kind]:
            unknown = [c for c in header if c not in _HEADERS[kind]]
            what = f"unknown column(s) {unknown}" if unknown else f"columns {list(header)}"
            raise IngestError(
                f"{what}; a {kind} file needs header {','.join(_HEADERS[kind])}",
                path=path,
                line=1,
            )

        n_cols = len(_HEADERS[kind])
        for line, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != n_cols:
                raise IngestError(
                    f"expected {n_cols} fields, got {len(row)}", path=path, line=line
                )
            station = row[0].strip()
            if not station:
                raise IngestError("station field is empty", path=path, line=line)
            try:
                period = Period.parse(row[1])
            except ValueError as exc:
                raise IngestError(str(exc), path=path, line=line)
            if station in last_period:
                previous, at_line = last_period[station]
                if period == previous:
                    raise IngestError(
                        f"duplicate period {period} for station {station!r} "
                        f"(first seen on line {at_line})",
                        path=path,
                        line=line,
                    )
                if period < previous:
                    raise IngestError(
                        f"periods for station {station!r} are not increasing: "
                        f"{period} follows {previous}",
                        path=path,
                        line=line,
                    )
            last_period[station] = (period, line)

            if kind == "raw-climate":
                fields = {
                    "precip_mm": _parse_float(row[2], "precip_mm", path, line),
                    "tmean_c": _parse_float(row[3], "tmean_c", path, line),
                }
                value: object = fields[variable]
            elif kind == "precomputed-index":
                value = _parse_float(row[2], "index", path, line)
            else:
                label = row[2].strip()
                if label == "":
                    value = None
                else:
                    matches = [c for c in scheme.classes if c.label == label]
                    if not matches:
                        raise IngestError(
                            f"unknown class label {label!r} "
                            f"(expected one of {list(scheme.labels)})",
                            path=path,
                            line=line,
                        )
                    value = matches[0]
            stations.setdefault(station, []).append((period, value))

    if not stations:
        raise IngestError("file has a header but no data rows", path=path)

    datasets = []
    for station_id, entries in stations.items():
        if kind == "raw-climate":
            series: MonthlySeries = RawSeries.from_entries(station_id, entries)
        elif kind == "precomputed-index":
            series = IndexSeries.from_entries(station_id, entries)
        else:
            series = ClassSequence.from_entries(station_id, entries, scheme=scheme)
        datasets.append(StationDataset(station_id=station_id, kind=kind, series=series))
    return datasets
