"""Report construction: plain-dict documents, deterministic JSON, flat
CSV exports, and the human-readable forecast summary.

Documents contain only JSON-safe primitives. Serialization sorts keys,
never embeds timestamps or absolute paths, and maps non-finite floats to
null, so identical inputs yield byte-identical reports.
"""

from __future__ import annotations

import io as _io
import json
import math

from .backtest import BacktestReport, SteadyComparison
from .classification import ClassificationScheme, ClassSequence
from .distributions import FittedModel
from .forecasting import ForecastDistribution, ForecastTrace
from .kappa import LagWeightProfile
from .series import MonthlySeries
from .transitions import StationaryDistribution, TransitionMatrixSet


def _clean(value):
    """Recursively convert a document to JSON-safe primitives."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if hasattr(value, "item"):  # numpy scalar
        return _clean(value.item())
    return str(value)


def render_json(document: dict) -> str:
    """Canonical JSON text: sorted keys, two-space indent, newline-terminated."""
    return json.dumps(_clean(document), sort_keys=True, indent=2, allow_nan=False) + "\n"


def scheme_doc(scheme: ClassificationScheme) -> dict:
    return {
        "classes": [{"rank": c.rank, "label": c.label} for c in scheme.classes],
        "cuts": list(scheme.cuts),
        "cut_to_upper": list(scheme.cut_to_upper),
        "neutral_rank": scheme.neutral_rank,
    }


def series_doc(series: MonthlySeries) -> list[dict]:
    out = []
    for period, value in series:
        if isinstance(series, ClassSequence) and value is not None:
            value = value.label
        out.append({"period": str(period), "value": value})
    return out


def model_doc(model: FittedModel) -> dict:
    return {
        "family": model.family,
        "method": model.method,
        "params": list(model.params),
        "shift": model.shift,
        "aic": model.aic,
        "ks_statistic": model.ks_statistic,
    }


def profile_doc(profile: LagWeightProfile) -> dict:
    return {
        "basis": profile.basis,
        "max_lag": profile.max_lag,
        "uniform_fallback": profile.uniform_fallback,
        "lags": [
            {
                "lag": rec.lag,
                "kappa": rec.kappa,
                "z_stat": rec.z_stat,
                "p_value": rec.p_value,
                "weight": rec.weight,
                "pair_count": rec.pair_count,
            }
            for rec in profile.lags
        ],
    }


def matrices_doc(matrices: TransitionMatrixSet, labels: tuple[str, ...]) -> dict:
    return {
        "labels": list(labels),
        "class_count": matrices.class_count,
        "max_lag": matrices.max_lag,
        "mode": matrices.mode,
        "smoothing": matrices.smoothing,
        "lags": [
            {
                "lag": t + 1,
                "available": matrices.available[t],
                "matrix": [list(row) for row in matrices.matrices[t]],
                "counts": [list(row) for row in matrices.counts[t]],
                "row_support": list(matrices.row_support[t]),
            }
            for t in range(matrices.max_lag)
        ],
    }


def forecast_doc(
    dist: ForecastDistribution, labels: tuple[str, ...], target: str | None = None
) -> dict:
    doc = {
        "probabilities": dict(zip(labels, dist.probabilities)),
        "predicted_class": dist.predicted_class.label,
        "used_lags": list(dist.used_lags),
        "renormalized": dist.renormalized,
        "tie_break_applied": dist.tie_break_applied,
    }
    if target is not None:
        doc["target"] = target
    return doc


def trace_doc(trace: ForecastTrace, labels: tuple[str, ...]) -> dict:
    return {
        "records": [
            {
                "lag": rec.lag,
                "source_state": None if rec.source_state is None else rec.source_state.label,
                "row": None if rec.row is None else dict(zip(labels, rec.row)),
                "weight": rec.weight,
                "applied_weight": rec.applied_weight,
                "used": rec.used,
            }
            for rec in trace.records
        ],
        "combined": forecast_doc(trace.distribution, labels),
    }


def stationary_doc(steady: StationaryDistribution, labels: tuple[str, ...]) -> dict:
    return {
        "probabilities": dict(zip(labels, steady.probabilities)),
        "residual": steady.residual,
        "method": steady.method,
    }


def steady_comparison_doc(comparison: SteadyComparison) -> dict:
    return {
        "classes": [
            {
                "label": label,
                "forecast": fc,
                "stationary": st,
                "difference": diff,
            }
            for label, fc, st, diff in zip(
                comparison.labels,
                comparison.forecast,
                comparison.stationary,
                comparison.differences,
            )
        ],
        "max_abs_difference": comparison.max_abs_difference,
    }


def backtest_doc(report: BacktestReport) -> dict:
    return {
        "station": report.station_id,
        "max_lag": report.max_lag,
        "weight_basis": report.weight_basis,
        "refit": report.refit,
        "requested_folds": report.requested_folds,
        "evaluated_folds": len(report.folds),
        "skipped": [{"origin": o, "reason": r} for o, r in report.skipped],
        "hit_rates": {
            name: score.hit_rate for name, score in sorted(report.scores.items())
        },
        "scores": {
            name: {"hits": score.hits, "evaluated": score.evaluated}
            for name, score in sorted(report.scores.items())
        },
        "confusion": {
            "labels": list(report.labels),
            "rows_are_observed": True,
            "matrix": [list(row) for row in report.confusion],
        },
        "folds": [
            {
                "origin": str(fold.origin),
                "observed": fold.observed.label,
                "predicted": None if fold.predicted is None else fold.predicted.label,
                "probabilities": None
                if fold.probabilities is None
                else dict(zip(report.labels, fold.probabilities)),
            }
            for fold in report.folds
        ],
        "steady_comparison": None
        if report.steady_comparison is None
        else steady_comparison_doc(report.steady_comparison),
        "notes": list(report.notes),
    }


def class_counts(seq: ClassSequence) -> dict:
    counts = {label: 0 for label in seq.scheme.labels}
    for value in seq.values:
        if value is not None:
            counts[value.label] += 1
    return counts


# --- flat CSV exports -------------------------------------------------


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[list], header: list[str]) -> str:
    buffer = _io.StringIO()
    buffer.write(",".join(header) + "\n")
    for row in rows:
        buffer.write(",".join(_csv_cell(cell) for cell in row) + "\n")
    return buffer.getvalue()


def index_csv(datasets) -> str:
    """station,period,index rows for every non-missing month."""
    rows = []
    for ds in datasets:
        for period, value in ds.series:
            if value is not None:
                rows.append([ds.station_id, str(period), value])
    return write_csv(rows, ["station", "period", "index"])


def classes_csv(sequences: dict[str, ClassSequence]) -> str:
    rows = []
    for station_id, seq in sequences.items():
        for period, value in seq:
            if value is not None:
                rows.append([station_id, str(period), value.label])
    return write_csv(rows, ["station", "period", "class"])


def forecast_csv(per_station: dict[str, list[ForecastDistribution]], labels) -> str:
    rows = []
    for station_id, forecasts in per_station.items():
        for step, dist in enumerate(forecasts, start=1):
            rows.append(
                [station_id, step, dist.predicted_class.label]
                + [dist.probabilities[i] for i in range(len(labels))]
            )
    return write_csv(rows, ["station", "step", "predicted_class", *labels])


def confusion_csv(reports: dict[str, BacktestReport]) -> str:
    rows = []
    for station_id, report in reports.items():
        for i, observed in enumerate(report.labels):
            for j, predicted in enumerate(report.labels):
                rows.append([station_id, observed, predicted, report.confusion[i][j]])
    return write_csv(rows, ["station", "observed", "predicted", "count"])


# --- human-readable summary -------------------------------------------


def _fmt(value, width: int = 7) -> str:
    if value is None:
        return " " * (width - 1) + "-"
    return f"{value:{width}.4f}"


def trace_text(trace: ForecastTrace, labels: tuple[str, ...], target: str) -> str:
    lines = [f"forecast target: {target}"]
    head = f"{'lag':>4} {'state':>5} {'weight':>7} {'applied':>7}  " + " ".join(
        f"{label:>7}" for label in labels
    )
    lines.append(head)
    for rec in trace.records:
        state = "-" if rec.source_state is None else rec.source_state.label
        row = rec.row if rec.row is not None else [None] * len(labels)
        mark = "" if rec.used else "  (dropped)"
        lines.append(
            f"{rec.lag:>4} {state:>5} {_fmt(rec.weight)} {_fmt(rec.applied_weight)}  "
            + " ".join(_fmt(v) for v in row)
            + mark
        )
    dist = trace.distribution
    lines.append(
        f"{'P*':>4} {'':>5} {'':>7} {'':>7}  " + " ".join(_fmt(v) for v in dist.probabilities)
    )
    lines.append(f"predicted class: {dist.predicted_class.label}")
    if dist.renormalized:
        lines.append("note: weights renormalized after dropping unusable lags")
    if dist.tie_break_applied:
        lines.append("note: argmax tie broken deterministically")
    return "\n".join(lines)


def station_summary(
    station_id: str,
    profile: LagWeightProfile,
    trace: ForecastTrace,
    labels: tuple[str, ...],
    target: str,
    steady: StationaryDistribution | None,
    comparison: SteadyComparison | None,
    backtest_report: BacktestReport | None,
) -> str:
    lines = [f"== station {station_id} ==", ""]
    lines.append(
        f"lag weights (basis {profile.basis}"
        + (", uniform fallback" if profile.uniform_fallback else "")
        + "): "
        + ", ".join(f"W{rec.lag}={rec.weight:.4f}" for rec in profile.lags)
    )
    lines.append("")
    lines.append(trace_text(trace, labels, target))
    if steady is not None:
        lines.append("")
        lines.append(
            "stationary:  "
            + " ".join(f"{label}={p:.4f}" for label, p in zip(labels, steady.probabilities))
        )
        if comparison is not None:
            lines.append(
                f"max |forecast - stationary| = {comparison.max_abs_difference:.4f}"
            )
    if backtest_report is not None:
        lines.append("")
        rates = ", ".join(
            f"{name}={score.hit_rate:.3f}" if score.hit_rate is not None else f"{name}=-"
            for name, score in sorted(backtest_report.scores.items())
        )
        lines.append(
            f"backtest over {len(backtest_report.folds)} folds: hit rates {rates}"
        )
    lines.append("")
    return "\n".join(lines)
