"""Command-line interface.

Every subcommand reads one CSV input file (possibly holding several
stations), runs its slice of the pipeline, and emits a deterministic
machine-readable JSON document plus optional flat CSV exports. Exit
codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Set DROUGHTCAST_VERBOSE=1 for debug logging on stderr.
"""

from __future__ import annotations

import dataclasses
import logging
import os

import click

from . import __version__
from . import report as rpt
from .backtest import backtest as run_backtest
from .backtest import compare_steady
from .classification import DEFAULT_SCHEME, ClassificationScheme, classify_series
from .errors import DataError, NumericalError
from .forecasting import WeightedMarkovForecaster
from .io import RAW_VARIABLES, StationDataset, ingest
from .standardize import GROUPINGS, IndexStandardizer

logger = logging.getLogger("droughtcast")

_KIND_BY_ALIAS = {
    "auto": "auto",
    "raw": "raw-climate",
    "index": "precomputed-index",
    "classes": "precomputed-classes",
}


def _input_options(f):
    f = click.option(
        "--variable",
        type=click.Choice(list(RAW_VARIABLES)),
        default="precip_mm",
        show_default=True,
        help="Which raw-climate column feeds the pipeline.",
    )(f)
    f = click.option(
        "--kind",
        type=click.Choice(list(_KIND_BY_ALIAS)),
        default="auto",
        show_default=True,
        help="Input format; auto-detected from the header by default.",
    )(f)
    f = click.argument("input_path", metavar="INPUT", type=click.Path())(f)
    return f


def _output_option(f):
    return click.option(
        "-o",
        "--output",
        default="-",
        show_default=True,
        help="Where to write the JSON report ('-' = stdout).",
    )(f)


def _scheme_option(f):
    return click.option(
        "--cuts",
        default=None,
        help="Override the six classification cut points, comma-separated "
        "(default: -2,-1.5,-1,1,1.5,2).",
    )(f)


def _standardize_options(f):
    f = click.option(
        "--shift-nonpositive",
        is_flag=True,
        help="Shift samples containing zeros/negatives so positive-support "
        "families stay eligible.",
    )(f)
    f = click.option(
        "--min-samples",
        type=int,
        default=20,
        show_default=True,
        help="Fewest non-missing values a fitting group may have.",
    )(f)
    f = click.option(
        "--grouping",
        type=click.Choice(list(GROUPINGS)),
        default="month",
        show_default=True,
        help="Fit one distribution per calendar month, or one pooled model.",
    )(f)
    return f


def _model_options(f):
    f = click.option(
        "--steady-tolerance",
        type=float,
        default=0.01,
        show_default=True,
        help="Row-vs-stationary tolerance for --max-lag auto and steady.",
    )(f)
    f = click.option(
        "--power-mode",
        is_flag=True,
        help="Derive deeper lags as matrix powers of the lag-1 matrix "
        "(comparison mode) instead of estimating each lag from its own pairs.",
    )(f)
    f = click.option(
        "--smoothing",
        type=float,
        default=0.0,
        show_default=True,
        help="Laplace pseudo-count added to transition cells (0 = raw).",
    )(f)
    f = click.option(
        "--weight-basis",
        type=click.Choice(["kappa", "z"]),
        default="kappa",
        show_default=True,
        help="Normalize lag weights from |kappa| or |z-statistic|.",
    )(f)
    f = click.option(
        "--max-lag",
        default="7",
        show_default=True,
        help='How many lags to combine, or "auto" to stop at the lag where '
        "the chain looks stationary.",
    )(f)
    return f


def _parse_max_lag(text: str) -> int | str:
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise click.BadParameter(f'--max-lag must be a positive integer or "auto", got {text!r}')
    if value < 1:
        raise click.BadParameter(f"--max-lag must be >= 1, got {value}")
    return value


def _parse_scheme(cuts: str | None) -> ClassificationScheme:
    if cuts is None:
        return DEFAULT_SCHEME
    try:
        values = tuple(float(part) for part in cuts.split(","))
    except ValueError:
        raise click.BadParameter(f"--cuts must be comma-separated numbers, got {cuts!r}")
    if len(values) != len(DEFAULT_SCHEME.cuts):
        raise click.BadParameter(
            f"--cuts needs exactly {len(DEFAULT_SCHEME.cuts)} values, got {len(values)}"
        )
    try:
        return dataclasses.replace(DEFAULT_SCHEME, cuts=values)
    except ValueError as exc:
        raise click.BadParameter(f"--cuts rejected: {exc}")


def _emit(text: str, destination: str | None, *, err: bool = False) -> None:
    if destination is None or destination == "-":
        click.echo(text, nl=False, err=err)
    else:
        with open(destination, "w", encoding="utf-8") as handle:
            handle.write(text)


def _standardized(dataset: StationDataset, grouping, min_samples, shift_nonpositive):
    """Standardize one raw dataset; returns (index series, fitted standardizer)."""
    standardizer = IndexStandardizer(
        grouping=grouping,
        min_samples=min_samples,
        shift_nonpositive=shift_nonpositive,
    )
    return standardizer.fit_transform(dataset.series), standardizer


def _class_sequences(input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive):
    """Ingest and bring every station to a ClassSequence.

    Returns (datasets, sequences by station, standardizer models by
    station for stations that came in as raw climate data).
    """
    datasets = ingest(input_path, _KIND_BY_ALIAS[kind], variable=variable, scheme=scheme)
    sequences: dict[str, object] = {}
    models: dict[str, IndexStandardizer] = {}
    for ds in datasets:
        if ds.kind == "precomputed-classes":
            sequences[ds.station_id] = ds.series
            continue
        if ds.kind == "raw-climate":
            index, standardizer = _standardized(ds, grouping, min_samples, shift_nonpositive)
            models[ds.station_id] = standardizer
        else:
            index = ds.series
        sequences[ds.station_id] = classify_series(index, scheme)
    logger.debug("ingested %d station(s) from %s", len(datasets), input_path)
    return datasets, sequences, models


def _groups_doc(standardizer: IndexStandardizer) -> list[dict]:
    return [
        {
            "group": group,
            "selected": rpt.model_doc(standardizer.models_[group]),
            "candidates": [rpt.model_doc(fit) for fit in standardizer.candidate_fits_[group]],
        }
        for group in sorted(standardizer.models_, key=str)
    ]


def _forecaster(max_lag, weight_basis, smoothing, power_mode, steady_tolerance):
    return WeightedMarkovForecaster(
        max_lag=max_lag,
        weight_basis=weight_basis,
        smoothing=smoothing,
        mode="power" if power_mode else "empirical",
        steady_tolerance=steady_tolerance,
    )


def _base_doc(command: str, config: dict, scheme: ClassificationScheme) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config": config,
        "scheme": rpt.scheme_doc(scheme),
    }


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="droughtcast")
def cli() -> None:
    """Forecast ordinal drought classes with a kappa-weighted Markov chain.

    Input is UTF-8 CSV with a header, one of: raw climate data
    (station,period,precip_mm,tmean_c), a precomputed index
    (station,period,index), or precomputed classes (station,period,class).
    Periods are YYYY-MM; an empty value field marks a gap.
    """


@cli.command("standardize")
@_input_options
@_standardize_options
@_output_option
@click.option("--index-csv", default=None, help="Also write the index as CSV here.")
def standardize_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, output, index_csv):
    """Fit distributions to a raw series and emit the standardized index."""
    datasets = ingest(input_path, _KIND_BY_ALIAS[kind], variable=variable)
    if any(ds.kind != "raw-climate" for ds in datasets):
        raise DataError(
            "standardize expects raw-climate input (station,period,precip_mm,tmean_c)"
        )
    stations = []
    index_datasets = []
    for ds in datasets:
        index, standardizer = _standardized(ds, grouping, min_samples, shift_nonpositive)
        index_datasets.append(StationDataset(ds.station_id, "precomputed-index", index))
        stations.append(
            {
                "station": ds.station_id,
                "groups": _groups_doc(standardizer),
                "index": rpt.series_doc(index),
            }
        )
    doc = _base_doc(
        "standardize",
        {
            "variable": variable,
            "grouping": grouping,
            "min_samples": min_samples,
            "shift_nonpositive": shift_nonpositive,
        },
        DEFAULT_SCHEME,
    )
    doc["stations"] = stations
    _emit(rpt.render_json(doc), output)
    if index_csv:
        _emit(rpt.index_csv(index_datasets), index_csv)


@cli.command("classify")
@_input_options
@_standardize_options
@_scheme_option
@_output_option
@click.option("--classes-csv", default=None, help="Also write the classes as CSV here.")
def classify_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, cuts, output, classes_csv):
    """Map input (raw or index) to drought classes."""
    scheme = _parse_scheme(cuts)
    _, sequences, _ = _class_sequences(
        input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive
    )
    doc = _base_doc(
        "classify",
        {
            "variable": variable,
            "grouping": grouping,
            "min_samples": min_samples,
            "shift_nonpositive": shift_nonpositive,
            "cuts": list(scheme.cuts),
        },
        scheme,
    )
    doc["stations"] = [
        {
            "station": station_id,
            "class_counts": rpt.class_counts(seq),
            "classes": rpt.series_doc(seq),
        }
        for station_id, seq in sequences.items()
    ]
    _emit(rpt.render_json(doc), output)
    if classes_csv:
        _emit(rpt.classes_csv(sequences), classes_csv)


def _fit_config(variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, scheme):
    return {
        "variable": variable,
        "grouping": grouping,
        "min_samples": min_samples,
        "shift_nonpositive": shift_nonpositive,
        "cuts": list(scheme.cuts),
        "max_lag": max_lag,
        "weight_basis": weight_basis,
        "smoothing": smoothing,
        "mode": "power" if power_mode else "empirical",
        "steady_tolerance": steady_tolerance,
    }


@cli.command("fit")
@_input_options
@_standardize_options
@_scheme_option
@_model_options
@_output_option
def fit_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, output):
    """Estimate transition matrices and the lag-weight profile."""
    scheme = _parse_scheme(cuts)
    max_lag = _parse_max_lag(max_lag)
    _, sequences, _ = _class_sequences(
        input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive
    )
    stations = []
    for station_id, seq in sequences.items():
        forecaster = _forecaster(max_lag, weight_basis, smoothing, power_mode, steady_tolerance)
        forecaster.fit(seq)
        stations.append(
            {
                "station": station_id,
                "max_lag_used": forecaster.max_lag_,
                "class_counts": rpt.class_counts(seq),
                "weights": rpt.profile_doc(forecaster.weight_profile_),
                "transitions": rpt.matrices_doc(forecaster.transitions_, scheme.labels),
            }
        )
    doc = _base_doc(
        "fit",
        _fit_config(variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, scheme),
        scheme,
    )
    doc["stations"] = stations
    _emit(rpt.render_json(doc), output)


@cli.command("predict")
@_input_options
@_standardize_options
@_scheme_option
@_model_options
@_output_option
@click.option("--horizon", type=int, default=1, show_default=True, help="Months ahead to forecast.")
@click.option(
    "--propagate",
    is_flag=True,
    help="Push the full step-1 distribution through the lag-1 matrix for "
    "later steps instead of chaining point forecasts (extension mode).",
)
@click.option("--forecast-csv", default=None, help="Also write forecasts as flat CSV here.")
def predict_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, output, horizon, propagate, forecast_csv):
    """Forecast the next drought class(es) for each station."""
    if horizon < 1:
        raise click.BadParameter("--horizon must be >= 1")
    scheme = _parse_scheme(cuts)
    max_lag = _parse_max_lag(max_lag)
    _, sequences, _ = _class_sequences(
        input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive
    )
    stations = []
    all_forecasts = {}
    for station_id, seq in sequences.items():
        forecaster = _forecaster(max_lag, weight_basis, smoothing, power_mode, steady_tolerance)
        forecaster.fit(seq)
        forecasts = forecaster.forecast(horizon=horizon, propagate=propagate)
        all_forecasts[station_id] = forecasts
        first_target = seq.start + len(seq.values)
        stations.append(
            {
                "station": station_id,
                "max_lag_used": forecaster.max_lag_,
                "weights": rpt.profile_doc(forecaster.weight_profile_),
                "forecasts": [
                    rpt.forecast_doc(dist, scheme.labels, str(first_target + step))
                    for step, dist in enumerate(forecasts)
                ],
                "trace": rpt.trace_doc(forecaster.trace(), scheme.labels),
            }
        )
    config = _fit_config(variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, scheme)
    config.update({"horizon": horizon, "propagate": propagate})
    doc = _base_doc("predict", config, scheme)
    doc["stations"] = stations
    _emit(rpt.render_json(doc), output)
    if forecast_csv:
        _emit(rpt.forecast_csv(all_forecasts, scheme.labels), forecast_csv)


@cli.command("backtest")
@_input_options
@_standardize_options
@_scheme_option
@_model_options
@_output_option
@click.option("--holdout", type=int, default=12, show_default=True, help="Trailing months to evaluate.")
@click.option("--refit/--no-refit", default=True, show_default=True, help="Refit estimates for every fold.")
@click.option("--min-train", type=int, default=None, help="Fewest non-missing training months per fold [default: 10 x max lag].")
@click.option("--confusion-csv", default=None, help="Also write the confusion matrix as flat CSV here.")
def backtest_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, output, holdout, refit, min_train, confusion_csv):
    """Rolling-origin evaluation against baseline forecasters."""
    scheme = _parse_scheme(cuts)
    max_lag = _parse_max_lag(max_lag)
    if max_lag == "auto":
        raise click.BadParameter("backtest needs an explicit integer --max-lag")
    if holdout < 1:
        raise click.BadParameter("--holdout must be >= 1")
    _, sequences, _ = _class_sequences(
        input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive
    )
    reports = {}
    for station_id, seq in sequences.items():
        reports[station_id] = run_backtest(
            seq,
            max_lag=max_lag,
            weight_basis=weight_basis,
            holdout_months=holdout,
            refit=refit,
            min_train=min_train,
            smoothing=smoothing,
            mode="power" if power_mode else "empirical",
        )
    config = _fit_config(variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, scheme)
    config.update({"holdout_months": holdout, "refit": refit, "min_train": min_train})
    doc = _base_doc("backtest", config, scheme)
    doc["stations"] = [rpt.backtest_doc(rep) for rep in reports.values()]
    _emit(rpt.render_json(doc), output)
    if confusion_csv:
        _emit(rpt.confusion_csv(reports), confusion_csv)


@cli.command("steady")
@_input_options
@_standardize_options
@_scheme_option
@_model_options
@_output_option
def steady_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, output):
    """Stationary distribution and steady-state lag of the fitted chain."""
    scheme = _parse_scheme(cuts)
    max_lag = _parse_max_lag(max_lag)
    _, sequences, _ = _class_sequences(
        input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive
    )
    stations = []
    for station_id, seq in sequences.items():
        forecaster = _forecaster(max_lag, weight_basis, smoothing, power_mode, steady_tolerance)
        forecaster.fit(seq)
        stations.append(
            {
                "station": station_id,
                "max_lag_used": forecaster.max_lag_,
                "stationary": rpt.stationary_doc(forecaster.steady_state(), scheme.labels),
                "steady_state_lag": forecaster.steady_lag(),
            }
        )
    doc = _base_doc(
        "steady",
        _fit_config(variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, scheme),
        scheme,
    )
    doc["stations"] = stations
    _emit(rpt.render_json(doc), output)


@cli.command("report")
@_input_options
@_standardize_options
@_scheme_option
@_model_options
@_output_option
@click.option("--horizon", type=int, default=1, show_default=True, help="Months ahead to forecast.")
@click.option("--holdout", type=int, default=12, show_default=True, help="Backtest months (0 disables the backtest).")
@click.option("--refit/--no-refit", default=True, show_default=True, help="Refit estimates for every backtest fold.")
@click.option("--min-train", type=int, default=None, help="Fewest non-missing training months per fold [default: 10 x max lag].")
@click.option("--summary", default=None, help="Write the human-readable summary here instead of stderr.")
@click.option("--forecast-csv", default=None, help="Also write forecasts as flat CSV here.")
@click.option("--confusion-csv", default=None, help="Also write confusion matrices as flat CSV here.")
def report_cmd(input_path, kind, variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, output, horizon, holdout, refit, min_train, summary, forecast_csv, confusion_csv):
    """Full pipeline: standardize, classify, fit, forecast, steady state,
    stationarity comparison, and (unless --holdout 0) a backtest."""
    if horizon < 1:
        raise click.BadParameter("--horizon must be >= 1")
    if holdout < 0:
        raise click.BadParameter("--holdout must be >= 0")
    scheme = _parse_scheme(cuts)
    max_lag = _parse_max_lag(max_lag)
    if max_lag == "auto" and holdout > 0:
        raise click.BadParameter(
            'a backtest needs an explicit integer --max-lag; use "--holdout 0" with --max-lag auto'
        )
    datasets, sequences, standardizers = _class_sequences(
        input_path, kind, variable, scheme, grouping, min_samples, shift_nonpositive
    )
    stations = []
    summaries = []
    all_forecasts = {}
    bt_reports = {}
    for station_id, seq in sequences.items():
        forecaster = _forecaster(max_lag, weight_basis, smoothing, power_mode, steady_tolerance)
        forecaster.fit(seq)
        forecasts = forecaster.forecast(horizon=horizon)
        trace = forecaster.trace()
        steady = forecaster.steady_state()
        comparison = compare_steady(forecasts[0], steady, scheme.labels)
        all_forecasts[station_id] = forecasts
        first_target = seq.start + len(seq.values)
        bt = None
        if holdout > 0:
            bt = run_backtest(
                seq,
                max_lag=forecaster.max_lag_,
                weight_basis=weight_basis,
                holdout_months=holdout,
                refit=refit,
                min_train=min_train,
                smoothing=smoothing,
                mode="power" if power_mode else "empirical",
            )
            bt_reports[station_id] = bt
        station = {
            "station": station_id,
            "max_lag_used": forecaster.max_lag_,
            "class_counts": rpt.class_counts(seq),
            "weights": rpt.profile_doc(forecaster.weight_profile_),
            "transitions": rpt.matrices_doc(forecaster.transitions_, scheme.labels),
            "forecasts": [
                rpt.forecast_doc(dist, scheme.labels, str(first_target + step))
                for step, dist in enumerate(forecasts)
            ],
            "trace": rpt.trace_doc(trace, scheme.labels),
            "stationary": rpt.stationary_doc(steady, scheme.labels),
            "steady_state_lag": forecaster.steady_lag(),
            "steady_comparison": rpt.steady_comparison_doc(comparison),
            "backtest": None if bt is None else rpt.backtest_doc(bt),
        }
        if station_id in standardizers:
            station["models"] = _groups_doc(standardizers[station_id])
        stations.append(station)
        summaries.append(
            rpt.station_summary(
                station_id,
                forecaster.weight_profile_,
                trace,
                scheme.labels,
                str(first_target),
                steady,
                comparison,
                bt,
            )
        )
    config = _fit_config(variable, grouping, min_samples, shift_nonpositive, cuts, max_lag, weight_basis, smoothing, power_mode, steady_tolerance, scheme)
    config.update(
        {
            "horizon": horizon,
            "holdout_months": holdout,
            "refit": refit,
            "min_train": min_train,
        }
    )
    doc = _base_doc("report", config, scheme)
    doc["stations"] = stations
    _emit(rpt.render_json(doc), output)
    summary_text = "\n".join(summaries)
    if summary:
        _emit(summary_text, summary)
    else:
        _emit(summary_text, "-", err=True)
    if forecast_csv:
        _emit(rpt.forecast_csv(all_forecasts, scheme.labels), forecast_csv)
    if confusion_csv and bt_reports:
        _emit(rpt.confusion_csv(bt_reports), confusion_csv)


def main(argv: list[str] | None = None) -> int:
    """Entry point translating exceptions into documented exit codes."""
    level = logging.DEBUG if os.environ.get("DROUGHTCAST_VERBOSE") else logging.WARNING
    logging.basicConfig(level=level, format="%(name)s %(levelname)s %(message)s")
    try:
        cli.main(args=argv, prog_name="droughtcast", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return 3
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0
