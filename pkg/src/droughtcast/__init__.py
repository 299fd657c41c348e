"""droughtcast: weighted-Markov-chain forecasting of ordinal drought classes.

The pipeline: standardize a monthly climate series against fitted
per-month distributions, classify the index into ordinal drought
classes, estimate per-lag transition matrices, weight the lags by their
quadratic-weighted kappa agreement, and combine the matching transition
rows into a next-month class forecast. Backtesting and stationary-
distribution cross-checks round out the toolkit; the ``droughtcast``
CLI exposes everything on CSV inputs.
"""

from .backtest import (
    BacktestReport,
    FoldRecord,
    MethodScore,
    SteadyComparison,
    backtest,
    compare_steady,
)
from .classification import (
    DEFAULT_SCHEME,
    ED,
    EW,
    MD,
    MW,
    NN,
    SD,
    SW,
    ClassificationScheme,
    ClassSequence,
    DroughtClass,
    DroughtClassifier,
    classify,
    classify_series,
)
from .distributions import FittedModel, fit_candidates, sample_lmoments, select_model
from .errors import (
    DataError,
    DegenerateSampleError,
    DroughtcastError,
    EmptyTableError,
    IngestError,
    InsufficientDataError,
    NoForecastError,
    NoUniqueStationaryError,
    NoViableModelError,
    NumericalError,
)
from .forecasting import (
    ForecastDistribution,
    ForecastTrace,
    TraceRecord,
    WeightedMarkovForecaster,
    argmax_class,
    forecast_trace,
    predict_iterated,
    predict_one,
)
from .io import StationDataset, bundled_dataset_path, ingest
from .kappa import (
    ContingencyTable,
    KappaResult,
    LagWeight,
    LagWeightProfile,
    lagged_pair_counts,
    lagged_table,
    normalize_weights,
    profile_from_counts,
    weight_profile,
    weighted_kappa,
)
from .series import IndexSeries, MonthlySeries, Period, RawSeries
from .standardize import IndexStandardizer, standardize
from .transitions import (
    StationaryDistribution,
    TransitionMatrixSet,
    estimate_transitions,
    matrices_from_counts,
    stationary,
    steady_state_lag,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BacktestReport",
    "ClassificationScheme",
    "ClassSequence",
    "ContingencyTable",
    "DataError",
    "DEFAULT_SCHEME",
    "DegenerateSampleError",
    "DroughtcastError",
    "DroughtClass",
    "DroughtClassifier",
    "ED",
    "EmptyTableError",
    "EW",
    "FittedModel",
    "FoldRecord",
    "ForecastDistribution",
    "ForecastTrace",
    "IndexSeries",
    "IndexStandardizer",
    "IngestError",
    "InsufficientDataError",
    "KappaResult",
    "LagWeight",
    "LagWeightProfile",
    "MD",
    "MethodScore",
    "MonthlySeries",
    "MW",
    "NN",
    "NoForecastError",
    "NoUniqueStationaryError",
    "NoViableModelError",
    "NumericalError",
    "Period",
    "RawSeries",
    "SD",
    "StationaryDistribution",
    "StationDataset",
    "SteadyComparison",
    "SW",
    "TraceRecord",
    "TransitionMatrixSet",
    "WeightedMarkovForecaster",
    "argmax_class",
    "backtest",
    "bundled_dataset_path",
    "classify",
    "classify_series",
    "compare_steady",
    "estimate_transitions",
    "fit_candidates",
    "forecast_trace",
    "ingest",
    "lagged_pair_counts",
    "lagged_table",
    "matrices_from_counts",
    "normalize_weights",
    "predict_iterated",
    "predict_one",
    "profile_from_counts",
    "sample_lmoments",
    "select_model",
    "standardize",
    "stationary",
    "steady_state_lag",
    "weight_profile",
    "weighted_kappa",
]
