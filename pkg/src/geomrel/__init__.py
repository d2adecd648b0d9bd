"""Reliability growth modelling with a geometric progression of per-fault
failure rates.

The package bundles the model equations, least-squares fitting with an
in-house Nelder-Mead simplex, four classic comparison models behind the
same fit/predict interface, a number-of-failures predictive-validity
harness, and a simulation oracle for verification.  The ``geomrel``
console command exposes the fit/predict/evaluate/simulate workflows on
CSV failure histories.
"""

from .comparison import (
    ALL_MODEL_NAMES,
    REFERENCE_MODEL_NAMES,
    GeometricRates,
    LittlewoodVerrall,
    LittlewoodVerrallParams,
    MusaBasic,
    MusaBasicParams,
    MusaOkumoto,
    MusaOkumotoParams,
    Nhpp,
    NhppParams,
    ReliabilityModel,
    fit_comparison,
    fit_model,
    littlewood_verrall_fit_predict,
    musa_basic_mean,
    musa_okumoto_mean,
    nhpp_mean,
)
from .data import (
    FailureDataset,
    TimeConversionProfile,
    TimeUnit,
    convert_time,
    parse_dataset,
    rescale_dataset,
    to_cumulative_csv,
)
from .errors import DataFormatError, FitError, PredictionError
from .estimation import (
    FitResult,
    OptimizerConfig,
    SimplexResult,
    fit,
    least_squares_objective,
    nelder_mead,
)
from .evaluation import (
    AggregateCell,
    AggregateCurve,
    ValidityCurve,
    aggregate_median,
    aggregate_to_csv,
    aggregate_to_json,
    curve_to_csv,
    curve_to_json,
    default_cut_points,
    number_of_failures_eval,
    outlier_report,
)
from .model import (
    GeometricModelParams,
    additional_time,
    additional_time_abs,
    default_truncation,
    failure_intensity,
    fault_cdf,
    fault_rate,
    log_likelihood_small,
    mean_failures,
    time_for_intensity,
    time_for_intensity_exact,
)
from .simulation import (
    FaultRealization,
    SimulationConfig,
    draw_realizations,
    empirical_intensity,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_MODEL_NAMES",
    "AggregateCell",
    "AggregateCurve",
    "DataFormatError",
    "FailureDataset",
    "FaultRealization",
    "FitError",
    "FitResult",
    "GeometricModelParams",
    "GeometricRates",
    "LittlewoodVerrall",
    "LittlewoodVerrallParams",
    "MusaBasic",
    "MusaBasicParams",
    "MusaOkumoto",
    "MusaOkumotoParams",
    "Nhpp",
    "NhppParams",
    "OptimizerConfig",
    "PredictionError",
    "REFERENCE_MODEL_NAMES",
    "ReliabilityModel",
    "SimplexResult",
    "SimulationConfig",
    "TimeConversionProfile",
    "TimeUnit",
    "ValidityCurve",
    "additional_time",
    "additional_time_abs",
    "aggregate_median",
    "aggregate_to_csv",
    "aggregate_to_json",
    "convert_time",
    "curve_to_csv",
    "curve_to_json",
    "default_cut_points",
    "default_truncation",
    "draw_realizations",
    "empirical_intensity",
    "failure_intensity",
    "fault_cdf",
    "fault_rate",
    "fit",
    "fit_comparison",
    "fit_model",
    "least_squares_objective",
    "littlewood_verrall_fit_predict",
    "log_likelihood_small",
    "mean_failures",
    "musa_basic_mean",
    "musa_okumoto_mean",
    "nelder_mead",
    "nhpp_mean",
    "number_of_failures_eval",
    "outlier_report",
    "parse_dataset",
    "rescale_dataset",
    "simulate",
    "time_for_intensity",
    "time_for_intensity_exact",
    "to_cumulative_csv",
]
