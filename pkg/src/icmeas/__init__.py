"""Interrupt-coalescence measurement toolkit.

Simulates how NIC interrupt coalescing turns packet arrivals into interrupt
timestamps, models the resulting inter-arrival distributions analytically,
and detects periodic traffic injected into a Poisson background with a
histogram-deviation detector and a spectral-density detector.
"""

from .analytic import (
    GapDistParams,
    LambdaEstimate,
    estimate_lambda_ratio,
    estimate_lambda_single_pairs,
    mean_shifted_exp,
    mean_trunc_exp,
    mixture_density,
    pdf_shifted_erlang,
    pdf_shifted_exp,
    pdf_trunc_exp,
)
from .errors import ConfigError, IcmeasError, InsufficientDataError, PreconditionError
from .harness import (
    COALESCENCE_PRESETS,
    PAD_PRESET,
    PDMM_PRESET,
    TRAFFIC_PRESETS,
    ExperimentConfig,
    ExperimentResult,
    MeasurementStats,
    TrialResult,
    config_from_dict,
    emit_results,
    load_experiment_config,
    measurement_stats,
    preset_experiment,
    results_csv,
    results_json,
    run_experiment,
    trial_seeds,
)
from .meassim import (
    CoalescenceConfig,
    HicConfig,
    MeasurementRecord,
    MeasurementSeries,
    PicConfig,
    TicConfig,
    TransferConfig,
    apply_transfer,
    coalesce,
    load_measurements,
    measure,
    save_measurements,
)
from .pad import PadConfig, detect_psd, periodogram, rasterize
from .pdmm import (
    DetectionReport,
    InterArrivalHistogram,
    PdmmConfig,
    accumulate_block,
    closed_form_chi_square,
    detect_stream,
    deviation_histogram,
    min_detectable_deviation,
    pearson_chi_square,
)
from .trafficgen import (
    AttackConfig,
    PacketRecord,
    PacketTrace,
    PoissonConfig,
    gen_periodic,
    gen_poisson,
    load_trace,
    merge,
    save_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "COALESCENCE_PRESETS",
    "CoalescenceConfig",
    "ConfigError",
    "DetectionReport",
    "ExperimentConfig",
    "ExperimentResult",
    "GapDistParams",
    "HicConfig",
    "IcmeasError",
    "InsufficientDataError",
    "InterArrivalHistogram",
    "LambdaEstimate",
    "MeasurementRecord",
    "MeasurementSeries",
    "MeasurementStats",
    "PAD_PRESET",
    "PDMM_PRESET",
    "PacketRecord",
    "PacketTrace",
    "PadConfig",
    "PdmmConfig",
    "PicConfig",
    "PoissonConfig",
    "PreconditionError",
    "TRAFFIC_PRESETS",
    "TicConfig",
    "TransferConfig",
    "TrialResult",
    "accumulate_block",
    "apply_transfer",
    "closed_form_chi_square",
    "coalesce",
    "config_from_dict",
    "detect_psd",
    "detect_stream",
    "deviation_histogram",
    "emit_results",
    "estimate_lambda_ratio",
    "estimate_lambda_single_pairs",
    "gen_periodic",
    "gen_poisson",
    "load_experiment_config",
    "load_measurements",
    "load_trace",
    "mean_shifted_exp",
    "mean_trunc_exp",
    "measure",
    "measurement_stats",
    "merge",
    "min_detectable_deviation",
    "mixture_density",
    "pdf_shifted_erlang",
    "pdf_shifted_exp",
    "pdf_trunc_exp",
    "pearson_chi_square",
    "periodogram",
    "preset_experiment",
    "rasterize",
    "results_csv",
    "results_json",
    "run_experiment",
    "save_measurements",
    "save_trace",
    "trial_seeds",
]
