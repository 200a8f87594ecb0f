"""Component-wise multiple-try Metropolis samplers with scale adaptation.

Coordinate-at-a-time MCMC kernels (plain Metropolis, scale-mixture
Metropolis, distance-weighted multiple-try) plus the grid adaptation scheme
that tunes each coordinate's proposal scales from selection frequencies,
chain diagnostics, and a config-driven benchmark harness with a CLI.
"""

from .adaptation import (
    AcmhState,
    AdaptationEvent,
    AdaptationState,
    acmh_maybe_update,
    acmh_step_size,
    acmh_update,
    adaptation_probability,
    maybe_adapt,
    record_acceptances,
    record_sweep,
    respace_log2,
)
from .diagnostics import (
    ChainTrace,
    DiagnosticsReport,
    FrequencyTables,
    InsufficientDataError,
    UndefinedActError,
    act_per_coordinate,
    autocorrelation_time,
    average_squared_jump,
    diagnostics_report,
    effective_sample_size,
    ess_per_coordinate,
    frequency_tables,
)
from .harness import (
    ConfigError,
    ExperimentRuntimeError,
    ExperimentSpec,
    RegionSpec,
    ReplicateReport,
    ReplicateResult,
    SamplerSettings,
    alpha_sweep,
    build_target,
    compare_report,
    parse_experiment_spec,
    region_predicate,
    run_chain,
    run_experiment,
    run_replicates,
    spec_from_mapping,
)
from .kernels import (
    CoordinateUpdateRecord,
    KernelConfig,
    ScaleGrid,
    SweepRecord,
    cmh_sweep,
    cmtm_coordinate_update,
    cmtm_log_weight,
    cmtm_sweep,
    mixture_cmh_sweep,
)
from .rng import (
    NoSelectableCandidateError,
    RngStream,
    draw_categorical_logweights,
    draw_normal,
    draw_normals,
    logsumexp,
    make_stream,
)
from .targets import (
    TargetModel,
    banana,
    four_dim_mixture,
    gaussian_mixture,
    load_grouped_data,
    twenty_dim_mixture,
    two_dim_mixture,
    variance_components,
)

__version__ = "0.1.0"

__all__ = [
    "AcmhState",
    "AdaptationEvent",
    "AdaptationState",
    "ChainTrace",
    "ConfigError",
    "CoordinateUpdateRecord",
    "DiagnosticsReport",
    "ExperimentRuntimeError",
    "ExperimentSpec",
    "FrequencyTables",
    "InsufficientDataError",
    "KernelConfig",
    "NoSelectableCandidateError",
    "RegionSpec",
    "ReplicateReport",
    "ReplicateResult",
    "RngStream",
    "SamplerSettings",
    "ScaleGrid",
    "SweepRecord",
    "TargetModel",
    "UndefinedActError",
    "acmh_maybe_update",
    "acmh_step_size",
    "acmh_update",
    "act_per_coordinate",
    "adaptation_probability",
    "alpha_sweep",
    "autocorrelation_time",
    "average_squared_jump",
    "banana",
    "build_target",
    "cmh_sweep",
    "cmtm_coordinate_update",
    "cmtm_log_weight",
    "cmtm_sweep",
    "compare_report",
    "diagnostics_report",
    "draw_categorical_logweights",
    "draw_normal",
    "draw_normals",
    "effective_sample_size",
    "ess_per_coordinate",
    "four_dim_mixture",
    "frequency_tables",
    "gaussian_mixture",
    "load_grouped_data",
    "logsumexp",
    "make_stream",
    "maybe_adapt",
    "mixture_cmh_sweep",
    "parse_experiment_spec",
    "record_acceptances",
    "record_sweep",
    "region_predicate",
    "respace_log2",
    "run_chain",
    "run_experiment",
    "run_replicates",
    "spec_from_mapping",
    "twenty_dim_mixture",
    "two_dim_mixture",
    "variance_components",
    "__version__",
]
