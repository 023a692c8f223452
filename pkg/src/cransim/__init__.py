"""Sparse channel estimation limits in dense distributed-antenna networks.

A numpy/scipy library plus CLI covering: random deployments, power-law
channel synthesis, Gaussian training, known-support least-squares and
compressive (Basis Pursuit, OMP) estimation, closed-form MSE bounds with
their received-power order statistics, and a reproducible Monte Carlo
harness that cross-validates the closed forms against simulation.
"""

__version__ = "0.1.0"

from .analytics import (
    MetricKind,
    Scenario,
    admissible_support_sizes,
    best_support_size,
    best_support_size_asymptotic,
    expected_count_above,
    min_mse_asymptotic,
    mse_upper_bound,
    oracle_mse,
    power_order_cdf,
    power_order_fractional_moment,
    power_order_pdf,
    power_process_intensity,
    residual_power_expected,
)
from .channel import (
    ChannelVector,
    FadingModel,
    SingularGeometryError,
    draw_channels,
    fading_moment,
    residual_norm_sq,
    select_support,
)
from .estimators import (
    BasisPursuitParams,
    BasisPursuitResult,
    EstimateResult,
    SingularSystemError,
    basis_pursuit,
    omp,
    oracle_ls,
)
from .geometry import (
    Deployment,
    Window,
    distances,
    sample_hppp,
    sample_uniform_deployment,
)
from .montecarlo import (
    DEFAULT_MASTER_SEED,
    ExperimentConfig,
    MonteCarloReport,
    WindowTooSmallError,
    oracle_error_samples,
    oracle_mse_fixed_channel,
    resolve_support_size,
    run_cs_mse,
    run_oracle_mse,
    run_point,
    sample_power_order_stats,
    simulate_interference_power,
    sweep,
    trial_rng,
    validate_order_stats,
)
from .pilots import PilotMatrix, ReceivedSignal, sample_pilot_matrix, synthesize

__all__ = [
    "__version__",
    "BasisPursuitParams",
    "BasisPursuitResult",
    "ChannelVector",
    "DEFAULT_MASTER_SEED",
    "Deployment",
    "EstimateResult",
    "ExperimentConfig",
    "FadingModel",
    "MetricKind",
    "MonteCarloReport",
    "PilotMatrix",
    "ReceivedSignal",
    "Scenario",
    "SingularGeometryError",
    "SingularSystemError",
    "Window",
    "WindowTooSmallError",
    "admissible_support_sizes",
    "basis_pursuit",
    "best_support_size",
    "best_support_size_asymptotic",
    "distances",
    "draw_channels",
    "expected_count_above",
    "fading_moment",
    "min_mse_asymptotic",
    "mse_upper_bound",
    "omp",
    "oracle_error_samples",
    "oracle_ls",
    "oracle_mse",
    "oracle_mse_fixed_channel",
    "power_order_cdf",
    "power_order_fractional_moment",
    "power_order_pdf",
    "power_process_intensity",
    "residual_norm_sq",
    "residual_power_expected",
    "resolve_support_size",
    "run_cs_mse",
    "run_oracle_mse",
    "run_point",
    "sample_hppp",
    "sample_pilot_matrix",
    "sample_power_order_stats",
    "sample_uniform_deployment",
    "select_support",
    "simulate_interference_power",
    "sweep",
    "synthesize",
    "trial_rng",
    "validate_order_stats",
]
