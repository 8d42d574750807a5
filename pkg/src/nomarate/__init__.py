"""Distributed rate control and power allocation for two-user downlink NOMA
in Poisson cellular networks, with Monte-Carlo and analytical tooling."""

__version__ = "0.1.0"

from .channel import PowerProfile
from .experiments import ExperimentConfig, SweepResult, mean_with_ci, reliability_audit, run_benchmark, run_csifree, run_sweep
from .geometry import DeploymentConfig, NetworkRealization, make_fixture, sample_ppp
from .pair_allocation import AllocationResult, allocate, allocate_phi
from .rate_control import LinkSpec, phi_approx, phi_exact
from .threshold import ThresholdQuery, cdf_curve, threshold_cdf, threshold_cdf_montecarlo

__all__ = [
    "AllocationResult",
    "DeploymentConfig",
    "ExperimentConfig",
    "LinkSpec",
    "NetworkRealization",
    "PowerProfile",
    "SweepResult",
    "ThresholdQuery",
    "allocate",
    "allocate_phi",
    "cdf_curve",
    "make_fixture",
    "mean_with_ci",
    "phi_approx",
    "phi_exact",
    "reliability_audit",
    "run_benchmark",
    "run_csifree",
    "run_sweep",
    "sample_ppp",
    "threshold_cdf",
    "threshold_cdf_montecarlo",
]
