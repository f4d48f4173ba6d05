"""Deterministic equivalents and scaling laws for random feature ridge regression."""

__version__ = "0.1.0"

from .diagnostics import DiagnosticsReport, choose_m, intrinsic_dim, theorem1_diagnostics
from .empirical import EmpiricalSpectrum, empirical_diagonalize, predict_risk_from_data
from .equivalents import (
    OutOfRegimeError,
    RiskEquivalent,
    approximation_limit_risk,
    deterministic_risk,
    kernel_limit_risk,
    upsilon_chi,
)
from .features import FeatureMapSpec, TargetSpec, spike_with_overlap
from .fixed_point import FixedPoint, FixedPointError, SolverSettings, solve_nu, solve_nu_approx, solve_nu_kernel
from .kernels import BACKEND
from .rates import Crossovers, RateReport, ScalingConfig, crossovers, rate_exponents, validity_region
from .simulator import McEstimate, conditional_risk, mc_risk_feature_map, mc_risk_gaussian, ridge_fit
from .spectrum import Spectrum, SpectrumError, explicit_spectrum, power_law_spectrum, trace_resolvent

__all__ = [
    "BACKEND",
    "Crossovers",
    "DiagnosticsReport",
    "EmpiricalSpectrum",
    "FeatureMapSpec",
    "FixedPoint",
    "FixedPointError",
    "McEstimate",
    "OutOfRegimeError",
    "RateReport",
    "RiskEquivalent",
    "ScalingConfig",
    "SolverSettings",
    "Spectrum",
    "SpectrumError",
    "TargetSpec",
    "approximation_limit_risk",
    "choose_m",
    "conditional_risk",
    "crossovers",
    "deterministic_risk",
    "empirical_diagonalize",
    "explicit_spectrum",
    "intrinsic_dim",
    "kernel_limit_risk",
    "mc_risk_feature_map",
    "mc_risk_gaussian",
    "power_law_spectrum",
    "predict_risk_from_data",
    "rate_exponents",
    "ridge_fit",
    "solve_nu",
    "solve_nu_approx",
    "solve_nu_kernel",
    "spike_with_overlap",
    "theorem1_diagnostics",
    "trace_resolvent",
    "upsilon_chi",
    "validity_region",
]
