"""Splitting and composition integrators with embedded error estimators."""

from .bench import ScanConfig, fit_order, run_adaptive_sweep, run_scan
from .estgen import (
    EstimatorWeights,
    InfeasibleSystemError,
    SchemeSpec,
    assemble_system,
    count_conditions,
    derive_weights,
    solve_weights,
    verify_order,
)
from .opalg import Family, Role, TruncatedSeries, series_exp, series_mul
from .problems import harmonic_flows, kepler_exact, kepler_flows, kepler_init
from .schemes import EmbeddedMethod, catalog, get_method
from .stepper import ControllerConfig, combined_error, integrate_adaptive, integrate_fixed, step_with_stages

__version__ = "0.1.0"

__all__ = [
    "ControllerConfig",
    "EmbeddedMethod",
    "EstimatorWeights",
    "Family",
    "InfeasibleSystemError",
    "Role",
    "ScanConfig",
    "SchemeSpec",
    "TruncatedSeries",
    "assemble_system",
    "catalog",
    "combined_error",
    "count_conditions",
    "derive_weights",
    "fit_order",
    "get_method",
    "harmonic_flows",
    "integrate_adaptive",
    "integrate_fixed",
    "kepler_exact",
    "kepler_flows",
    "kepler_init",
    "run_adaptive_sweep",
    "run_scan",
    "series_exp",
    "series_mul",
    "solve_weights",
    "step_with_stages",
    "verify_order",
]
