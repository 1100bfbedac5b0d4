"""Model-based successive approximation: solver, beam and interaction models, scan harness."""

import json as _json

from ._mbsa import (
    AssemblyError,
    CalibrationError,
    ConfigError,
    Error,
    ModelDomainError,
    ParseError,
    PartitionError,
    SingularityError,
    calibrate,
    check_convergence_condition,
    delta_omega_sq,
    demo,
    error_report,
    mode_eigenvalue,
    natural_frequency,
    pair_stiffness,
    phi_bar,
    run_mbsa,
    single_magnet_omega_sq,
    validate_scenario,
)
from ._mbsa import simulate as _simulate


def simulate(config, seed=None, beta=None, max_iter=None, out=None):
    """Run a scenario file; returns the report as a dict."""
    return _json.loads(_simulate(str(config), seed, beta, max_iter, None if out is None else str(out)))


__all__ = [
    "AssemblyError",
    "CalibrationError",
    "ConfigError",
    "Error",
    "ModelDomainError",
    "ParseError",
    "PartitionError",
    "SingularityError",
    "calibrate",
    "check_convergence_condition",
    "delta_omega_sq",
    "demo",
    "error_report",
    "mode_eigenvalue",
    "natural_frequency",
    "pair_stiffness",
    "phi_bar",
    "run_mbsa",
    "simulate",
    "single_magnet_omega_sq",
    "validate_scenario",
]
