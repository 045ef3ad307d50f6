"""Finsler-Ricci flow on the unit-circle bundle of the 2-torus."""

from ._finsler_flow import (
    BadResolution,
    BlowUp,
    ConfigError,
    ConvexityViolated,
    FinslerError,
    NonPositiveF,
    Structure,
    conformal_reference,
    fundamental_tensor,
    ricci_scalar,
    run_flow,
    run_scenario,
    sample,
    structure,
)

__all__ = [
    "BadResolution",
    "BlowUp",
    "ConfigError",
    "ConvexityViolated",
    "FinslerError",
    "NonPositiveF",
    "Structure",
    "conformal_reference",
    "fundamental_tensor",
    "ricci_scalar",
    "run_flow",
    "run_scenario",
    "sample",
    "structure",
]
