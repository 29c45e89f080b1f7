"""Python bindings for the convisc reconstruction library."""

from ._convisc import (
    ConfigError,
    InfeasibleConstraint,
    PhysicalityError,
    SolverError,
    StepSizeError,
    config_reference,
    format_config,
    forward,
    functional_gradient,
    functional_value,
    invert,
    solve_forward,
    verify,
)

__all__ = [
    "ConfigError",
    "InfeasibleConstraint",
    "PhysicalityError",
    "SolverError",
    "StepSizeError",
    "config_reference",
    "format_config",
    "forward",
    "functional_gradient",
    "functional_value",
    "invert",
    "solve_forward",
    "verify",
]
