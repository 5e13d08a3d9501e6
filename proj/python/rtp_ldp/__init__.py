"""Run-and-tumble particles on the discrete torus: simulation, hydrodynamic
solves, rate functions and the acceptance checks."""

from ._rtp_ldp import (
    ConfigurationError,
    DomainError,
    StabilityError,
    StateError,
    SwitchRateFamily,
    curie_weiss_fixed_points,
    integrate_magnetization_ode,
    run_criterion,
    simulate,
    solve,
    static_rate,
    total_rate,
)

__all__ = [
    "ConfigurationError",
    "DomainError",
    "StabilityError",
    "StateError",
    "SwitchRateFamily",
    "curie_weiss_fixed_points",
    "integrate_magnetization_ode",
    "run_criterion",
    "simulate",
    "solve",
    "static_rate",
    "total_rate",
]
