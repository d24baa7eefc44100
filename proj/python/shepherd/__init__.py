"""Density shepherding on the circle."""

from ._shepherd import (
    Config,
    Env,
    Policy,
    desired_distribution,
    grid_nodes,
    kernel,
    kernel_antiderivative,
    oracle_check,
    run_closed_loop,
    simulate,
    ss_error,
    steady_state_density,
    train,
    wrap,
)

__all__ = [
    "Config",
    "Env",
    "Policy",
    "desired_distribution",
    "grid_nodes",
    "kernel",
    "kernel_antiderivative",
    "oracle_check",
    "run_closed_loop",
    "simulate",
    "ss_error",
    "steady_state_density",
    "train",
    "wrap",
]
