"""Secrecy-rate maximization for a D2D-underlaid multi-antenna cellular uplink."""

from .algorithms import (
    SCHEMES,
    PacSolution,
    baseline_greedy,
    baseline_random_rb,
    pac_d2d,
    pac_no_d2d,
)
from .harness import RunSpec, run_monte_carlo, sweep_convergence
from .model import SystemConfig, make_rng, sample_channels, sample_topology

__version__ = "0.1.0"
