"""Simulation and certification toolkit for swap-steering in ring networks.

A ring of n nodes shares bipartite sources between neighbours; node 0 is
trusted and the rest perform (possibly untrusted) joint measurements. The
package computes exact outcome distributions, evaluates the linear ring
witnesses W_n, certifies their classical bounds, models white noise, builds
the universal construction for NPT states and self-tests triangle
realizations.
"""

from .errors import (
    ConfigurationError,
    HypothesisViolation,
    SwapSteerError,
    UnsupportedOracleError,
    UnsupportedStateError,
    UsageError,
    VerificationFailure,
)
from .network import CorrelationTable, Measurement, RingNetwork, ideal_network, joint_distribution
from .witness import WitnessSpec, evaluate, ring_witness

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "CorrelationTable",
    "HypothesisViolation",
    "Measurement",
    "RingNetwork",
    "SwapSteerError",
    "UnsupportedOracleError",
    "UnsupportedStateError",
    "UsageError",
    "VerificationFailure",
    "WitnessSpec",
    "evaluate",
    "ideal_network",
    "joint_distribution",
    "ring_witness",
    "__version__",
]
