"""Multi-coin Hadamard walks: exact position laws, limit laws and convergence checks."""

from .coin import KET_DOWN, KET_UP, PHI0, group_velocity, mu_d, nu_d
from .laws import LimitLaw, parse_law
from .walk import (
    MIXED,
    BudgetExceeded,
    InitialSpec,
    MixedBasis,
    PositionDistribution,
    Pure,
    WalkSpec,
    characteristic_function,
    distribution,
    moments,
)

__version__ = "0.1.0"

__all__ = [
    "KET_DOWN",
    "KET_UP",
    "PHI0",
    "group_velocity",
    "mu_d",
    "nu_d",
    "LimitLaw",
    "parse_law",
    "MIXED",
    "BudgetExceeded",
    "InitialSpec",
    "MixedBasis",
    "PositionDistribution",
    "Pure",
    "WalkSpec",
    "characteristic_function",
    "distribution",
    "moments",
    "__version__",
]
