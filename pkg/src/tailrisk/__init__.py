"""Second-order asymptotics and Monte Carlo checks for systemic risk measures
of sums of heavy-tailed losses under Sarmanov dependence."""

from .asymptotics import AsymptoticValue, evaluate
from .errors import (
    AdmissibilityError,
    DomainError,
    InsufficientExceedancesError,
    TailRiskError,
)
from .kernels import KernelSpec
from .marginals import AbsStudentT, Burr, Frechet, Pareto, Weiss, marginal_from_config
from .montecarlo import MCEstimate, Simulation
from .sarmanov import SarmanovModel

__all__ = [
    "AbsStudentT",
    "AdmissibilityError",
    "AsymptoticValue",
    "Burr",
    "DomainError",
    "Frechet",
    "InsufficientExceedancesError",
    "KernelSpec",
    "MCEstimate",
    "Pareto",
    "SarmanovModel",
    "Simulation",
    "TailRiskError",
    "Weiss",
    "evaluate",
    "marginal_from_config",
]

__version__ = "0.1.0"
