"""Numerical laboratory for life spans of the heat equation on a half-space
with the nonlinear boundary flux ``-du/dx_N = u^p``."""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    AdmissibilityError,
    DomainError,
    InapplicableError,
    LabError,
    LinearBlowupError,
    NumericalError,
    RangeError,
    StepFailureError,
    WrongRegimeError,
)
from .profiles import Constant, GaussianGrowth, PowerDecay, SingularLog, parse_profile
from .problem import ProblemSpec

__all__ = [
    "__version__",
    "AccuracyError",
    "AdmissibilityError",
    "DomainError",
    "InapplicableError",
    "LabError",
    "LinearBlowupError",
    "NumericalError",
    "RangeError",
    "StepFailureError",
    "WrongRegimeError",
    "Constant",
    "GaussianGrowth",
    "PowerDecay",
    "SingularLog",
    "parse_profile",
    "ProblemSpec",
]
