"""Monotone baseline hazards in the Cox model.

Shape-constrained maximum likelihood estimation of a nondecreasing or
nonincreasing baseline hazard, likelihood ratio tests for its value at a
point, and pointwise confidence intervals.
"""

from .constrained import ConstrainedFit, check_kkt_constrained, fit_constrained
from .data import IngestConfig, OrderedSample, load_csv, locate_interval
from .errors import (BoundaryWarning, InputError, MonohazError,
                     NumericalError)
from .inference import (IntervalReport, LrtResult, QuantileTable,
                        ci_asymptotic, ci_lr_inversion, loglik, lrt)
from .isotonic import (CsDiagram, StepHazard, build_csd,
                       check_fenchel_unconstrained, fit_unconstrained,
                       gcm_left_slopes, lcm_left_slopes)
from .kernels import BACKEND
from .partial_likelihood import NewtonOptions, fit_beta

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundaryWarning", "ConstrainedFit", "CsDiagram", "InputError",
    "IngestConfig", "IntervalReport", "LrtResult", "MonohazError",
    "NewtonOptions", "NumericalError", "OrderedSample", "QuantileTable",
    "StepHazard", "build_csd", "check_fenchel_unconstrained",
    "check_kkt_constrained", "ci_asymptotic", "ci_lr_inversion", "fit_beta",
    "fit_constrained", "fit_unconstrained", "gcm_left_slopes",
    "lcm_left_slopes", "load_csv", "locate_interval", "loglik", "lrt",
]
