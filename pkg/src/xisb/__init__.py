"""Size-biased distributions built from powers of the Riemann xi-function."""
from .density import CriticalLineTable, SizeBiasedDist, moment, sample, v
from .errors import (DomainError, GridTooShort, NumericalInstability, PoleError,
                     QuadratureBudgetExceeded, TailNotCertified, XisbError)
from .policy import DEFAULT_POLICY, PrecisionPolicy
from .report import Check, VerificationReport
from .theta import theta
from .xi_core import eval_gamma, eval_Xi, eval_xi, eval_zeta

__version__ = "0.1.0"

__all__ = [
    "CriticalLineTable", "SizeBiasedDist", "moment", "sample", "v",
    "DomainError", "GridTooShort", "NumericalInstability", "PoleError",
    "QuadratureBudgetExceeded", "TailNotCertified", "XisbError",
    "DEFAULT_POLICY", "PrecisionPolicy", "Check", "VerificationReport",
    "theta", "eval_gamma", "eval_Xi", "eval_xi", "eval_zeta",
]
