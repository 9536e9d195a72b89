"""The theta kernel Theta(x) = 2x^2 sum_n (2 pi^2 n^4 x^2 - 3 pi n^2) exp(-pi n^2 x^2)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .policy import DEFAULT_POLICY, PrecisionPolicy
from .quad import Decay, integrate_halfline
from .report import Check, VerificationReport
from .xi_core import eval_xi

_PI = math.pi
_MAX_TERMS = 64


@dataclass(frozen=True)
class ThetaEval:
    x: float
    value: float
    terms_used: int


def _series(x: float, policy: PrecisionPolicy) -> ThetaEval:
    """Direct summation; stops once the next term is below abs_tol / 10."""
    x2 = x * x
    total = 0.0
    for n in range(1, _MAX_TERMS + 1):
        n2 = n * n
        term = 2.0 * x2 * (2.0 * _PI * _PI * n2 * n2 * x2 - 3.0 * _PI * n2) * math.exp(-_PI * n2 * x2)
        total += term
        m2 = (n + 1) ** 2
        nxt = 2.0 * x2 * abs(2.0 * _PI * _PI * m2 * m2 * x2 - 3.0 * _PI * m2) * math.exp(-_PI * m2 * x2)
        if nxt < policy.abs_tol / 10.0:
            return ThetaEval(x, total, n)
    return ThetaEval(x, total, _MAX_TERMS)


def theta_eval(x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> ThetaEval:
    if not x > 0:
        raise DomainError("Theta is defined for x > 0")
    x = float(x)
    if x >= 1.0:
        return _series(x, policy)
    r = _series(1.0 / x, policy)
    return ThetaEval(x, r.value / x, r.terms_used)


def theta(x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Theta(x) for x > 0, using x Theta(x) = Theta(1/x) when x < 1."""
    return theta_eval(x, policy).value


def theta_array(xs, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    return np.array([theta(float(x), policy) for x in xs.ravel()]).reshape(xs.shape)


def theta_self_test(policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Discrepancy at x = 1 between the truncated series and an exhaustive
    ten-term sum taken through the reflection x^{-1} Theta(1/x)."""
    truncated = _series(1.0, policy).value
    exhaustive = 0.0
    for n in range(10, 0, -1):
        n2 = n * n
        exhaustive += 2.0 * (2.0 * _PI * _PI * n2 * n2 - 3.0 * _PI * n2) * math.exp(-_PI * n2)
    return abs(truncated - exhaustive / 1.0)


# Theta(x) <= 4 pi^2 x^4 e^{-pi x^2} (1 + 2e-3) for x >= 1, so after x = e^u the
# Mellin integrand e^{su} Theta(e^u) is below C e^{(s+4)u - pi e^{2u}} for u >= 0;
# for u < 0 the reflection Theta(x) = x^{-1} Theta(1/x) gives C e^{(5-s)|u| - ...}.
_THETA_SCALE = 4.0 * _PI * _PI * 1.01


def theta_decay(sigma: float) -> tuple[Decay, Decay]:
    right = Decay("superexp", rate=_PI, power=sigma + 4.0, scale=_THETA_SCALE)
    left = Decay("superexp", rate=_PI, power=5.0 - sigma, scale=_THETA_SCALE)
    return right, left


def theta_mellin(s, policy: PrecisionPolicy = DEFAULT_POLICY):
    """int_0^inf x^{s-1} Theta(x) dx by quadrature (a QuadResult)."""
    s = complex(s)
    if abs(s.real) > 4:
        raise DomainError("|Re(s)| <= 4 required")
    right, left = theta_decay(s.real)
    complex_valued = s.imag != 0

    def f(x):
        vals = theta_array(x, policy)
        if complex_valued:
            return np.exp((s - 1.0) * np.log(x)) * vals
        return x ** (s.real - 1.0) * vals

    # Theta vanishes faster than any power at 0, so any alpha > -1 is honest
    return integrate_halfline(f, policy, alpha=10.0, right=right, left=left,
                              complex_valued=complex_valued)


def theta_mellin_check(s, policy: PrecisionPolicy = DEFAULT_POLICY) -> VerificationReport:
    """Mellin transform of Theta compared with xi(s); pass iff within 10 abs_tol."""
    s = complex(s)
    res = theta_mellin(s, policy)
    rep = VerificationReport("mellin")
    rep.add(Check.equal(f"s={s.real:g}{s.imag:+g}i", res.value, eval_xi(s), 10 * policy.abs_tol,
                        note=f"nodes={res.nodes_used}"))
    return rep
