"""Gamma, zeta and the Riemann xi-function for complex arguments.

Everything here is double precision: scipy's complex log-gamma, Euler-Maclaurin
for zeta, and the functional equation to move the left half-plane onto the
right one.
"""
from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import loggamma as _scipy_loggamma

from .errors import DomainError, NumericalInstability, PoleError
from .policy import DEFAULT_POLICY, PrecisionPolicy

_LOG_PI = math.log(math.pi)

# B_2 .. B_20
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)
_EM_COEFFS = tuple(b / math.factorial(2 * j + 2) for j, b in enumerate(_BERNOULLI))

# Stieltjes constants gamma_0 .. gamma_3 for the Laurent expansion at s = 1.
_STIELTJES = (
    0.57721566490153286,
    -0.072815845483676725,
    -0.0096903631928723185,
    0.0020538344203033459,
)

POLE_RADIUS = 1e-12
SWITCH_RADIUS = 1e-4


def _as_point(s) -> complex:
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise DomainError(f"non-finite argument {s!r}")
    return s


def _sinpi(z: complex) -> complex:
    """sin(pi z) with exact reduction of the real part modulo 2."""
    a = math.fmod(z.real, 2.0)
    b = math.pi * z.imag
    sa, ca = math.sin(math.pi * a), math.cos(math.pi * a)
    # exact zeros / ones at integer and half-integer real parts
    if a == int(a):
        sa, ca = 0.0, (1.0 if int(a) % 2 == 0 else -1.0)
    elif 2 * a == int(2 * a):
        sa, ca = (1.0 if a in (0.5, -1.5) else -1.0), 0.0
    return complex(sa * math.cosh(b), ca * math.sinh(b))


def _loggamma_right(z: complex) -> complex:
    """log Gamma(z) for Re(z) >= 1/2 (branch irrelevant: only exp() is used)."""
    return complex(_scipy_loggamma(z))


def _check_gamma_pole(s: complex) -> None:
    if s.real <= 0.5 and abs(s.imag) < POLE_RADIUS:
        n = round(s.real)
        if n <= 0 and abs(s - n) < POLE_RADIUS:
            raise PoleError(f"Gamma has a pole at {n}")


def loggamma(s) -> complex:
    """A logarithm of Gamma(s); exp(loggamma(s)) == Gamma(s)."""
    s = _as_point(s)
    _check_gamma_pole(s)
    if s.real >= 0.5:
        return _loggamma_right(s)
    # reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
    return _LOG_PI - cmath.log(_sinpi(s)) - _loggamma_right(1.0 - s)


def eval_gamma(s) -> complex:
    """Gamma(s) for complex s; raises PoleError near 0, -1, -2, ..."""
    s = _as_point(s)
    _check_gamma_pole(s)
    if s.real >= 0.5:
        return cmath.exp(_loggamma_right(s))
    return math.pi / (_sinpi(s) * cmath.exp(_loggamma_right(1.0 - s)))


def _zeta_em(s: complex) -> complex:
    """Euler-Maclaurin summation, valid for Re(s) >= 0, s != 1."""
    n_terms = max(20, math.ceil(2.0 * abs(s.imag)))
    n = np.arange(1, n_terms, dtype=float)
    terms = np.exp(-s * np.log(n))
    head = complex(math.fsum(terms.real), math.fsum(terms.imag))
    big_n = float(n_terms)
    n_pow = cmath.exp(-s * math.log(big_n))
    total = head + big_n * n_pow / (s - 1.0) + 0.5 * n_pow
    # rising factorial s (s+1) ... (s+2j-2), times N^(-s-2j+1)
    rising = s
    term_pow = n_pow / big_n
    for j, c in enumerate(_EM_COEFFS):
        total += c * rising * term_pow
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
        term_pow /= big_n * big_n
    return total


def eval_zeta(s) -> complex:
    """Analytically continued zeta(s); raises PoleError at s = 1."""
    s = _as_point(s)
    if abs(s - 1.0) < POLE_RADIUS:
        raise PoleError("zeta has a pole at s = 1")
    if s.real >= 0.0:
        return _zeta_em(s)
    # zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1-s) zeta(1-s)
    w = 1.0 - s
    log_factor = s * math.log(2.0) + (s - 1.0) * _LOG_PI + _loggamma_right(w)
    return _sinpi(s / 2.0) * cmath.exp(log_factor) * _zeta_em(w)


def _xi_right(s: complex) -> complex:
    """xi(s) for Re(s) >= 1/2."""
    d = s - 1.0
    log_g = -0.5 * s * _LOG_PI + _loggamma_right(s / 2.0)
    if abs(d) < SWITCH_RADIUS:
        # (s-1) zeta(s) = 1 + sum_n (-1)^n gamma_n (s-1)^(n+1) / n!
        laurent = 1.0
        dp = d
        for n, g in enumerate(_STIELTJES):
            laurent += (-1) ** n * g * dp / math.factorial(n)
            dp *= d
        return 0.5 * s * cmath.exp(log_g) * laurent
    return 0.5 * s * d * cmath.exp(log_g) * _zeta_em(s)


def eval_xi(s) -> complex:
    """Riemann xi(s) = s(s-1)/2 pi^(-s/2) Gamma(s/2) zeta(s).

    Left half-plane arguments are reflected, so ``eval_xi(s)`` and
    ``eval_xi(1 - s)`` are computed from the same expression.
    """
    s = _as_point(s)
    if s.real < 0.5:
        s = 1.0 - s
    return _xi_right(s)


def eval_Xi(t: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Xi(t) = xi(1/2 + i t), real and even in t."""
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"non-finite t {t!r}")
    value = _xi_right(complex(0.5, abs(t)))
    if abs(value.imag) > policy.abs_tol:
        raise NumericalInstability(
            f"Im xi(1/2 + {t}i) = {value.imag:.3e} exceeds abs_tol {policy.abs_tol:.1e}"
        )
    return value.real


def Xi_values(ts, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Vector of Xi(t) over an iterable of real t."""
    return np.array([eval_Xi(t, policy) for t in np.asarray(ts, dtype=float).ravel()])


def fit_decay(ts, values, t_lo: float = 10.0, t_hi: float = 60.0) -> tuple[float, float]:
    """Fit ``|Xi(t)| <= C t^A exp(-pi t / 4)``.

    A comes from a log-scale least-squares fit through the local maxima
    of |Xi| on [t_lo, t_hi]; C is then lifted to dominate every sample with
    t >= 5.  Returns (C, A).
    """
    ts = np.asarray(ts, dtype=float)
    mags = np.abs(np.asarray(values, dtype=float))
    sel = (ts >= t_lo) & (ts <= t_hi)
    tt, mm = ts[sel], mags[sel]
    peaks = np.flatnonzero((mm[1:-1] >= mm[:-2]) & (mm[1:-1] >= mm[2:])) + 1
    if len(peaks) < 2:
        raise NumericalInstability("not enough local maxima to fit the decay envelope")
    y = np.log(mm[peaks]) + math.pi * tt[peaks] / 4.0
    A, _ = np.polyfit(np.log(tt[peaks]), y, 1)
    A = max(float(A), 1e-3)
    far = (ts >= 5.0) & (mags > 0)
    ratio = mags[far] * np.exp(math.pi * ts[far] / 4.0) / ts[far] ** A
    C = float(ratio.max()) * 1.5
    return C, A
