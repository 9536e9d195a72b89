"""The heat-flow deformation Xi_{lambda,k}(t) = 2 int_R e^{lambda u^2} phi_k(u) e^{itu} du.

``phi_k(u) = e^{u/2} v_k(e^u)`` is even and decays doubly exponentially, so
the integral is taken over [0, U] on a uniform grid with the trapezoid rule,
which for such integrands is accurate to rounding.  At lambda = 0 the
transform is 2^{k+1} Xi(t)^k.
"""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .density import MAX_K, CriticalLineTable, SizeBiasedDist
from .errors import DomainError, GridTooShort
from .policy import DEFAULT_POLICY, PrecisionPolicy
from .quad import trapezoid_even
from .report import Check, VerificationReport

PROFILE_U = 3.5
PROFILE_POINTS = 2001
LAMBDA_MAX = 1.0
BRACKET_WIDTH = 1e-8
WINDING_SAMPLES = 400


@dataclass(frozen=True)
class HeatKernelProfile:
    """phi_k sampled on the symmetric grid u_grid (odd length, centred on 0)."""

    k: int
    u_grid: np.ndarray
    phi_values: np.ndarray
    abs_tol: float

    def __post_init__(self):
        n = len(self.u_grid)
        if n % 2 == 0 or len(self.phi_values) != n:
            raise ValueError("profile grid must have odd length matching phi_values")
        for a in (self.u_grid, self.phi_values):
            a.setflags(write=False)

    @classmethod
    def build(cls, k: int, table: CriticalLineTable, policy: PrecisionPolicy = DEFAULT_POLICY,
              U: float = PROFILE_U, points: int = PROFILE_POINTS) -> "HeatKernelProfile":
        if int(k) != k or not 1 <= k <= MAX_K:
            raise DomainError(f"k must be an integer in [1, {MAX_K}]")
        if points % 2 == 0:
            points += 1
        u = np.linspace(-U, U, points)
        dist = SizeBiasedDist(int(k), table, policy)
        ph = np.asarray(dist.phi(u), dtype=float)
        return cls(int(k), u, ph, policy.abs_tol)

    @property
    def U(self) -> float:
        return float(self.u_grid[-1])

    @property
    def step(self) -> float:
        return float(self.u_grid[1] - self.u_grid[0])

    @property
    def half(self) -> tuple[np.ndarray, np.ndarray]:
        c = len(self.u_grid) // 2
        return self.u_grid[c:], self.phi_values[c:]

    def evenness_residual(self) -> float:
        return float(np.max(np.abs(self.phi_values - self.phi_values[::-1])))

    def edge_value(self) -> float:
        return float(max(abs(self.phi_values[0]), abs(self.phi_values[-1])))


def _check_lambda(lam: float, profile: HeatKernelProfile, policy: PrecisionPolicy) -> float:
    lam = float(lam)
    if not lam <= LAMBDA_MAX:
        raise DomainError(f"lambda <= {LAMBDA_MAX:g} required")
    if math.exp(lam * profile.U ** 2) * profile.edge_value() > policy.abs_tol:
        raise GridTooShort(f"e^(lambda U^2) phi_k(U) exceeds abs_tol at lambda = {lam:g}")
    return lam


def _transform(lam, t, profile, policy, power=0, trig="cos"):
    """4 int_0^U e^{lambda u^2} u^power phi_k(u) trig(t u) du for scalar or array t."""
    lam = _check_lambda(lam, profile, policy)
    u, ph = profile.half
    base = np.exp(lam * u * u) * ph
    if power:
        base = base * u ** power
    ta = np.atleast_1d(np.asarray(t))
    kernel = np.cos(np.outer(ta, u)) if trig == "cos" else np.sin(np.outer(ta, u))
    vals, err = trapezoid_even(kernel * base, profile.step)
    vals, err = 4.0 * vals, 4.0 * err
    if np.ndim(t) == 0:
        return vals[0], float(err[0])
    return vals, err


def xi_heat(lam: float, k: int, t, profile: HeatKernelProfile,
            policy: PrecisionPolicy = DEFAULT_POLICY):
    """Xi_{lambda,k}(t) for real or complex t (arrays allowed)."""
    if profile.k != k:
        raise DomainError(f"profile is for k = {profile.k}, not {k}")
    val, _ = _transform(lam, t, profile, policy)
    if np.iscomplexobj(val):
        return complex(val) if np.ndim(val) == 0 else val
    return float(val) if np.ndim(val) == 0 else val


def xi_heat_dt(lam: float, t, profile: HeatKernelProfile, policy: PrecisionPolicy = DEFAULT_POLICY):
    """d/dt Xi_{lambda,k}(t) = -4 int e^{lambda u^2} u phi_k(u) sin(tu) du."""
    val, _ = _transform(lam, t, profile, policy, power=1, trig="sin")
    return -val


def heat_trace_csv(lam: float, ts, profile: HeatKernelProfile,
                   policy: PrecisionPolicy = DEFAULT_POLICY) -> str:
    ts = np.asarray(ts, dtype=float)
    vals = xi_heat(lam, profile.k, ts, profile, policy)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "xi_heat"])
    for t, v in zip(ts, np.atleast_1d(vals)):
        w.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


# -- zero scanning ------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroRecord:
    lam: float
    k: int
    zeros: tuple[float, ...]
    bracket_width: float
    kinds: tuple[str, ...] = ()
    t_scan: float = 0.0
    step: float = 0.0
    # largest rounding-error estimate of the transform over the scan grid;
    # zeros where |Xi_{lambda,k}| stays near this level are not resolvable
    noise_floor: float = 0.0

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.zeros, self.zeros[1:])):
            raise ValueError("zeros must be strictly increasing")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["zeros"], d["kinds"] = list(self.zeros), list(self.kinds)
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _bisect(g, a: float, b: float, ga: float, width: float) -> tuple[float, float]:
    while b - a > width:
        m = 0.5 * (a + b)
        gm = g(m)
        if gm == 0.0:
            return m, 0.0
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b), b - a


def scan_zeros(lam: float, k: int, t_scan: float, step: float, profile: HeatKernelProfile,
               policy: PrecisionPolicy = DEFAULT_POLICY, width: float = BRACKET_WIDTH) -> ZeroRecord:
    """Real zeros of Xi_{lambda,k} on [0, t_scan].

    Simple zeros come from sign changes of the transform.  Even-order zeros
    (Xi^k at lambda = 0 for even k never changes sign) are local minima of
    |F|: places where F F' turns from negative to positive without F changing sign;
    these are located by bisecting F' and kept only when F there is
    indistinguishable from zero at the transform's own rounding level.
    """
    if not step <= 0.25:
        raise DomainError("scan step must be at most 0.25")
    if profile.k != k:
        raise DomainError(f"profile is for k = {profile.k}, not {k}")
    n = int(math.floor(t_scan / step + 1e-9))
    ts = np.arange(n + 1) * step
    F, Ferr = _transform(lam, ts, profile, policy)
    D = xi_heat_dt(lam, ts, profile, policy)
    f = lambda t: float(_transform(lam, t, profile, policy)[0])  # noqa: E731
    d = lambda t: float(xi_heat_dt(lam, t, profile, policy))  # noqa: E731

    found: list[tuple[float, str, float]] = []
    for i in range(n):
        a, b = ts[i], ts[i + 1]
        if F[i] == 0.0:
            found.append((a, "sign", 0.0))
        elif F[i] * F[i + 1] < 0:
            z, w = _bisect(f, a, b, F[i], width)
            found.append((z, "sign", w))
        elif F[i] * D[i] < 0 and F[i + 1] * D[i + 1] > 0:
            z, w = _bisect(d, a, b, D[i], width)
            # noise level of the transform near z, from the trapezoid error estimate
            noise = max(float(Ferr[i]), float(Ferr[i + 1]), 1e-300)
            if abs(f(z)) <= 100.0 * noise:
                found.append((z, "tangent", w))
    found.sort()
    zeros = tuple(z for z, _, _ in found)
    return ZeroRecord(float(lam), int(k), tuple(float(z) for z in zeros),
                      float(max((w for *_, w in found), default=0.0)),
                      tuple(kind for _, kind, _ in found), float(t_scan), float(step),
                      float(np.max(Ferr)))


# -- heat equation ------------------------------------------------------------------


@dataclass(frozen=True)
class HeatResidual:
    fd: float
    fd_half: float
    order: float
    analytic: float
    d2t: float
    dlam: float


def heat_equation_residual(lam: float, k: int, t: float, profile: HeatKernelProfile,
                           policy: PrecisionPolicy = DEFAULT_POLICY, dl: float = 1e-3,
                           dt: float = 1e-3) -> HeatResidual:
    """Backward heat equation d^2/dt^2 Xi + d/dlambda Xi = 0, two ways.

    ``fd`` uses central differences with steps (dl, dt), ``fd_half`` the same
    with halved steps, and ``order`` is log2(fd / fd_half).  ``analytic``
    differentiates under the integral sign: both derivatives carry u^2,
    with opposite signs.
    """
    for h in (dl, dt):
        if not 1e-4 <= h <= 1e-2:
            raise DomainError("difference steps must lie in [1e-4, 1e-2]")
    if profile.k != k:
        raise DomainError(f"profile is for k = {profile.k}, not {k}")

    def F(l, tt):
        return float(_transform(l, tt, profile, policy)[0])

    def fd(hl, ht):
        d2t = (F(lam, t + ht) - 2.0 * F(lam, t) + F(lam, t - ht)) / (ht * ht)
        dlam = (F(lam + hl, t) - F(lam - hl, t)) / (2.0 * hl)
        return abs(d2t + dlam)

    r1, r2 = fd(dl, dt), fd(0.5 * dl, 0.5 * dt)
    order = math.log2(r1 / r2) if r1 > 0 and r2 > 0 else math.nan
    d2t = -float(_transform(lam, t, profile, policy, power=2)[0])
    dlam = float(_transform(lam, t, profile, policy, power=2)[0])
    return HeatResidual(r1, r2, order, abs(d2t + dlam), d2t, dlam)


# -- complex t -----------------------------------------------------------------


def strip_probe(lam: float, k: int, t: complex, profile: HeatKernelProfile,
                policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """Xi_{lambda,k} at complex t with |Im t| <= 0.6."""
    t = complex(t)
    if abs(t.imag) > 0.6:
        raise DomainError("|Im t| <= 0.6 required")
    return complex(xi_heat(lam, k, t, profile, policy))


def winding_number(lam: float, k: int, re: tuple[float, float], im: tuple[float, float],
                   profile: HeatKernelProfile, policy: PrecisionPolicy = DEFAULT_POLICY,
                   samples: int = WINDING_SAMPLES) -> int:
    """Zeros of Xi_{lambda,k} inside the rectangle re x i*im, by the argument principle.

    The boundary is sampled counter-clockwise; any step whose phase jump
    exceeds pi/4 is subdivided until it does not (or to 2^-30 of the side).
    """
    (a, b), (c, d) = re, im
    corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d), complex(a, c)]
    perim = 2 * ((b - a) + (d - c))
    F = lambda zs: np.atleast_1d(xi_heat(lam, k, np.asarray(zs, dtype=complex), profile, policy))  # noqa: E731
    total = 0.0
    for p, q in zip(corners[:-1], corners[1:]):
        m = max(4, int(round(samples * abs(q - p) / perim)))
        zs = p + (q - p) * np.linspace(0.0, 1.0, m + 1)
        vals = F(zs)
        if np.any(vals == 0):
            raise DomainError("zero on the rectangle boundary")
        for z0, z1, f0, f1 in zip(zs[:-1], zs[1:], vals[:-1], vals[1:]):
            total += _phase_step(F, z0, z1, f0, f1, 0)
    return int(round(total / (2.0 * math.pi)))


def _phase_step(F, z0, z1, f0, f1, depth) -> float:
    jump = cmath.phase(f1 / f0)
    if abs(jump) <= math.pi / 4 or depth >= 30:
        return jump
    zm = 0.5 * (z0 + z1)
    fm = complex(F([zm])[0])
    if fm == 0:
        raise DomainError("zero on the rectangle boundary")
    return _phase_step(F, z0, zm, f0, fm, depth + 1) + _phase_step(F, zm, z1, fm, f1, depth + 1)


# -- suites -------------------------------------------------------------------------


def verify_heatpde(profile: HeatKernelProfile, probes: Sequence[tuple[float, float]],
                   policy: PrecisionPolicy = DEFAULT_POLICY) -> VerificationReport:
    rep = VerificationReport("heatpde", info={"k": profile.k})
    for lam, t in probes:
        r = heat_equation_residual(lam, profile.k, t, profile, policy)
        rep.add(Check.at_most(f"analytic lambda={lam:g} t={t:g}", r.analytic, 0.0, 20 * policy.abs_tol,
                              note=f"fd={r.fd:.2e} fd_half={r.fd_half:.2e} order={r.order:.2f}"))
    return rep


HEAT_PROBES = tuple((lam, t) for lam in (0.0, 0.1, 0.25) for t in (0.0, 5.0, 14.0))
