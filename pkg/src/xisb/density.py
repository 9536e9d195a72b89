"""The size-biased family X_k and its density v_k.

The Mellin transform of ``v_k`` is ``2^k xi(s)^k``, so ``x^{-1} v_k(x)`` is a
probability density on (0, inf) with ``E[X_k^p] = 2^k xi(p)^k``.  On the
critical line this inverts to

    v_k(x) = (2^k / pi) x^{-1/2} int_0^inf Xi(t)^k cos(t log x) dt,

which is evaluated from a cached grid of Xi values with the trapezoid
rule.  The integrand is even and entire, so the rule converges
geometrically in the grid step; truncation at ``t_max`` is controlled by
the fitted envelope ``|Xi(t)| <= C t^A exp(-pi t / 4)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import DomainError, NumericalInstability, TailNotCertified
from .policy import DEFAULT_POLICY, PrecisionPolicy
from .quad import Decay, Integrand, QuadResult, integrate_line, panel_integrals, trapezoid_even
from .report import Check, VerificationReport
from .xi_core import Xi_values, eval_xi, fit_decay

TABLE_VERSION = "XITAB1"
MAX_T = 100.0
MAX_K = 4

SUPPORT = (0.02, 50.0)
CDF_POINTS = 600
# phi_k is computed to ~1e-16 absolute; below this it is rounding noise
PHI_FLOOR = 1e-12
# where the fitted envelope is below the ~1e-15 rounding floor, phi_k is zeroed
PHI_ZERO = 1e-15

# Envelope phi_k(u) <= C exp(POWER u - RATE_FACTOR k pi exp(2u/k)) for u >= 0.
# X_k is a product of k independent copies of X_1, whose log-density decays
# like exp(-pi e^{2u}); the constants keep generous slack on both.
_ENV_POWER = 6.0
_ENV_RATE_FACTOR = 0.8


def _check_k(k) -> int:
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return int(k)


def row_count(t_max: float, step: float) -> int:
    return int(math.floor(t_max / step + 1e-9)) + 1


@dataclass(frozen=True, eq=False)
class CriticalLineTable:
    """Xi(i * step) for i = 0 .. floor(t_max / step); negative t by symmetry."""

    t_max: float
    step: float
    values: np.ndarray
    fitted_C: float
    fitted_A: float
    abs_tol: float = DEFAULT_POLICY.abs_tol
    version: str = TABLE_VERSION

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if len(vals) != row_count(self.t_max, self.step):
            raise ValueError("row count does not match t_max / step")
        if not np.all(np.isfinite(vals)):
            raise NumericalInstability("non-finite Xi value in table")
        if abs(vals[0] - 0.4971207781883141) > 1e-9:
            raise NumericalInstability(f"table starts at {vals[0]!r}, expected Xi(0)")
        if not (self.fitted_C > 0 and self.fitted_A > 0):
            raise ValueError("fitted envelope constants must be positive")

    @classmethod
    def build(cls, t_max: float = 60.0, step: float = 0.05,
              policy: PrecisionPolicy = DEFAULT_POLICY) -> "CriticalLineTable":
        if not 0 < t_max <= MAX_T:
            raise DomainError(f"t_max must lie in (0, {MAX_T:g}] (accuracy envelope of Xi)")
        if t_max < 20:
            raise DomainError("t_max below 20 leaves too few maxima to fit the decay envelope")
        if not 0 < step <= 0.25:
            raise DomainError("step must lie in (0, 0.25]")
        ts = step * np.arange(row_count(t_max, step))
        values = Xi_values(ts, policy)
        C, A = fit_decay(ts, values, 10.0, min(60.0, ts[-1]))
        return cls(float(t_max), float(step), values, C, A, policy.abs_tol)

    @property
    def ts(self) -> np.ndarray:
        return self.step * np.arange(len(self.values))

    def envelope(self, k: int, n: int = 0) -> Decay:
        """Decay of |Xi(t)^k t^n| beyond t = 5."""
        return Decay("exponential", rate=k * math.pi / 4, power=k * self.fitted_A + n,
                     scale=self.fitted_C ** k, start=5.0)

    def tail(self, k: int, n: int = 0) -> float:
        return self.envelope(k, n).tail(self.t_max)

    @cached_property
    def _weights(self) -> np.ndarray:
        w = np.full(len(self.values), self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    def cosine_transform(self, k: int, u) -> tuple[np.ndarray, np.ndarray]:
        """int_0^inf Xi(t)^k cos(t u) dt at each u; returns (values, error)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(np.abs(u) > 0.5 * math.pi / self.step):
            raise NumericalInstability("|log x| too large for the table step (aliasing)")
        powered = self.values ** k
        out = np.empty(u.shape)
        err = np.empty(u.shape)
        flat_u, flat_out, flat_err = u.ravel(), out.reshape(-1), err.reshape(-1)
        # chunk to keep the cosine matrix small
        for lo in range(0, len(flat_u), 512):
            cu = flat_u[lo:lo + 512]
            mat = np.cos(np.outer(cu, self.ts)) * powered
            val, e = trapezoid_even(mat, self.step)
            flat_out[lo:lo + 512] = val
            flat_err[lo:lo + 512] = e
        return out, err + self.tail(k)


def phi(k: int, u, table: CriticalLineTable, policy: PrecisionPolicy = DEFAULT_POLICY):
    """phi_k(u) = e^{u/2} v_k(e^u), an even function of u."""
    k = _check_k(k)
    vals, _ = _phi_with_error(k, u, table, policy)
    return vals if np.ndim(u) else float(vals[0])


def _phi_with_error(k, u, table, policy):
    tail = table.tail(k) * 2 ** k / math.pi
    if tail > policy.tail_ratio * policy.abs_tol:
        raise TailNotCertified(
            f"table t_max = {table.t_max:g} leaves tail {tail:.2e} for k = {k}; extend the table"
        )
    vals, err = table.cosine_transform(k, u)
    c = 2 ** k / math.pi
    return c * vals, c * err


def v(k: int, x, table: CriticalLineTable, policy: PrecisionPolicy = DEFAULT_POLICY):
    """v_k(x) by inverse Mellin transform along the critical line."""
    value, _ = v_with_error(k, x, table, policy)
    return value


def v_with_error(k: int, x, table: CriticalLineTable, policy: PrecisionPolicy = DEFAULT_POLICY):
    k = _check_k(k)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)):
        raise DomainError("v_k is defined for x > 0 only")
    u = np.log(xa)
    p, e = _phi_with_error(k, u, table, policy)
    scale = np.exp(-0.5 * u)
    value, err = p * scale, e * scale
    if np.ndim(x) == 0:
        return float(value[0]), float(err[0])
    return value, err


# -- the distribution ---------------------------------------------------------


class SizeBiasedDist:
    """X_k with density x^{-1} v_k(x) on (0, inf).

    Construction tabulates the CDF on ``CDF_POINTS`` log-spaced points.  The
    support is the part of ``SUPPORT`` where the density exceeds
    ``DENSITY_FLOOR``; outside it the CDF is computed by direct quadrature.
    """

    def __init__(self, k: int, table: CriticalLineTable, policy: PrecisionPolicy = DEFAULT_POLICY):
        self.k = _check_k(k)
        if self.k > MAX_K:
            raise DomainError(f"k > {MAX_K} is outside the tuned range")
        self.table = table
        self.policy = policy
        self._build_envelope()
        self._build_cdf()

    # phi envelope ------------------------------------------------------------

    def phi(self, u):
        """phi_k(u), set to exactly 0 where the envelope is below ``PHI_ZERO``."""
        vals = phi(self.k, u, self.table, self.policy)
        if not hasattr(self, "phi_envelope"):
            return vals
        dead = self.phi_envelope.log_bound(np.abs(u)) < math.log(PHI_ZERO)
        return np.where(dead, 0.0, vals) if np.ndim(u) else (0.0 if dead else vals)

    def v(self, x):
        return v(self.k, x, self.table, self.policy)

    def _build_envelope(self) -> None:
        k = self.k
        base = 2.0 / k
        rate = _ENV_RATE_FACTOR * k * math.pi
        u = np.linspace(0.0, 3.5, 351)
        ph = np.asarray(self.phi(u))
        self.phi_max = float(np.max(np.abs(ph)))
        shape = np.exp(_ENV_POWER * u - rate * np.exp(base * u))
        ok = np.abs(ph) > 1e-12
        scale = 2.0 * float(np.max(np.abs(ph[ok]) / shape[ok]))
        self.phi_envelope = Decay("superexp", rate=rate, power=_ENV_POWER, scale=scale,
                                  start=0.0, base=base)

    def expect_integrand(self, w: Callable[[np.ndarray], np.ndarray], *, tilt_right: float = 0.0,
                         tilt_left: float = 0.0, bound: float = 1.0, breakpoints: Sequence[float] = (),
                         complex_valued: bool = False) -> Integrand:
        """Integrand in u = log x for E[w(log X)] = int w(u) v_k(e^u) du.

        ``|w(u)| <= bound * e^{tilt_right u}`` for u >= 0 and
        ``|w(-d)| <= bound * e^{tilt_left d}`` for d >= 0.
        """
        env = self.phi_envelope

        def f(u):
            return w(u) * np.exp(-0.5 * u) * self.phi(u)

        return Integrand(
            f,
            right=env.tilted(tilt_right - 0.5).scaled(bound),
            left=env.tilted(tilt_left + 0.5).scaled(bound),
            breakpoints=tuple(breakpoints),
            panel_width=0.5,
            complex_valued=complex_valued,
        )

    def expect(self, w, **kw) -> QuadResult:
        return integrate_line(self.expect_integrand(w, **kw), self.policy)

    # cdf ---------------------------------------------------------------------

    def _density_logx(self, w):
        # density of log X_k
        return np.exp(-0.5 * w) * self.phi(w)

    def _build_cdf(self) -> None:
        probe = np.geomspace(*SUPPORT, CDF_POINTS)
        ph = np.asarray(self.phi(np.log(probe)))
        # walk outward from x = 1 while phi_k stays above its rounding floor
        centre = int(np.argmin(np.abs(np.log(probe))))
        lo = hi = centre
        while lo > 0 and ph[lo - 1] >= PHI_FLOOR:
            lo -= 1
        while hi < len(probe) - 1 and ph[hi + 1] >= PHI_FLOOR:
            hi += 1
        if hi - lo < 2:
            raise NumericalInstability("density never rises above the floor on the support")
        x_lo, x_hi = probe[lo], probe[hi]
        grid = np.geomspace(x_lo, x_hi, CDF_POINTS)
        w = np.log(grid)
        below = integrate_line(self.expect_integrand(lambda u: np.ones_like(u)), self.policy,
                               upper=float(w[0]))
        pieces, _ = panel_integrals(self._density_logx, w)
        F = below.value + np.concatenate([[0.0], np.cumsum(pieces)])
        slopes = self._density_logx(w)
        if not np.all(np.diff(F) > 0) or not np.all(slopes > 0):
            raise NumericalInstability("tabulated CDF is not strictly increasing")
        if not (F[0] < 1e-10 and F[-1] > 1 - 1e-10):
            raise NumericalInstability(f"CDF table spans [{F[0]:.3e}, {F[-1]:.12f}], not [0, 1]")
        self.cdf_grid = np.column_stack([grid, F])
        self.x_lo, self.x_hi = float(grid[0]), float(grid[-1])
        self._F = CubicHermiteSpline(w, F, _monotone_slopes(w, F, slopes))
        self._inverse = PchipInterpolator(F, w)

    def cdf(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(~(xa > 0)):
            raise DomainError("cdf is defined for x > 0 only")
        w = np.log(xa)
        out = np.clip(self._F(np.clip(w, math.log(self.x_lo), math.log(self.x_hi))), 0.0, 1.0)
        one = lambda u: np.ones_like(u)  # noqa: E731
        for i in np.flatnonzero(xa < self.x_lo):
            out[i] = integrate_line(self.expect_integrand(one), self.policy, upper=float(w[i])).value
        for i in np.flatnonzero(xa > self.x_hi):
            upper = integrate_line(self.expect_integrand(one), self.policy, lower=float(w[i])).value
            out[i] = 1.0 - upper
        out = np.clip(out, 0.0, 1.0)
        return out if np.ndim(x) else float(out[0])

    def survival(self, x) -> QuadResult:
        """P(X_k > x) by direct quadrature."""
        if not x > 0:
            raise DomainError("x must be positive")
        return integrate_line(self.expect_integrand(lambda u: np.ones_like(u)), self.policy,
                              lower=math.log(x))

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        F = self.cdf_grid[:, 1]
        return np.exp(self._inverse(np.clip(q, F[0], F[-1])))

    def moment(self, p: float) -> QuadResult:
        return moment(self, p)

    def sample(self, n: int, seed=None) -> np.ndarray:
        return sample(self, n, seed)


def _monotone_slopes(w, F, slopes):
    """Exact derivatives, replaced by PCHIP ones where Fritsch-Carlson fails."""
    m = np.array(slopes, dtype=float)
    delta = np.diff(F) / np.diff(w)
    a, b = m[:-1] / delta, m[1:] / delta
    bad = a * a + b * b > 9.0
    if np.any(bad):
        pchip = PchipInterpolator(w, F).derivative()(w)
        idx = np.flatnonzero(bad)
        m[idx] = pchip[idx]
        m[idx + 1] = pchip[idx + 1]
    return m


def moment(dist: SizeBiasedDist, p: float) -> QuadResult:
    """E[X_k^p] = int_0^inf x^{p-1} v_k(x) dx."""
    p = float(p)
    if not math.isfinite(p):
        raise DomainError("moment order must be finite")
    return dist.expect(lambda u: np.exp(p * u), tilt_right=p, tilt_left=-p)


def sample(dist: SizeBiasedDist, n: int, seed=None) -> np.ndarray:
    """n inverse-CDF draws; ``seed`` is an int or a numpy Generator."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return dist.quantile(rng.random(int(n)))


def mellin_target(k: int, p) -> complex:
    """2^k xi(p)^k, the exact Mellin transform of v_k."""
    return (2.0 * eval_xi(p)) ** k


# -- power series -------------------------------------------------------------


def series_coeff(n: int, k: int, table: CriticalLineTable,
                 policy: PrecisionPolicy = DEFAULT_POLICY, abs_tol: float | None = None) -> float:
    """c_{n,k} with 2^{-k} sqrt(x) v_k(x) = sum_n c_{n,k} (i log x)^n.

    c_{n,k} = (1 / (2 pi n!)) int_R Xi(t)^k t^n dt; odd n vanish exactly.
    The truncation tail must stay below ``tail_ratio`` times ``abs_tol``
    (default: the policy's) or the relative tolerance, whichever is larger.
    """
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    k = _check_k(k)
    n = int(n)
    if n % 2:
        return 0.0
    powered = table.values ** k * table.ts ** n
    val, err = trapezoid_even(powered, table.step)
    norm = math.pi * math.factorial(n)
    value = float(val) / norm
    tail = table.tail(k, n) / norm
    target = policy.abs_tol if abs_tol is None else abs_tol
    if tail > policy.tail_ratio * max(target, policy.rel_tol * abs(value)):
        raise TailNotCertified(
            f"c_({n},{k}) needs Xi beyond t_max = {table.t_max:g} (tail bound {tail:.2e})"
        )
    return value


def series_partial_sum(x: float, k: int, N: int, table: CriticalLineTable,
                       policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """sum_{n <= N} c_{n,k} (i log x)^n (real: odd terms vanish).

    Each coefficient is certified only to the accuracy its term needs,
    abs_tol / (number of terms * |log x|^n).
    """
    if not x > 0:
        raise DomainError("x must be positive")
    L = math.log(x)
    terms = N // 2 + 1
    total = 0.0
    for n in range(0, N + 1, 2):
        scale = abs(L) ** n
        if scale == 0.0:
            continue
        c = series_coeff(n, k, table, policy, abs_tol=policy.abs_tol / (terms * scale))
        total += c * (-1) ** (n // 2) * L ** n
    return total


def check_ineq_17(n: int, k: int, A: float) -> bool:
    """(k-1)^-(n+Ak) >= (n+Ak) (4/pi) k^-(n+Ak+1), compared in log space."""
    if n < 2 or k < 2 or not A > 0:
        raise DomainError("requires integers n, k >= 2 and A > 0")
    m = n + A * k
    lhs = -m * math.log(k - 1)
    rhs = math.log(m) + math.log(4.0 / math.pi) - (m + 1.0) * math.log(k)
    return lhs >= rhs


def sweep_ineq_17(ns: Sequence[int] = range(2, 51), ks: Sequence[int] = range(2, 51),
                  As: Sequence[float] = (0.5, 1.0, 2.0)) -> list[tuple[int, int, float]]:
    """All (n, k, A) in the sweep where the inequality fails."""
    return [(n, k, A) for A in As for k in ks for n in ns if not check_ineq_17(n, k, A)]


# -- verification suites --------------------------------------------------------


SIZEBIAS_SUITE = (
    # label, f(x) as a function of u = log x, growth exponents (u > 0, u < 0), breakpoints in u
    ("f(x)=1", lambda u: np.ones_like(u), 0.0, 0.0, ()),
    ("f(x)=x", lambda u: np.exp(u), 1.0, -1.0, ()),
    ("f(x)=1/(1+x)", lambda u: 1.0 / (1.0 + np.exp(u)), 0.0, 0.0, ()),
    ("f(x)=exp(-x)", lambda u: np.exp(-np.exp(u)), 0.0, 0.0, ()),
    ("f(x)=sin(log x)", lambda u: np.sin(u), 0.0, 0.0, ()),
    ("f(x)=1[x>1]", lambda u: (u > 0).astype(float), 0.0, 0.0, (0.0,)),
)


def verify_sizebias(dist: SizeBiasedDist, f_suite=SIZEBIAS_SUITE,
                    policy: PrecisionPolicy | None = None) -> VerificationReport:
    """E[X f(X)] against E[f(1/X)], both by quadrature."""
    policy = policy or dist.policy
    tol = 20 * policy.abs_tol
    rep = VerificationReport("sizebias", info={"k": dist.k})
    for label, f, g_pos, g_neg, bps in f_suite:
        lhs = dist.expect(lambda u, f=f: np.exp(u) * f(u), tilt_right=g_pos + 1, tilt_left=g_neg - 1,
                          breakpoints=bps)
        rhs = dist.expect(lambda u, f=f: f(-u), tilt_right=g_neg, tilt_left=g_pos,
                          breakpoints=tuple(-b for b in bps))
        rep.add(Check.equal(f"k={dist.k} {label}", lhs.value, rhs.value, tol))
    return rep


def thm11_lhs(m: int, dist_k: SizeBiasedDist, z: float) -> QuadResult:
    """int_0^inf v_k(x) v_m(x z) dx, i.e. E[X_k v_m(X_k z)]."""
    m = _check_k(m)
    if not z > 0:
        raise DomainError("z must be positive")
    table, policy = dist_k.table, dist_k.policy
    shift = math.log(z)
    phi_m_max = float(np.max(np.abs(phi(m, np.linspace(-3, 3, 61), table, policy))))
    bound = math.exp(-0.5 * shift) * phi_m_max

    def w(u):
        # v_k(e^u) e^u v_m(z e^u) = [v_k(e^u)] * e^u v_m(z e^u)
        return np.exp(u) * v(m, z * np.exp(u), table, policy)

    def f(u):
        return np.exp(-0.5 * u) * dist_k.phi(u) * w(u)

    env = dist_k.phi_envelope.scaled(bound)
    return integrate_line(Integrand(f, right=env, left=env, panel_width=0.5), policy)


def verify_thm11(m: int, k: int, z_list: Sequence[float], table: CriticalLineTable,
                 policy: PrecisionPolicy = DEFAULT_POLICY) -> VerificationReport:
    if m + k > MAX_K:
        raise DomainError("m + k must not exceed 4")
    dist = SizeBiasedDist(k, table, policy)
    tol = 20 * policy.abs_tol
    rep = VerificationReport("thm11", info={"m": m, "k": k})
    for z in z_list:
        lhs = thm11_lhs(m, dist, z)
        rhs = v(m + k, z, table, policy)
        rep.add(Check.equal(f"m={m} k={k} z={z:g}", lhs.value, rhs, tol))
    return rep


def verify_majorization(k: int, x_grid: Sequence[float], table: CriticalLineTable,
                        policy: PrecisionPolicy = DEFAULT_POLICY) -> VerificationReport:
    """Density comparison v_k <= v_{k-1} and tail comparison P(X_k >= x) <= P(X_{k-1} >= x).

    Both are reported as inequality checks; failures are findings, not errors.
    """
    k = _check_k(k)
    if not 2 <= k <= MAX_K:
        raise DomainError("majorization is checked for 2 <= k <= 4")
    tol = 10 * policy.abs_tol
    hi, lo = SizeBiasedDist(k, table, policy), SizeBiasedDist(k - 1, table, policy)
    rep = VerificationReport("majorization", info={"k": k})
    xs = np.asarray(x_grid, dtype=float)
    vk, vk1 = v(k, xs, table, policy), v(k - 1, xs, table, policy)
    for x, a, b in zip(xs, vk, vk1):
        rep.add(Check.at_most(f"density v_{k}({x:.4g}) <= v_{k - 1}", a, b, tol))
    for x in xs:
        a, b = hi.survival(x).value, lo.survival(x).value
        rep.add(Check.at_most(f"tail P(X_{k}>={x:.4g}) <= P(X_{k - 1}>=x)", a, b, tol))
    return rep


def majorization_csv(rep: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "x", "lhs", "rhs", "violation", "pass"])
    for c in rep.checks:
        kind = c.label.split()[0]
        x = c.label.split("(")[1].split(")")[0]
        w.writerow([kind, x, repr(c.lhs), repr(c.rhs), repr(c.abs_err), int(c.passed)])
    return buf.getvalue()


def reflection_residuals(k: int, xs, table: CriticalLineTable,
                         policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """|x v_k(x) - v_k(1/x)| on a grid."""
    xs = np.asarray(xs, dtype=float)
    return np.abs(xs * v(k, xs, table, policy) - v(k, 1.0 / xs, table, policy))
