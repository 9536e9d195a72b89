"""Named verification suites, as run by ``xisb verify``."""
from __future__ import annotations

import math

import numpy as np

from .density import (MAX_K, CriticalLineTable, SizeBiasedDist, mellin_target, moment,
                      reflection_residuals, verify_majorization, verify_sizebias, verify_thm11)
from .errors import DomainError
from .funceq import verify_thm21_grid
from .heatflow import (HEAT_PROBES, HeatKernelProfile, scan_zeros, verify_heatpde, winding_number,
                       xi_heat)
from .policy import DEFAULT_POLICY, PrecisionPolicy
from .report import Check, VerificationReport
from .theta import theta_mellin_check
from .xi_core import eval_xi

SUITES = ("mellin", "sizebias", "thm11", "thm21", "majorization", "heatpde", "zeros")
MELLIN_POINTS = (2.0, 0.5, complex(0.3, 1.0), complex(0.7, -1.0), complex(3.0, 5.0))
MOMENT_POWERS = (0.0, 0.5, 1.0, 2.0, 3.0)
REFLECTION_GRID = np.geomspace(0.2, 5.0, 30)
MAJORIZATION_GRID = np.geomspace(0.2, 5.0, 25)
ZERO_WINDOW = 35.0
ZERO_TOL = 1e-6
FLOW_LAMBDAS = (0.0, 0.05, 0.125, 0.25)
HEAT_T = (0.0, 5.0, 10.0, 14.0, 20.0)


class SuiteContext:
    """Distributions and profiles shared across suites, built on first use."""

    def __init__(self, table: CriticalLineTable, policy: PrecisionPolicy = DEFAULT_POLICY):
        self.table = table
        self.policy = policy
        self._dists: dict[int, SizeBiasedDist] = {}
        self._profiles: dict[int, HeatKernelProfile] = {}

    def dist(self, k: int) -> SizeBiasedDist:
        if k not in self._dists:
            self._dists[k] = SizeBiasedDist(k, self.table, self.policy)
        return self._dists[k]

    def profile(self, k: int) -> HeatKernelProfile:
        if k not in self._profiles:
            self._profiles[k] = HeatKernelProfile.build(k, self.table, self.policy)
        return self._profiles[k]


def suite_mellin(ctx: SuiteContext, k: int) -> VerificationReport:
    rep = VerificationReport("mellin", info={"k": k})
    for s in MELLIN_POINTS:
        rep.extend(theta_mellin_check(s, ctx.policy).checks)
    dist = ctx.dist(k)
    for p in MOMENT_POWERS:
        m = moment(dist, p)
        rep.add(Check.equal(f"E[X_{k}^{p:g}] = 2^k xi^k", m.value, mellin_target(k, p).real,
                            20 * ctx.policy.abs_tol))
    return rep


def suite_sizebias(ctx: SuiteContext, k: int) -> VerificationReport:
    rep = verify_sizebias(ctx.dist(k))
    res = reflection_residuals(k, REFLECTION_GRID, ctx.table, ctx.policy)
    rep.add(Check.at_most(f"k={k} max|x v(x) - v(1/x)|", float(res.max()), 0.0,
                          10 * ctx.policy.abs_tol))
    return rep


def suite_thm11(ctx: SuiteContext, k: int) -> VerificationReport:
    rep = VerificationReport("thm11", info={"k": k})
    for m in (1, 2):
        if m + k <= MAX_K:
            rep.extend(verify_thm11(m, k, (0.5, 1.0, 2.0), ctx.table, ctx.policy).checks)
    return rep


def suite_thm21(ctx: SuiteContext, k: int) -> VerificationReport:
    return verify_thm21_grid(ctx.dist(k))


def suite_majorization(ctx: SuiteContext, k: int) -> VerificationReport:
    return verify_majorization(max(k, 2), MAJORIZATION_GRID, ctx.table, ctx.policy)


def suite_heatpde(ctx: SuiteContext, k: int) -> VerificationReport:
    prof = ctx.profile(k)
    tol = 20 * ctx.policy.abs_tol
    rep = verify_heatpde(prof, HEAT_PROBES, ctx.policy)
    rep.add(Check.at_most(f"phi_{k} evenness", prof.evenness_residual(), 0.0, 10 * ctx.policy.abs_tol))
    rep.add(Check.at_most(f"phi_{k}(U) negligible", prof.edge_value(), 1e-14, 0.0))
    for t in HEAT_T:
        direct = 2.0 ** (k + 1) * eval_xi(complex(0.5, t)).real ** k
        rep.add(Check.equal(f"Xi_(0,{k})({t:g}) = 2^(k+1) xi^k", xi_heat(0.0, k, t, prof, ctx.policy),
                            direct, tol))
    for lam in (0.0, 0.25):
        rep.add(Check.equal(f"even in t at lambda={lam:g}", xi_heat(lam, k, -7.5, prof, ctx.policy),
                            xi_heat(lam, k, 7.5, prof, ctx.policy), 1e-15))
    return rep


def zero_checks(ctx: SuiteContext, k: int, window: float = ZERO_WINDOW) -> VerificationReport:
    """Real zeros at lambda = 0 with finer-scan and k = 1 cross-checks, winding
    certificates, and the zero count under the flow."""
    prof = ctx.profile(k)
    pol = ctx.policy
    rec = scan_zeros(0.0, k, window, 0.25, prof, pol)
    fine = scan_zeros(0.0, k, window, 0.05, prof, pol)
    rep = VerificationReport("zeros", info={"k": k, "zeros": list(rec.zeros), "kinds": list(rec.kinds),
                                            "fine_zeros": list(fine.zeros)})
    rep.add(Check.at_most("bracket width", rec.bracket_width, ZERO_TOL, 0.0))
    rep.add(Check.equal("finer scan finds the same count", len(fine.zeros), len(rec.zeros), 0))
    for z, zf in zip(rec.zeros, fine.zeros):
        rep.add(Check.equal(f"zero {z:.8f} confirmed by step 0.05", z, zf, ZERO_TOL))
    ref = rec if k == 1 else scan_zeros(0.0, 1, window, 0.25, ctx.profile(1), pol)
    if k != 1:
        rep.info["k1_zeros"] = list(ref.zeros)
        rep.add(Check.equal(f"k={k} zero count matches k=1", len(rec.zeros), len(ref.zeros), 0))
        for z1 in ref.zeros:
            near = min(rec.zeros, key=lambda z: abs(z - z1), default=math.inf)
            rep.add(Check.equal(f"k={k} zero near {z1:.8f} coincides with k=1", near, z1, ZERO_TOL))
    zs = list(ref.zeros)
    for i, z in enumerate(zs):
        gaps = [abs(z - w) for j, w in enumerate(zs) if j != i]
        h = min(0.5, min(gaps, default=1.0) / 3)
        wn = winding_number(0.0, k, (z - h, z + h), (-0.1, 0.1), prof, pol)
        rep.add(Check.equal(f"winding around {z:.6f}", wn, k, 0))
    rep.add(Check.equal("winding on [13,15]x[0.1,0.5]i", winding_number(0.0, k, (13, 15), (0.1, 0.5),
                                                                          prof, pol), 0, 0))
    counts = []
    for lam in FLOW_LAMBDAS:
        r = scan_zeros(lam, k, 30.0, 0.25, prof, pol)
        counts.append(len(r.zeros))
        if lam == 0.25:
            rep.info["lambda_0.25_zeros"] = list(r.zeros)
            rep.info["lambda_0.25_kinds"] = list(r.kinds)
    rep.info["flow_counts"] = dict(zip(map(str, FLOW_LAMBDAS), counts))
    for (l0, c0), (l1, c1) in zip(zip(FLOW_LAMBDAS, counts), zip(FLOW_LAMBDAS[1:], counts[1:])):
        rep.add(Check.at_most(f"zero count on [0,30]: lambda {l0:g} -> {l1:g}", c0, c1, 0))
    return rep


_RUNNERS = {
    "mellin": suite_mellin,
    "sizebias": suite_sizebias,
    "thm11": suite_thm11,
    "thm21": suite_thm21,
    "majorization": suite_majorization,
    "heatpde": suite_heatpde,
    "zeros": zero_checks,
}


def run_suite(name: str, k: int, ctx: SuiteContext) -> VerificationReport:
    if name == "all":
        rep = VerificationReport("all", info={"k": k, "suites": {}})
        for sub in SUITES:
            r = _RUNNERS[sub](ctx, k)
            rep.info["suites"][sub] = r.overall_pass
            rep.extend(Check(f"{sub}: {c.label}", c.lhs, c.rhs, c.abs_err, c.tol, c.passed, c.note)
                       for c in r.checks)
        return rep
    if name not in _RUNNERS:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}, all")
    if not 1 <= k <= MAX_K:
        raise DomainError(f"k must lie in [1, {MAX_K}]")
    return _RUNNERS[name](ctx, k)
