import math

import numpy as np
import pytest

from xisb.errors import DomainError, QuadratureBudgetExceeded, TailNotCertified
from xisb.policy import PrecisionPolicy
from xisb.quad import Decay, Integrand, integrate_halfline, integrate_line, trapezoid_even
from xisb.theta import theta, theta_array, theta_decay
from xisb.xi_core import Xi_values, eval_xi

SQRT_PI = math.sqrt(math.pi)
GAUSS = Decay("gaussian", rate=1.0)

# (name, integrand, right decay, breakpoints, exact value over the real line)
CLOSED_FORMS = [
    ("gaussian", lambda t: np.exp(-t * t), GAUSS, (), SQRT_PI),
    ("t^2 gaussian", lambda t: t * t * np.exp(-t * t), Decay("gaussian", 1.0, power=2.0), (), SQRT_PI / 2),
    ("t^4 gaussian", lambda t: t ** 4 * np.exp(-t * t), Decay("gaussian", 1.0, power=4.0), (),
     3 * SQRT_PI / 4),
    ("laplace", lambda t: np.exp(-np.abs(t)), Decay("exponential", 1.0), (0.0,), 2.0),
    ("sech", lambda t: 1.0 / np.cosh(t), Decay("exponential", 1.0, scale=2.0), (), math.pi),
    ("sech^2", lambda t: 1.0 / np.cosh(t) ** 2, Decay("exponential", 2.0, scale=4.0), (), 2.0),
    ("cos gaussian", lambda t: np.cos(t) * np.exp(-t * t), GAUSS, (), SQRT_PI * math.exp(-0.25)),
    ("cos 3t half gaussian", lambda t: np.cos(3 * t) * np.exp(-0.5 * t * t), Decay("gaussian", 0.5), (),
     math.sqrt(2 * math.pi) * math.exp(-4.5)),
    # (t - 1)^2 >= t^2 / 2 - 1
    ("shifted gaussian", lambda t: np.exp(-(t - 1) ** 2), Decay("gaussian", 0.5, scale=math.e), (), SQRT_PI),
    ("(1+|t|) e^(-2|t|)", lambda t: (1 + np.abs(t)) * np.exp(-2 * np.abs(t)),
     Decay("exponential", 2.0, power=1.0, scale=2.0, start=1.0), (0.0,), 1.5),
]
IDS = [c[0] for c in CLOSED_FORMS]


def _run(case, policy=PrecisionPolicy()):
    _, f, decay, bps, _ = case
    return integrate_line(Integrand(f, right=decay, breakpoints=bps), policy)


def test_gaussian():
    r = integrate_line(Integrand(lambda t: np.exp(-t * t), right=GAUSS))
    assert abs(r.value - SQRT_PI) <= 1e-10
    assert 0 <= r.est_error <= 1e-10
    assert r.nodes_used > 0 and r.truncation_point > 0


def test_even_flag_matches_full_line():
    f = lambda t: np.exp(-t * t)  # noqa: E731
    full = integrate_line(Integrand(f, right=GAUSS))
    half = integrate_line(Integrand(f, right=GAUSS, even=True))
    assert abs(full.value - half.value) <= 1e-12
    assert half.nodes_used < full.nodes_used


def test_odd_integrand_vanishes():
    r = integrate_line(Integrand(lambda t: t * np.exp(-t * t), right=Decay("gaussian", 1.0, power=1.0)))
    assert abs(r.value) <= 1e-10
    assert r.est_error <= 1e-10


def test_Xi_integral(table):
    # int_R Xi = 2 pi c_{0,1} = 2 pi Theta(1)
    r = integrate_line(Integrand(Xi_values, right=table.envelope(1), even=True))
    assert abs(r.value - 2 * math.pi * theta(1.0)) <= 1e-9


def test_halfline_x_gaussian():
    right = Decay("superexp", rate=1.0, power=2.0, base=2.0)
    r = integrate_halfline(lambda x: x * np.exp(-x * x), alpha=1.0, right=right)
    assert abs(r.value - 0.5) <= 1e-10


def test_halfline_theta_over_x():
    # the normalization of Theta as a density in x^-1 dx: 2 xi(0) / 2 = 1/2
    right, left = theta_decay(0.0)
    r = integrate_halfline(lambda x: theta_array(x) / x, alpha=10.0, right=right, left=left)
    assert abs(r.value - 0.5) <= 1e-9


def test_halfline_theta():
    right, left = theta_decay(1.0)
    r = integrate_halfline(theta_array, alpha=10.0, right=right, left=left)
    assert abs(r.value - eval_xi(1).real) <= 1e-9
    right, left = theta_decay(2.0)
    r = integrate_halfline(lambda x: x * theta_array(x), alpha=10.0, right=right, left=left)
    assert abs(r.value - eval_xi(2).real) <= 1e-9
    assert abs(r.value - math.pi / 6) <= 1e-9


@pytest.mark.parametrize("alpha", [-1.0, -2.5])
def test_halfline_rejects_nonintegrable_alpha(alpha):
    with pytest.raises(DomainError):
        integrate_halfline(lambda x: x, alpha=alpha, right=GAUSS)


def test_deterministic():
    for case in CLOSED_FORMS:
        a, b = _run(case), _run(case)
        assert a == b


@pytest.mark.parametrize("case", CLOSED_FORMS, ids=IDS)
def test_error_honesty(case):
    r = _run(case)
    assert abs(r.value - case[4]) <= 3 * r.est_error
    assert r.est_error <= 1e-10


@pytest.mark.parametrize("case", CLOSED_FORMS, ids=IDS)
def test_refinement_monotone(case):
    # errors below two ulps of the exact value are not resolvable in double precision
    floor = 2 * np.spacing(abs(case[4]))
    worse = []
    for tol in (10.0 ** -e for e in range(4, 13)):
        coarse = abs(_run(case, PrecisionPolicy(abs_tol=tol)).value - case[4])
        fine = abs(_run(case, PrecisionPolicy(abs_tol=tol / 2)).value - case[4])
        if fine > max(coarse, floor):
            worse.append((tol, coarse, fine))
    assert worse == []


def test_budget_exceeded():
    wiggly = Integrand(lambda t: np.cos(40 * t) * np.exp(-t * t), right=GAUSS)
    with pytest.raises(QuadratureBudgetExceeded):
        integrate_line(wiggly, PrecisionPolicy(max_nodes=64))


def test_tail_not_certified():
    # e^{-|t|} is declared Gaussian: beyond the cut it exceeds the bound by far more than 10x
    lying = Integrand(lambda t: np.exp(-np.abs(t)), right=GAUSS, breakpoints=(0.0,))
    with pytest.raises(TailNotCertified):
        integrate_line(lying)


def test_truncation_point_tail_mass():
    for d in (GAUSS, Decay("exponential", math.pi / 4, power=1.5, scale=3.0, start=5.0),
              Decay("superexp", rate=math.pi, power=4.0, scale=40.0)):
        T = d.truncation_point(1e-11)
        assert d.tail(T) < 1e-11
        assert d.tail(T - 0.05 * max(1.0, T)) >= 1e-11 or T == d.start


def test_decay_rejects_bad_rate():
    with pytest.raises(ValueError):
        Decay("exponential", rate=0.0)
    with pytest.raises(ValueError):
        Decay("cubic", rate=1.0)


def test_trapezoid_even_gaussian():
    h = 0.1
    vals = np.exp(-(h * np.arange(101)) ** 2)
    value, err = trapezoid_even(vals, h)
    assert abs(value - SQRT_PI / 2) <= 1e-15
    assert err >= 0


def test_policy_validation():
    with pytest.raises(ValueError):
        PrecisionPolicy(abs_tol=1e-17)
    with pytest.raises(ValueError):
        PrecisionPolicy(max_nodes=10)
    with pytest.raises(ValueError):
        PrecisionPolicy(tail_ratio=1.0)
