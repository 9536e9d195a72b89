import math

import numpy as np
import pytest

from xisb import xi_core
from xisb.errors import DomainError, NumericalInstability, PoleError
from xisb.xi_core import Xi_values, eval_gamma, eval_xi, eval_Xi, eval_zeta, fit_decay, loggamma

# reference values from a 30-digit mpmath session
GAMMA_REF = {
    0.25: 3.62560990822190831,
    3.7 - 12.5j: 3.330595360022289e-06 + 2.4687385510013356e-05j,
    -2.3 + 4.1j: -5.722863722395643e-05 + 2.8183685498184127e-05j,
    0.5 + 50j: 9.033204352600619e-35 + 1.7263622522690939e-34j,
    10 + 90j: -3.3652616591812994e-43 + 1.6748543999943504e-43j,
}
ZETA_REF = {
    0.5: -1.46035450880958681,
    0.5 + 14j: 0.02224114260999359 - 0.10325812326645006j,
    -1.5 + 3j: 0.20132883054215034 + 0.09714974301562004j,
    3 + 95j: 0.8590628320660222 + 0.0007742956992812839j,
    0.25 - 30j: -0.5864827888392179 + 0.6111496310764428j,
}
XI_REF = {
    0.5: 0.497120778188314110,
    0.3 + 1j: 0.48618791307640963 - 0.004500440307116582j,
    2.5 - 7j: 0.13137944152145006 - 0.1111101355518987j,
    -1 + 20j: 2.431886390849448e-05 + 7.013869991114922e-05j,
}


@pytest.mark.parametrize("s,ref", GAMMA_REF.items())
def test_gamma_reference(s, ref):
    assert abs(eval_gamma(s) - ref) <= 1e-13 * abs(ref)


@pytest.mark.parametrize("s,ref", ZETA_REF.items())
def test_zeta_reference(s, ref):
    assert abs(eval_zeta(s) - ref) <= 1e-12 * max(abs(ref), 1.0)


@pytest.mark.parametrize("s,ref", XI_REF.items())
def test_xi_reference(s, ref):
    assert abs(eval_xi(s) - ref) <= 1e-12 * max(abs(ref), 1e-3)


def test_gamma_integer_and_half_integer():
    for n in range(1, 15):
        assert abs(eval_gamma(n) - math.factorial(n - 1)) <= 1e-13 * math.factorial(n - 1)
    assert abs(eval_gamma(0.5) - math.sqrt(math.pi)) <= 1e-14
    assert abs(eval_gamma(-0.5) + 2 * math.sqrt(math.pi)) <= 1e-13


def test_loggamma_exponentiates_to_gamma():
    for s in (0.3 + 2j, -3.7 + 0.2j, 12 - 5j):
        assert abs(np.exp(loggamma(s)) - eval_gamma(s)) <= 1e-13 * abs(eval_gamma(s))


def test_zeta_known_values():
    assert abs(eval_zeta(2) - math.pi ** 2 / 6) <= 1e-14
    assert abs(eval_zeta(0) + 0.5) <= 1e-14
    assert abs(eval_zeta(-1) + 1 / 12) <= 1e-14
    assert abs(eval_zeta(-2)) <= 1e-14


@pytest.mark.parametrize("s", [0, -1, -2, -7])
def test_gamma_poles(s):
    with pytest.raises(PoleError):
        eval_gamma(s)


def test_zeta_pole():
    with pytest.raises(PoleError):
        eval_zeta(1)
    with pytest.raises(PoleError):
        eval_zeta(1 + 1e-13j)


def test_pole_error_is_domain_error():
    assert issubclass(PoleError, DomainError)


def test_non_finite_argument():
    with pytest.raises(DomainError):
        eval_xi(complex(math.nan, 0))
    with pytest.raises(DomainError):
        eval_Xi(math.inf)


def test_xi_removable_points():
    # xi is entire: no pole at 0 or 1, smooth across the series switch
    for eps in (1e-6, -1e-6, 1e-6j):
        assert abs(eval_xi(eps) - 0.5) <= 1e-5
        assert abs(eval_xi(1 - eps) - 0.5) <= 1e-5
    assert abs(eval_xi(1.0) - 0.5) <= 1e-12
    inside, outside = eval_xi(1 + 0.99e-4), eval_xi(1 + 1.01e-4)
    assert abs(inside - outside) <= 1e-5


def test_Xi_even_and_real():
    ts = np.linspace(0, 50, 101)
    pos, neg = Xi_values(ts), Xi_values(-ts)
    assert np.max(np.abs(pos - neg)) <= 1e-12
    for t in ts[::10]:
        assert abs(eval_xi(complex(0.5, t)).imag) <= 1e-12


def test_Xi_sign_change_at_first_zero():
    assert eval_Xi(14.0) > 0 > eval_Xi(14.3)


def test_Xi_imaginary_guard(monkeypatch):
    monkeypatch.setattr(xi_core, "_xi_right", lambda s: complex(0.3, 1e-6))
    with pytest.raises(NumericalInstability):
        eval_Xi(3.0)


def test_decay_fit_dominates():
    ts = np.arange(0, 60.0001, 0.05)
    vals = Xi_values(ts)
    C, A = fit_decay(ts, vals)
    far = ts >= 5
    bound = C * ts[far] ** A * np.exp(-math.pi * ts[far] / 4)
    assert np.all(np.abs(vals[far]) <= bound)
    assert 0 < A < 3
