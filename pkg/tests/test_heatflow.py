import json
import math

import numpy as np
import pytest

from xisb.errors import DomainError, GridTooShort
from xisb.heatflow import (HEAT_PROBES, HeatKernelProfile, ZeroRecord, heat_equation_residual,
                           heat_trace_csv, scan_zeros, strip_probe, verify_heatpde, winding_number,
                           xi_heat, xi_heat_dt)
from xisb.xi_core import eval_xi

TOL = 1e-10
ZEROS_K1 = (14.1347251417346938, 21.0220396387715550, 25.0108575801456888)


def test_profile_invariants(profile1, profile2):
    for prof in (profile1, profile2):
        assert len(prof.u_grid) == 2001
        assert prof.U == pytest.approx(3.5)
        assert prof.evenness_residual() <= 10 * TOL
        assert prof.edge_value() < 1e-14


def test_profile_rejects_even_length():
    with pytest.raises(ValueError):
        HeatKernelProfile(1, np.linspace(-1, 1, 4), np.ones(4), TOL)


def test_value_at_origin(profile1):
    assert abs(xi_heat(0.0, 1, 0.0, profile1) - 4 * eval_xi(0.5).real) <= 20 * TOL
    assert 4 * eval_xi(0.5).real == pytest.approx(1.988483, abs=1e-6)


@pytest.mark.parametrize("t", [0.0, 5.0, 10.0, 14.0, 20.0])
@pytest.mark.parametrize("k", [1, 2])
def test_lambda_zero_consistency(t, k, profile1, profile2):
    prof = {1: profile1, 2: profile2}[k]
    direct = 2 ** (k + 1) * eval_xi(complex(0.5, t)).real ** k
    assert abs(xi_heat(0.0, k, t, prof) - direct) <= 20 * TOL


@pytest.mark.parametrize("lam", [0.0, 0.1, 0.25, 1.0])
def test_even_in_t(lam, profile1):
    ts = np.linspace(0.0, 30.0, 13)
    assert np.array_equal(xi_heat(lam, 1, ts, profile1), xi_heat(lam, 1, -ts, profile1))


def test_first_sign_change(profile1):
    assert xi_heat(0.0, 1, 14.0, profile1) * xi_heat(0.0, 1, 15.0, profile1) < 0


def test_derivative_matches_difference(profile1):
    h = 1e-5
    for t in (3.0, 14.0):
        fd = (xi_heat(0.1, 1, t + h, profile1) - xi_heat(0.1, 1, t - h, profile1)) / (2 * h)
        assert abs(xi_heat_dt(0.1, t, profile1) - fd) <= 1e-7


def test_scan_k1(profile1):
    rec = scan_zeros(0.0, 1, 26.0, 0.25, profile1)
    assert rec.kinds == ("sign",) * 3
    assert all(abs(a - b) <= 1e-6 for a, b in zip(rec.zeros, ZEROS_K1))
    assert rec.bracket_width <= 1e-8


def test_scan_k2_double_zeros(profile2):
    # Xi^2 touches zero without changing sign; the first three are resolvable
    rec = scan_zeros(0.0, 2, 26.0, 0.25, profile2)
    assert rec.kinds[:3] == ("tangent",) * 3
    assert abs(rec.zeros[0] - ZEROS_K1[0]) <= 1e-6
    assert abs(rec.zeros[1] - ZEROS_K1[1]) <= 1e-6
    assert rec.noise_floor > 0


def test_scan_quarter_lambda_simple(profile1):
    rec = scan_zeros(0.25, 1, 30.0, 0.25, profile1)
    assert len(rec.zeros) >= 3
    assert set(rec.kinds) == {"sign"}
    fine = scan_zeros(0.25, 1, 30.0, 0.05, profile1)
    assert len(fine.zeros) == len(rec.zeros)


def test_zero_count_non_decreasing(profile1):
    counts = [len(scan_zeros(lam, 1, 30.0, 0.25, profile1).zeros) for lam in (0.0, 0.05, 0.125, 0.25)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_scan_domain(profile1):
    with pytest.raises(DomainError):
        scan_zeros(0.0, 1, 30.0, 0.5, profile1)
    with pytest.raises(DomainError):
        scan_zeros(0.0, 2, 30.0, 0.25, profile1)


def test_zero_record_json(profile1):
    rec = scan_zeros(0.0, 1, 16.0, 0.25, profile1)
    data = json.loads(rec.to_json())
    assert data["lambda"] == 0.0 and data["k"] == 1
    assert data["zeros"] == list(rec.zeros)
    assert set(data) >= {"bracket_width", "kinds", "t_scan", "step", "noise_floor"}
    with pytest.raises(ValueError):
        ZeroRecord(0.0, 1, (2.0, 1.0), 1e-8)


@pytest.mark.parametrize("lam,t", HEAT_PROBES)
def test_analytic_heat_residual(lam, t, profile1):
    r = heat_equation_residual(lam, 1, t, profile1)
    assert r.analytic <= 20 * TOL
    assert math.isfinite(r.fd)


def test_fd_convergence_order(profile1):
    r = heat_equation_residual(0.1, 1, 5.0, profile1, dl=1e-2, dt=1e-2)
    assert 1.8 <= r.order <= 2.2
    assert r.fd_half < r.fd


def test_fd_steps_domain(profile1):
    with pytest.raises(DomainError):
        heat_equation_residual(0.0, 1, 0.0, profile1, dl=1e-1)


def test_verify_heatpde(profile1):
    assert verify_heatpde(profile1, HEAT_PROBES).overall_pass


def test_conjugate_symmetry(profile1):
    for t in (14.0 + 0.3j, 5.0 - 0.5j, 20.0 + 0.1j):
        a, b = strip_probe(0.0, 1, t, profile1), strip_probe(0.0, 1, t.conjugate(), profile1)
        assert abs(a - b.conjugate()) <= 1e-10


def test_strip_probe_real_axis(profile1):
    assert abs(strip_probe(0.1, 1, 5.0, profile1) - xi_heat(0.1, 1, 5.0, profile1)) <= 1e-15
    with pytest.raises(DomainError):
        strip_probe(0.0, 1, 5.0 + 0.7j, profile1)


def test_windings(profile1):
    assert winding_number(0.0, 1, (13.0, 15.0), (-0.1, 0.1), profile1) == 1
    assert winding_number(0.0, 1, (13.0, 15.0), (0.1, 0.5), profile1) == 0
    assert winding_number(0.0, 1, (20.0, 26.0), (-0.2, 0.2), profile1) == 2
    assert winding_number(0.25, 1, (13.0, 15.0), (0.1, 0.5), profile1) == 0


def test_grid_too_short(table):
    short = HeatKernelProfile.build(1, table, U=0.8, points=161)
    with pytest.raises(GridTooShort):
        xi_heat(0.0, 1, 1.0, short)
    with pytest.raises(DomainError):
        xi_heat(1.5, 1, 1.0, short)


def test_profile_k_mismatch(profile1):
    with pytest.raises(DomainError):
        xi_heat(0.0, 2, 1.0, profile1)


def test_heat_trace_csv(profile1):
    ts = np.arange(0.0, 1.01, 0.25)
    lines = heat_trace_csv(0.0, ts, profile1).splitlines()
    assert lines[0] == "t,xi_heat"
    assert len(lines) == 6
    assert [float(r.split(",")[1]) for r in lines[1:]] == list(xi_heat(0.0, 1, ts, profile1))
