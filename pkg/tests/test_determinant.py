import dataclasses
import math
import warnings

import mpmath
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from hypdet.constants import constant_E, euler_gamma
from hypdet.determinant import (
    BUDGET_KEYS,
    DetParams,
    DetResult,
    IncompleteSpectrumError,
    log_det,
    log_selberg_derivative_at_1,
    normalized_log_det,
    small_t_integral,
    small_t_profile,
)
from hypdet.errors import DomainError
from hypdet.spectrum import LengthSpectrum

from test_spectrum import synthetic

V = 4 * math.pi


@pytest.fixture(scope="module")
def det8(bolza8):
    return log_det(bolza8, V, DetParams(L=8, R=40, eta=1.0))


@pytest.mark.parametrize("u", [0.3, 1.0, 3.0, 7.5, 15.0])
def test_small_t_profile_against_quadrature(u):
    f = lambda t: t**-1.5 * math.exp(-u * u / (4 * t) - t / 4)
    q, _ = integrate.quad(f, 0, 1, epsabs=1e-300, epsrel=1e-12, points=[min(u * u / 6, 1.0)])
    assert small_t_profile(u) == pytest.approx(q, rel=1e-9)


def test_small_t_profile_domain():
    with pytest.raises(DomainError):
        small_t_profile(0.0)


def test_small_t_integral_against_mpmath():
    s = synthetic([2.0, 3.1], cutoff=7.0)
    mpmath.mp.dps = 25

    def S(t):
        tot = 0
        for ell in (2.0, 3.1):
            for k in range(1, int(7.0 // ell) + 1):
                u = k * ell
                tot += 2 * ell / (2 * mpmath.sinh(u / 2)) * mpmath.exp(-u * u / (4 * t))
        return tot * mpmath.exp(-t / 4) / mpmath.sqrt(4 * mpmath.pi * t)

    expected = float(mpmath.quad(lambda t: S(t) / t, [0, 0.25, 1]))
    assert small_t_integral(s, 7.0) == pytest.approx(expected, rel=1e-10)


def test_params_validation():
    with pytest.raises(DomainError):
        DetParams(eta=0)
    with pytest.raises(DomainError):
        DetParams(L=1.0)
    with pytest.raises(DomainError):
        DetParams(R=0.5)
    assert DetParams(eta=0.2).resolved(LengthSpectrum((), 8.0, V)).R == 50.0


def test_requires_complete_spectrum(bolza8):
    with pytest.raises(IncompleteSpectrumError):
        log_det(bolza8, V, DetParams(L=9.0))
    with pytest.raises(DomainError):
        log_det(bolza8, -1.0)


def test_empty_spectrum_raw_value():
    s = LengthSpectrum((), 10.0, V, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        r = log_det(s, V, DetParams(R=40.0, eta=1.0))
    assert "no-geodesic-data" in r.warnings
    assert r.raw_value == pytest.approx(V * constant_E() + euler_gamma() + math.log(40.0), abs=1e-12)
    assert r.error > 0


def test_bolza_result(det8):
    assert set(det8.budget) == set(BUDGET_KEYS)
    assert det8.error == pytest.approx(sum(det8.budget.values()))
    assert det8.error < 0.5
    assert not det8.warnings
    lo, hi = det8.interval
    assert lo < det8.value < hi


def test_resolution_consistency(det8, bolza10):
    r10 = log_det(bolza10, V, DetParams(L=10, R=40, eta=1.0))
    r60 = log_det(bolza10, V, DetParams(L=10, R=60, eta=1.0))
    assert r10.error < 0.5
    for a, b in ((det8, r10), (r10, r60)):
        (a0, a1), (b0, b1) = a.interval, b.interval
        assert max(a0, b0) <= min(a1, b1)


def test_t_tail_decreases_with_R(bolza8):
    a = log_det(bolza8, V, DetParams(L=8, R=40, eta=1.0))
    b = log_det(bolza8, V, DetParams(L=8, R=80, eta=1.0))
    assert b.budget["t_tail"] < a.budget["t_tail"]


def test_inconsistent_eta_warns(bolza8):
    with pytest.warns(RuntimeWarning):
        r = log_det(bolza8, V, DetParams(L=8, R=40, eta=5.0))
    assert any("eta" in w for w in r.warnings)


def test_selberg_and_normalization(det8):
    d = log_selberg_derivative_at_1(det8, V)
    assert d == pytest.approx(det8.value - V * constant_E())
    assert math.isfinite(d)
    assert log_selberg_derivative_at_1(det8, V + 1.0) == pytest.approx(d - constant_E())
    assert normalized_log_det(det8, 1.0) == (det8.value, det8.error)
    v1, e1 = normalized_log_det(det8, V)
    v2, e2 = normalized_log_det(det8, 2 * V)
    assert (v2, e2) == pytest.approx((v1 / 2, e1 / 2))
    with pytest.raises(DomainError):
        normalized_log_det(det8, 0.0)


@given(st.floats(-10, 10), st.floats(0, 3), st.floats(0.1, 100))
def test_normalization_scaling(value, error, vol):
    r = DetResult(value, error, {}, value, DetParams())
    v, e = normalized_log_det(r, vol)
    assert v * vol == pytest.approx(value, abs=1e-12)
    assert e * vol == pytest.approx(error, abs=1e-12)


def test_json_shape(det8):
    j = det8.to_json()
    assert set(j) == {"value", "error", "budget", "raw_value", "params", "warnings"}
    assert j["params"]["eta"] == 1.0


def test_disjoint_union_additivity(bolza8):
    # the raw truncated formula is additive up to one copy of gamma + log R
    R = 40.0
    a = log_det(bolza8, V, DetParams(L=8, R=R, eta=1.0))
    double = LengthSpectrum(
        tuple(dataclasses.replace(c, oriented_multiplicity=2 * c.oriented_multiplicity) for c in bolza8.classes),
        8.0, 2 * V, 3,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        b = log_det(double, 2 * V, DetParams(L=8, R=R, eta=1.0))
    assert b.raw_value == pytest.approx(2 * a.raw_value - euler_gamma() - math.log(R), abs=1e-9)


@pytest.mark.slow
def test_refining_the_resolution_keeps_the_interval(bolza, bolza10):
    from hypdet.fuchsian import enumerate_primitives

    coarse = log_det(bolza10, V, DetParams(L=10.0, R=40.0, eta=1.0))
    fine = log_det(enumerate_primitives(bolza, 12.0), V, DetParams(L=12.0, R=60.0, eta=1.0))
    assert coarse.error < 0.5 and fine.error < coarse.error
    assert max(coarse.interval[0], fine.interval[0]) <= min(coarse.interval[1], fine.interval[1])
