import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hypdet.cover import HomSample, lift_spectrum
from hypdet.errors import DomainError
from hypdet.group import Permutation
from hypdet.heat import (
    HeatEvalConfig,
    geodesic_tail_bound,
    geodesic_term,
    heat_structure,
    heat_trace_estimate,
    identity_term,
    identity_term_r,
    keylemma_bound,
    smooth_sup_coefficient,
)
from hypdet.spectrum import LengthSpectrum

from test_spectrum import synthetic

V = 4 * math.pi


def identity_oracle(t):
    f = lambda x: x * mpmath.tanh(mpmath.pi * x) * mpmath.exp(-(x * x + 0.25) * t)
    return float(2 * mpmath.quad(f, [0, 1, 5, mpmath.inf]))


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_identity_term_forms_agree(t):
    assert abs(identity_term(t) - identity_term_r(t)) < 1e-10
    assert identity_term(t) == pytest.approx(identity_oracle(t), rel=1e-10)


def test_identity_term_small_t():
    assert abs(0.01 * identity_term(0.01) - 1) < 0.05


@given(st.floats(0.01, 50))
@settings(deadline=None)
def test_identity_term_positive(t):
    assert identity_term(t) > 0


def test_identity_term_domain():
    with pytest.raises(DomainError):
        identity_term(0.0)
    with pytest.raises(DomainError):
        HeatEvalConfig(quad_abs_tol=0)


def test_geodesic_term_single_class():
    s = synthetic([3.0], cutoff=7.0)
    expected = sum(
        2 * 3.0 / (2 * math.sinh(k * 1.5)) * math.exp(-((3.0 * k) ** 2) / 4 - 0.25) / math.sqrt(4 * math.pi)
        for k in (1, 2)
    )
    assert geodesic_term(s, 1.0, 7.0) == pytest.approx(expected, rel=1e-13)
    assert geodesic_term(s, 1.0, 7.0) == pytest.approx(0.03263, abs=1e-5)


def test_geodesic_term_empty():
    assert geodesic_term(LengthSpectrum((), 5.0, V), 1.0) == 0.0


@given(st.floats(0.2, 10), st.floats(3.0, 8.0), st.floats(3.0, 8.0))
def test_geodesic_term_monotone_in_L(bolza8, t, a, b):
    lo, hi = sorted((a, b))
    assert geodesic_term(bolza8, t, lo) <= geodesic_term(bolza8, t, hi)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_tail_bound_dominates_missing_terms(bolza8, t):
    s6 = bolza8.truncate(6.0)
    missing = geodesic_term(bolza8, t, 8.0) - geodesic_term(bolza8, t, 6.0)
    assert 0 <= missing <= geodesic_tail_bound(2, s6, t, 6.0)


def test_tail_bound_decays_with_L(bolza10):
    assert geodesic_tail_bound(2, bolza10, 1.0, 10.0) < geodesic_tail_bound(2, bolza10, 1.0, 6.0)


@given(st.floats(0.05, 20))
@settings(deadline=None, max_examples=30)
def test_tail_bound_nonnegative(bolza8, t):
    assert geodesic_tail_bound(2, bolza8, t, 8.0) >= 0


def test_smooth_sup_coefficient_is_sup(bolza8):
    b1 = smooth_sup_coefficient(V)
    for t in (1.0, 1.5, 3.0, 10.0, 40.0):
        assert V * math.exp(t / 4) * identity_term(t) / (4 * math.pi) <= b1 * (1 + 1e-12)


def test_keylemma_examples(bolza8):
    a = keylemma_bound(bolza8, V, 1.0, 2.0, 8.0, 2)
    b = keylemma_bound(bolza8, V, 1.0, 10.0, 8.0, 2)
    assert 0 < b < a
    with pytest.raises(DomainError):
        keylemma_bound(bolza8, V, 1.0, 0.5, 8.0, 2)


def test_keylemma_on_degree_three_cover(bolza8):
    c3 = Permutation.from_cycles(3, [(1, 2, 3)])
    t12 = Permutation.from_cycles(3, [(1, 2)])
    e = Permutation.identity(3)
    hom = HomSample((c3, e, t12, e), 3)
    assert hom.connected()
    cov = lift_spectrum(bolza8, hom, 8.0).spectrum
    vol = 3 * V
    t, L = 5.0, 8.0
    bound = keylemma_bound(cov, vol, 0.1, t, L, cov.genus)
    tail = geodesic_tail_bound(cov.genus, cov, t, L)
    # the true trace minus one lies in [lo, lo + tail]; that enclosure must meet [-bound, bound]
    lo = heat_trace_estimate(cov, vol, t, L) - 1
    assert lo <= bound and lo + tail >= -bound
    assert bound > abs(geodesic_term(cov, t, L) - 1) - tail


def test_heat_structure_on_bolza(bolza8):
    ts = [0.5 + 0.25 * k for k in range(39)]
    r = heat_structure(bolza8, V, 2, ts, 8.0)
    assert r.positive and r.decreasing and r.log_convex
    assert len(r.value) == len(ts)
    assert all(e >= 0 for e in r.slack)


def test_heat_structure_refutes_bad_data():
    # a fake surface with far too many short geodesics makes the trace increase somewhere
    fake = synthetic([1.8] * 400, cutoff=2.0)
    r = heat_structure(fake, V, 2, [0.1, 0.2, 0.3, 0.5, 1.0], 2.0)
    assert not (r.positive and r.decreasing and r.log_convex)
