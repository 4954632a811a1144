from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hypdet.field import SQRT2, QSqrt2, chebyshev_traces

rationals = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 100)
elements = st.builds(QSqrt2, rationals, rationals)


@given(elements, elements)
def test_ring_operations_match_floats(x, y):
    assert float(x + y) == pytest.approx(float(x) + float(y), abs=1e-9)
    assert float(x * y) == pytest.approx(float(x) * float(y), rel=1e-9, abs=1e-9)


@given(elements, elements)
def test_order_matches_floats(x, y):
    if abs(float(x) - float(y)) > 1e-9:
        assert (x < y) == (float(x) < float(y))


def test_sqrt2_squared_is_two():
    r = QSqrt2(0, 1)
    assert r * r == QSqrt2(2, 0)
    assert float(r) == SQRT2


def test_exact_values():
    x = QSqrt2(1, 1)
    assert x * x == QSqrt2(3, 2)
    assert QSqrt2(Fraction(1, 2), 0) + QSqrt2(Fraction(1, 2), 3) == QSqrt2(1, 3)


def test_chebyshev_traces():
    # t = 3 is the trace of [[2,1],[1,1]]; its powers have traces 2, 3, 7, 18
    assert chebyshev_traces(3, 3) == [2, 3, 7, 18]
    t = QSqrt2(2, 2)
    tr = chebyshev_traces(t, 2)
    assert tr[2] == t * t - 2
