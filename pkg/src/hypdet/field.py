"""Exact arithmetic in Q(sqrt 2)."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

SQRT2 = math.sqrt(2.0)


@total_ordering
class QSqrt2:
    """The number p + q*sqrt(2) with rational p, q."""

    __slots__ = ("p", "q")

    def __init__(self, p=0, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    @classmethod
    def coerce(cls, x) -> QSqrt2:
        return x if isinstance(x, QSqrt2) else cls(x)

    def __add__(self, other):
        o = QSqrt2.coerce(other)
        return QSqrt2(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.p, -self.q)

    def __sub__(self, other):
        return self + (-QSqrt2.coerce(other))

    def __rsub__(self, other):
        return QSqrt2.coerce(other) - self

    def __mul__(self, other):
        o = QSqrt2.coerce(other)
        return QSqrt2(self.p * o.p + 2 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def conjugate(self) -> QSqrt2:
        return QSqrt2(self.p, -self.q)

    def norm(self) -> Fraction:
        return self.p * self.p - 2 * self.q * self.q

    def __truediv__(self, other):
        o = QSqrt2.coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        num = self * o.conjugate()
        return QSqrt2(num.p / n, num.q / n)

    def sign(self) -> int:
        # sign of p + q sqrt2 decided exactly
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sp == sq or sq == 0:
            return sp
        if sp == 0:
            return sq
        return sp if self.p * self.p > 2 * self.q * self.q else sq

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QSqrt2(other)
        if not isinstance(other, QSqrt2):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __lt__(self, other):
        return (self - QSqrt2.coerce(other)).sign() < 0

    def __hash__(self):
        return hash((self.p, self.q))

    def __float__(self):
        return float(self.p) + float(self.q) * SQRT2

    def __repr__(self):
        return f"QSqrt2({self.p}, {self.q})"

    def __str__(self):
        return f"{self.p}+{self.q}*sqrt2"


def chebyshev_traces(t, k_max: int) -> list:
    """Traces of gamma^k for k = 0..k_max of a determinant-one element with trace t."""
    out = [t * 0 + 2, t]
    while len(out) <= k_max:
        out.append(t * out[-1] - out[-2])
    return out[: k_max + 1]
