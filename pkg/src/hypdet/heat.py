"""Ingredients of the heat trace formula.

For a closed hyperbolic surface of area V,

    sum_j exp(-lambda_j t) = V I(t) / (4 pi) + S(t),

where ``I`` is the identity contribution and ``S`` the sum over closed
geodesics.  ``S`` splits at a length cutoff ``L`` into the enumerated part
``S^{L,-}`` and a remainder ``S^{L,+}`` that is bounded through an explicit
counting bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .spectrum import L0, LengthSpectrum, buser_constant, count_with_iterates, max_iterate

SQRT_4PI = math.sqrt(4.0 * math.pi)


class QuadratureError(DomainError):
    pass


@dataclass(frozen=True)
class HeatEvalConfig:
    quad_abs_tol: float = 1e-13
    max_k_iterates: int = 10_000

    def __post_init__(self) -> None:
        if not self.quad_abs_tol > 0:
            raise DomainError("quad_abs_tol must be positive")
        if self.max_k_iterates < 1:
            raise DomainError("max_k_iterates must be >= 1")


DEFAULT_CONFIG = HeatEvalConfig()


def _quad(f, a, b, tol, **kw):
    val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-13, limit=400, **kw)
    if not math.isfinite(val) or err > max(100 * tol, 1e-9 * abs(val)):
        raise QuadratureError(f"quadrature did not converge (estimate {err:g})")
    return val


def _check_t(t: float) -> None:
    if not t > 0:
        raise DomainError("t must be positive")


@lru_cache(maxsize=4096)
def identity_term(t: float, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    """I(t) = int_R x tanh(pi x) exp(-(x^2 + 1/4) t) dx.

    Written as exp(-t/4) [1/t - 4 int_0^inf x exp(-x^2 t) / (exp(2 pi x) + 1) dx]
    so that only a smooth, rapidly decaying integrand is left to quadrature.
    """
    _check_t(t)
    def f(x):
        e = math.exp(-2.0 * math.pi * x)
        return x * math.exp(-x * x * t) * e / (1.0 + e)

    corr = _quad(f, 0.0, math.inf, config.quad_abs_tol)
    return math.exp(-t / 4.0) * (1.0 / t - 4.0 * corr)


def identity_term_r(t: float, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    """The same quantity from exp(-t/4)/(sqrt(4 pi) t^{3/2}) int_0^inf r exp(-r^2/4t)/sinh(r/2) dr."""
    _check_t(t)

    def f(r):
        if r == 0.0:
            return 2.0
        return r * math.exp(-r * r / (4.0 * t)) / math.sinh(r / 2.0)

    # negligible past twelve Gaussian widths or once e^{-r/2} has decayed
    top = min(12.0 * math.sqrt(t), 90.0) + 1.0
    val = _quad(f, 0.0, top, config.quad_abs_tol * t**1.5)
    return math.exp(-t / 4.0) / (SQRT_4PI * t**1.5) * val


def smooth_term(volume: float, t: float, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    return volume * identity_term(t, config) / (4.0 * math.pi)


def _pairs(s: LengthSpectrum, L: float):
    """(u = m l, oriented weight * l) for every pair with m l <= L, in a fixed order."""
    out_u, out_c = [], []
    for c in s.classes:
        if c.length > L * (1 + 1e-12):
            break
        for m in range(1, max_iterate(c.length, L) + 1):
            out_u.append(m * c.length)
            out_c.append(c.oriented_multiplicity * c.length)
    return np.array(out_u), np.array(out_c)


def geodesic_term(s: LengthSpectrum, t: float, L: float | None = None) -> float:
    """S^{L,-}(t), summed over oriented classes and all iterates m l <= L."""
    _check_t(t)
    L = s.cutoff_L if L is None else L
    s.require(L)
    u, c = _pairs(s, L)
    if not len(u):
        return 0.0
    terms = c / (2.0 * np.sinh(u / 2.0)) * np.exp(-u * u / (4.0 * t))
    return math.exp(-t / 4.0) / math.sqrt(4.0 * math.pi * t) * math.fsum(terms)


# ----------------------------------------------------------------------------
# tail of the geodesic sum
# ----------------------------------------------------------------------------


def _gauss_moment(a: float, beta: float, c: float) -> float:
    """int_a^inf u exp(beta u - c u^2) du, in closed form (c > 0)."""
    mu = beta / (2.0 * c)
    z = math.sqrt(c) * (a - mu)
    half = 0.5 * math.sqrt(math.pi / c) * mu
    if z >= 0:
        # exp(beta a - c a^2) [1/(2c) + mu sqrt(pi/c)/2 erfcx(z)]
        return math.exp(beta * a - c * a * a) * (0.5 / c + half * float(special.erfcx(z)))
    return math.exp(beta * a - c * a * a) * 0.5 / c + half * math.exp(beta * mu - c * mu * mu) * float(special.erfc(z))


def _tail_profile(u: float, t: float) -> float:
    return u * math.exp(-u * u / (4.0 * t)) / (2.0 * math.sinh(u / 2.0))


def counting_tail(genus: int, s: LengthSpectrum, t: float, a: float) -> float:
    """Upper bound for sum over pairs with m l > a of l exp(-(ml)^2/4t) / (2 sinh(ml/2)).

    Summation by parts against the counting bound B(u) = (g-1) e^{u+6} + b u
    (valid because the profile is decreasing):

        f(a) (B(a) - N(a)) + int_a^inf B'(u) f(u) du,

    with 1/(2 sinh(u/2)) <= e^{-u/2} / (1 - e^{-a}) on [a, inf) so the
    integral is a Gaussian moment in closed form.
    """
    s.require(a)
    b = buser_constant(s)
    big = (genus - 1) * math.exp(a + 6.0) + b * a
    head = _tail_profile(a, t) * max(big - count_with_iterates(s, a), 0.0)
    c = 1.0 / (4.0 * t)
    k = 1.0 / (1.0 - math.exp(-a))
    integral = k * ((genus - 1) * math.exp(6.0) * _gauss_moment(a, 0.5, c) + b * _gauss_moment(a, -0.5, c))
    return head + integral


def geodesic_tail_bound(genus: int, s: LengthSpectrum, t: float, L: float | None = None) -> float:
    """Certified upper bound for S^{L,+}(t).

    Pairs with L < m l <= cutoff are summed exactly from the spectrum; beyond
    the cutoff the counting bound takes over.
    """
    _check_t(t)
    if genus < 2:
        raise DomainError("genus must be >= 2")
    L = s.cutoff_L if L is None else L
    if L < L0:
        raise DomainError(f"L must be >= {L0:.6f}")
    s.require(L)
    pref = math.exp(-t / 4.0) / math.sqrt(4.0 * math.pi * t)
    exact = 0.0
    if s.cutoff_L > L:
        u, cw = _pairs(s, s.cutoff_L)
        keep = u > L * (1 + 1e-12)
        if keep.any():
            uu = u[keep]
            exact = math.fsum(cw[keep] / (2.0 * np.sinh(uu / 2.0)) * np.exp(-uu * uu / (4.0 * t)))
    return pref * (exact + counting_tail(genus, s, t, s.cutoff_L))


def heat_trace_estimate(s: LengthSpectrum, volume: float, t: float, L: float | None = None, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    """V I(t)/(4 pi) + S^{L,-}(t): a lower estimate of the heat trace."""
    return smooth_term(volume, t, config) + geodesic_term(s, t, L)


def smooth_sup_coefficient(volume: float, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    """B1 = V sup_{t>=1} e^{t/4} I(t) / (4 pi).

    e^{t/4} I(t) = (4/sqrt(4 pi t)) int_0^inf s e^{-s^2} / sinh(sqrt(t) s) ds is
    decreasing in t, so the supremum sits at t = 1.
    """
    return volume * math.exp(0.25) * identity_term(1.0, config) / (4.0 * math.pi)


def heat_trace_upper(s: LengthSpectrum, volume: float, t: float, genus: int, L: float | None = None, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    return heat_trace_estimate(s, volume, t, L, config) + geodesic_tail_bound(genus, s, t, L)


def keylemma_bound(s: LengthSpectrum, volume: float, eta: float, t: float, L: float | None, genus: int, config: HeatEvalConfig = DEFAULT_CONFIG) -> float:
    """Computable bound for |S(t) - 1| at t >= 1, given lambda_1 >= eta:

        B1 e^{-t/4} + e^{-(t-1) eta} (Trhat(1) - 1),

    with Trhat(1) the certified upper value of the heat trace at t = 1.
    """
    if t < 1:
        raise DomainError("keylemma bound needs t >= 1")
    if not eta > 0:
        raise DomainError("eta must be positive")
    b1 = smooth_sup_coefficient(volume, config)
    h1 = heat_trace_upper(s, volume, 1.0, genus, L, config)
    return b1 * math.exp(-t / 4.0) + math.exp(-(t - 1.0) * eta) * max(h1 - 1.0, 0.0)


# ----------------------------------------------------------------------------
# spectral-side structure
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    t: tuple[float, ...]
    value: tuple[float, ...]  # V I/4pi + S^{L,-} - 1
    slack: tuple[float, ...]  # the true value lies in [value, value + slack]
    positive: bool
    decreasing: bool
    log_convex: bool
    vacuous_points: int  # points where slack exceeds |value|


def heat_structure(s: LengthSpectrum, volume: float, genus: int, ts, L: float | None = None, config: HeatEvalConfig = DEFAULT_CONFIG) -> StructureReport:
    """Check that the nontrivial heat trace is positive, decreasing and log-convex.

    Each statement is tested in the weakest form the error budget allows: it
    fails only if the enclosures [value, value + slack] refute it.
    """
    ts = sorted(float(t) for t in ts)
    qtol = 10 * config.quad_abs_tol * volume
    vals, slack = [], []
    for t in ts:
        vals.append(heat_trace_estimate(s, volume, t, L, config) - 1.0)
        slack.append(geodesic_tail_bound(genus, s, t, L) + qtol)
    lo = [v - qtol for v in vals]
    hi = [v + e for v, e in zip(vals, slack)]
    positive = all(h > 0 for h in hi)
    decreasing = all(lo[i + 1] <= hi[i] for i in range(len(ts) - 1))
    log_convex = True
    for i in range(1, len(ts) - 1):
        t0, t1, t2 = ts[i - 1], ts[i], ts[i + 1]
        w = (t2 - t1) / (t2 - t0)
        # f(t1) <= f(t0)^w f(t2)^(1-w) must not be refuted
        a, b = max(hi[i - 1], 0.0), max(hi[i + 1], 0.0)
        rhs = a**w * b ** (1 - w)
        if max(lo[i], 0.0) > rhs:
            log_convex = False
    vac = sum(1 for v, e in zip(vals, slack) if e >= abs(v))
    return StructureReport(tuple(ts), tuple(vals), tuple(slack), positive, decreasing, log_convex, vac)
