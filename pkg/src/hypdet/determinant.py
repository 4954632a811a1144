"""log det of the Laplacian from a truncated length spectrum, with a certified error.

The starting point is the identity

    log det = V E + gamma - int_0^1 S(t)/t dt - int_1^inf (S(t) - 1)/t dt.

Every piece that is not computed exactly is enclosed in an interval; the
reported value is the midpoint of the resulting enclosure and ``error`` its
half-width, itemized in ``budget``:

* ``t_tail``: int_R^inf, bounded through the heat-time decay estimate.
* ``geodesic_tail_small_t``: the missing geodesics (m l > L) inside int_0^1.
* ``geodesic_tail_large_t``: width of the pointwise enclosure of S - 1 on [1, R].
* ``quadrature``: discretization of int_1^R, estimated by comparing rules.

On [1, R] two enclosures of S(t) - 1 are intersected.  The geometric one is
[S^{L,-} - 1, S^{L,-} - 1 + tail(t)].  The spectral one writes
S - 1 = -V I(t)/4pi + Theta(t) with Theta = sum_{j>=1} e^{-lambda_j t}, which is
nonnegative and obeys Theta(t) <= e^{-(t - t0) eta} Theta(t0) whenever
lambda_1 >= eta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .constants import PrecisionPolicy, constant_E, euler_gamma
from .errors import DomainError
from .heat import (
    DEFAULT_CONFIG,
    HeatEvalConfig,
    _pairs,
    geodesic_tail_bound,
    heat_trace_upper,
    identity_term,
    smooth_sup_coefficient,
)
from .spectrum import L0, LengthSpectrum, buser_constant, count_with_iterates

BUDGET_KEYS = ("t_tail", "geodesic_tail_small_t", "geodesic_tail_large_t", "quadrature")
_CONSTANT_POLICY = PrecisionPolicy(1e-10)


class IncompleteSpectrumError(DomainError):
    pass


@dataclass(frozen=True)
class DetParams:
    L: float | None = None  # defaults to the spectrum cutoff
    R: float | None = None  # defaults to max(40, 10/eta)
    eta: float = 1.0
    quad_abs_tol: float = 1e-10
    panels: int = 64

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise DomainError("eta must be positive")
        if self.L is not None and self.L < L0:
            raise DomainError(f"L must be >= 2 asinh(1) = {L0:.6f}")
        if self.R is not None and not self.R > 1:
            raise DomainError("R must exceed 1")
        if not self.quad_abs_tol > 0:
            raise DomainError("quad_abs_tol must be positive")
        if self.panels < 4:
            raise DomainError("panels must be >= 4")

    def resolved(self, s: LengthSpectrum) -> DetParams:
        L = s.cutoff_L if self.L is None else self.L
        R = max(40.0, 10.0 / self.eta) if self.R is None else self.R
        return DetParams(L, R, self.eta, self.quad_abs_tol, self.panels)


@dataclass(frozen=True)
class DetResult:
    value: float
    error: float
    budget: dict
    raw_value: float  # the plain truncated formula, no enclosure
    params: DetParams
    warnings: tuple[str, ...] = field(default=())

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.error, self.value + self.error

    def to_json(self) -> dict:
        p = self.params
        return {
            "value": self.value,
            "error": self.error,
            "budget": dict(self.budget),
            "raw_value": self.raw_value,
            "params": {"L": p.L, "R": p.R, "eta": p.eta, "quad_abs_tol": p.quad_abs_tol},
            "warnings": list(self.warnings),
        }


def small_t_profile(u: float) -> float:
    """K(u) = int_0^1 t^{-3/2} exp(-u^2/4t - t/4) dt in closed form.

    With a = u^2/4, b = 1/4 the integral equals
    sqrt(pi)/(2 sqrt a) e^{-a-b} [erfcx(sqrt a - sqrt b) + erfcx(sqrt a + sqrt b)].
    """
    if not u > 0:
        raise DomainError("u must be positive")
    ra, rb = u / 2.0, 0.5
    a, b = ra * ra, rb * rb
    return math.sqrt(math.pi) / (2.0 * ra) * math.exp(-a - b) * (
        float(special.erfcx(ra - rb)) + float(special.erfcx(ra + rb))
    )


def small_t_integral(s: LengthSpectrum, L: float) -> float:
    """int_0^1 S^{L,-}(t)/t dt, exact term by term."""
    u, c = _pairs(s, L)
    if not len(u):
        return 0.0
    k = np.array([small_t_profile(x) for x in u])
    return math.fsum(c / (2.0 * np.sinh(u / 2.0)) * k) / math.sqrt(4.0 * math.pi)


def small_t_tail(genus: int, s: LengthSpectrum, L: float) -> float:
    """Upper bound for int_0^1 S^{L,+}(t)/t dt.

    Exact terms between L and the spectrum cutoff, then summation by parts of
    the decreasing profile u K(u)/(2 sinh(u/2)) against the counting bound.
    """
    a = s.cutoff_L
    u, c = _pairs(s, a)
    exact = 0.0
    keep = u > L * (1 + 1e-12)
    if keep.any():
        uu = u[keep]
        exact = math.fsum(c[keep] / (2.0 * np.sinh(uu / 2.0)) * np.array([small_t_profile(x) for x in uu]))

    def f0(x):
        return x * small_t_profile(x) / (2.0 * math.sinh(x / 2.0))

    b = buser_constant(s)
    head = f0(a) * max((genus - 1) * math.exp(a + 6.0) + b * a - count_with_iterates(s, a), 0.0)
    # past a + 80 the integrand is below e^{-1500}
    val, err = integrate.quad(lambda x: ((genus - 1) * math.exp(x + 6.0) + b) * f0(x), a, a + 80.0, epsabs=1e-14, epsrel=1e-10, limit=400)
    return (exact + head + val + abs(err)) / math.sqrt(4.0 * math.pi)


def _gl_nodes(R: float, panels: int, order: int = 8):
    """Composite Gauss-Legendre nodes/weights on [1, R], panels uniform in log t."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.exp(np.linspace(0.0, math.log(R), panels + 1))
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _geodesic_sum(u: np.ndarray, c: np.ndarray, t: np.ndarray) -> np.ndarray:
    """S^{L,-} at each time in ``t`` (vectorized over pairs)."""
    if not len(u):
        return np.zeros_like(t)
    base = c / (2.0 * np.sinh(u / 2.0))
    out = np.array([math.fsum(base * np.exp(-u * u / (4.0 * tt))) for tt in t])
    return out * np.exp(-t / 4.0) / np.sqrt(4.0 * math.pi * t)


class _LargeTime:
    """Pointwise enclosure of S(t) - 1 on [1, R]."""

    def __init__(self, s, volume, genus, L, eta, config):
        self.s, self.volume, self.genus, self.L, self.eta = s, volume, genus, L, eta
        self.config = config
        self.u, self.c = _pairs(s, L)
        self.qtol = 10 * config.quad_abs_tol * volume

    def evaluate(self, t: np.ndarray):
        smooth = np.array([self.volume * identity_term(float(x), self.config) / (4.0 * math.pi) for x in t])
        geo = _geodesic_sum(self.u, self.c, t)
        tail = np.array([geodesic_tail_bound(self.genus, self.s, float(x), self.L) for x in t])
        h_plus = np.maximum(smooth + geo + tail - 1.0 + self.qtol, 0.0)
        # theta+(t) = min_{t0 <= t} e^{-(t - t0) eta} H+(t0), over the nodes up to t
        order = np.argsort(t)
        scaled = np.minimum.accumulate(np.exp(self.eta * t[order]) * h_plus[order])
        theta = np.empty_like(t)
        theta[order] = np.exp(-self.eta * t[order]) * scaled
        lo = np.maximum(geo - 1.0, -smooth) - self.qtol
        hi = np.minimum(geo - 1.0 + tail, -smooth + theta) + self.qtol
        return lo, hi, geo


def log_det(s: LengthSpectrum, volume: float, params: DetParams = DetParams(), genus: int | None = None,
            config: HeatEvalConfig = DEFAULT_CONFIG) -> DetResult:
    """Certified enclosure of log det Delta for a connected surface."""
    if not volume > 0:
        raise DomainError("volume must be positive")
    p = params.resolved(s)
    L, R, eta = p.L, p.R, p.eta
    if L > s.cutoff_L * (1 + 1e-12):
        raise IncompleteSpectrumError(f"spectrum is complete only to {s.cutoff_L}, L={L} requested")
    if L < L0:
        raise DomainError(f"L must be >= 2 asinh(1) = {L0:.6f}")
    if genus is None:
        genus = s.genus if s.genus is not None else int(round(volume / (4 * math.pi))) + 1
    if genus < 2:
        raise DomainError("genus must be >= 2")
    notes: list[str] = []
    if not s.classes:
        notes.append("no-geodesic-data")

    E = constant_E(_CONSTANT_POLICY)
    gamma = euler_gamma(_CONSTANT_POLICY)
    j0 = small_t_integral(s, L)
    t2 = small_t_tail(genus, s, L)

    large = _LargeTime(s, volume, genus, L, eta, config)

    def rules(panels):
        t, w = _gl_nodes(R, panels)
        lo, hi, geo = large.evaluate(t)
        return (
            math.fsum(w * lo / t),
            math.fsum(w * hi / t),
            math.fsum(w * geo / t),
            bool(np.any(lo > hi + 1e-12)),
        )

    lo1, hi1, geo1, bad1 = rules(p.panels)
    lo2, hi2, geo2, bad2 = rules(2 * p.panels)
    if bad1 or bad2:
        notes.append("enclosures disagree: eta may exceed lambda_1")
        warnings.warn("geometric and spectral enclosures are inconsistent; eta may exceed lambda_1", RuntimeWarning, stacklevel=2)
    # the finer rule is used; the coarse one only estimates the error
    lo_int, hi_int = min(lo2, hi2), max(lo2, hi2)
    quad = max(abs(lo2 - lo1), abs(hi2 - hi1)) + p.quad_abs_tol

    b1 = smooth_sup_coefficient(volume, config)
    h1 = max(heat_trace_upper(s, volume, 1.0, genus, L, config) - 1.0, 0.0)
    t_tail = b1 * float(special.exp1(R / 4.0)) + h1 * math.exp(eta) * float(special.exp1(eta * R))

    head = volume * E + gamma - j0
    value = head - 0.5 * t2 - 0.5 * (lo_int + hi_int)
    budget = {
        "t_tail": t_tail,
        "geodesic_tail_small_t": 0.5 * t2,
        "geodesic_tail_large_t": 0.5 * (hi_int - lo_int),
        "quadrature": quad,
    }
    error = math.fsum(budget[k] for k in BUDGET_KEYS)
    raw = head - (geo2 - math.log(R))
    return DetResult(value, error, budget, raw, p, tuple(notes))


def log_selberg_derivative_at_1(det: DetResult, volume: float) -> float:
    """det.value - V E: the multiplicative normalization log Z'(1), up to the identity's additive constant."""
    return det.value - volume * constant_E(_CONSTANT_POLICY)


def normalized_log_det(det: DetResult, volume: float) -> tuple[float, float]:
    if not volume > 0:
        raise DomainError("volume must be positive")
    return det.value / volume, det.error / volume
