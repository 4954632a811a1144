"""Universal constants of the determinant identity and the profile G(u).

Production values come from rapidly convergent Euler-Maclaurin forms; the
slowly convergent defining limits (``harmonic_limit``, ``glaisher_limit``) are
kept as independent checks.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from scipy.special import erfc

from .errors import BudgetExceededError, DomainError



def _bernoulli(m: int) -> list[Fraction]:
    # exact recurrence; scipy's float table loses ~1e-12 relative already at B_4
    b = [Fraction(1)]
    for k in range(1, m + 1):
        b.append(-sum(math.comb(k + 1, j) * b[j] for j in range(k)) / (k + 1))
    return b


_B2J = [float(x) for x in _bernoulli(40)[2::2]]
_MAX_CORRECTIONS = len(_B2J)
_MIN_N = 10


@dataclass(frozen=True)
class PrecisionPolicy:
    target_abs_error: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self) -> None:
        if not self.target_abs_error > 0:
            raise DomainError("target_abs_error must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


@dataclass(frozen=True)
class UniversalConstants:
    E: float
    zeta_prime_minus1: float
    log_A: float
    euler_gamma: float


DEFAULT_POLICY = PrecisionPolicy(1e-12)


def _harmonic(n: int) -> float:
    return math.fsum(1.0 / k for k in range(1, n + 1))


def harmonic_limit(n: int) -> float:
    """Raw partial sum ``H_n - log n`` (converges to gamma like 1/(2n))."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return _harmonic(n) - math.log(n)


def _gamma_at(N: int, p: int) -> float:
    # gamma = H_N - log N - 1/(2N) + sum_{j<=p} B_2j / (2j N^2j) + O(N^{-2p-2})
    terms = [_harmonic(N), -math.log(N), -0.5 / N]
    terms += [_B2J[j - 1] / (2 * j * N ** (2 * j)) for j in range(1, p + 1)]
    return math.fsum(terms)


def _em_plan(policy: PrecisionPolicy, remainder) -> tuple[int, int]:
    """Smallest N (then fewest corrections p) whose remainder bound meets the target."""
    for N in range(_MIN_N, policy.max_terms + 1):
        for p in range(1, _MAX_CORRECTIONS):
            r = remainder(N, p)
            if r < policy.target_abs_error:
                return N, p
            if p > 1 and r > remainder(N, p - 1):
                break  # asymptotic series started diverging at this N
    raise BudgetExceededError(
        f"max_terms={policy.max_terms} cannot reach error {policy.target_abs_error:g}"
    )


_lock = threading.Lock()
_cache: dict[tuple[str, float], float] = {}
# Everything coarser than this is served from one evaluation, so a value never
# depends on which precision happened to be requested first.
_WORKING_ERROR = 1e-13


def _cached(name: str, policy: PrecisionPolicy, compute, remainder) -> float:
    _em_plan(policy, remainder)  # budget check for the caller's own policy
    target = min(policy.target_abs_error, _WORKING_ERROR)
    key = (name, target)
    with _lock:
        if key not in _cache:
            _cache[key] = compute(PrecisionPolicy(target, max(policy.max_terms, 10_000)))
        return _cache[key]


def _gamma_remainder(N: int, p: int) -> float:
    # bounded by the first omitted correction
    return abs(_B2J[p]) / ((2 * p + 2) * N ** (2 * p + 2))


def _euler_gamma(policy: PrecisionPolicy) -> float:
    return _gamma_at(*_em_plan(policy, _gamma_remainder))


def euler_gamma(policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return _cached("gamma", policy, _euler_gamma, _gamma_remainder)


def _log_over_square_derivative(m: int, x: float) -> float:
    """m-th derivative of log(x)/x**2."""
    h = float(sum(Fraction(1, k) for k in range(1, m + 2)))
    return (-1) ** m * math.factorial(m + 1) * x ** (-2 - m) * (math.log(x) - (h - 1.0))


def _zeta2_remainder(N: int, p: int) -> float:
    # twice the first omitted correction
    return 2 * abs(_B2J[p]) / math.factorial(2 * p + 2) * abs(_log_over_square_derivative(2 * p + 1, N))


def _zeta_prime_2(policy: PrecisionPolicy) -> float:
    """zeta'(2) = -sum log(n)/n^2 with an Euler-Maclaurin tail."""
    N, p = _em_plan(policy, _zeta2_remainder)
    terms = [math.log(n) / n**2 for n in range(2, N)]
    terms.append((math.log(N) + 1.0) / N)  # integral from N to infinity
    terms.append(0.5 * math.log(N) / N**2)
    for j in range(1, p + 1):
        terms.append(-_B2J[j - 1] / math.factorial(2 * j) * _log_over_square_derivative(2 * j - 1, N))
    return -math.fsum(terms)


def zeta_prime_2(policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return _cached("zeta_prime_2", policy, _zeta_prime_2, _zeta2_remainder)


def log_glaisher(policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """log A through the functional equation: (gamma + log 2pi)/12 - zeta'(2)/(2 pi^2)."""
    tight = PrecisionPolicy(policy.target_abs_error / 4, policy.max_terms)
    return math.fsum([
        (euler_gamma(tight) + math.log(2 * math.pi)) / 12.0,
        -zeta_prime_2(tight) / (2 * math.pi**2),
    ])


def zeta_prime_minus1(policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return 1.0 / 12.0 - log_glaisher(policy)


def glaisher_log_limit(n: int) -> float:
    """log of the finite-n Glaisher quotient prod k^k / (e^{-n^2/4} n^{n^2/2+n/2+1/12})."""
    if n < 2:
        raise DomainError("n must be >= 2")
    # sum k log k - (n^2/2 + n/2) log n = sum k log(k/n); avoids cancelling two O(n^2 log n) terms
    s = math.fsum(k * math.log(k / n) for k in range(1, n))
    return s + n * n / 4.0 - math.log(n) / 12.0


def glaisher_limit(n: int) -> float:
    return math.exp(glaisher_log_limit(n))


def E_from_zeta_prime(zp: float) -> float:
    return (4.0 * zp - 0.5 + math.log(2 * math.pi)) / (4 * math.pi)


def constant_E(policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return E_from_zeta_prime(zeta_prime_minus1(policy))


def universal_constants(policy: PrecisionPolicy = DEFAULT_POLICY) -> UniversalConstants:
    log_a = log_glaisher(policy)
    zp = 1.0 / 12.0 - log_a
    return UniversalConstants(
        E=E_from_zeta_prime(zp),
        zeta_prime_minus1=zp,
        log_A=log_a,
        euler_gamma=euler_gamma(policy),
    )


def G(u: float) -> float:
    """G(u) = int_0^1 t^{-3/2} exp(-u^2/4t) dt = (2 sqrt(pi)/u) erfc(u/2)."""
    if not u > 0:
        raise DomainError("G is defined for u > 0")
    return 2.0 * math.sqrt(math.pi) / u * float(erfc(u / 2.0))


def G_bound(u: float) -> float:
    """Gaussian majorant (2 sqrt(2 pi)/u) exp(-u^2/8) of G."""
    if not u > 0:
        raise DomainError("G is defined for u > 0")
    return 2.0 * math.sqrt(2 * math.pi) / u * math.exp(-u * u / 8.0)
