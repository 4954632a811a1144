"""Random degree-n covers of a base surface.

A cover is given by a homomorphism phi: Gamma -> S_n, i.e. permutations
(a_1, b_1, ..., a_g, b_g) with [a_1, b_1] ... [a_g, b_g] = id.  For small n the
whole solution set is indexed, which gives exact uniform sampling and exact
expectations; beyond that an MCMC sampler is provided and labeled as such.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError
from .field import chebyshev_traces
from .group import Permutation, Word, diameter, evaluate_hom, fixed_points, is_transitive
from .spectrum import LengthSpectrum, PrimitiveClass, _class_order, max_iterate

# exhaustive work is capped at (n!)^{2g} relator checks: 120^4 for genus 2, n = 5
MAX_RELATOR_CHECKS = 120**4
SAMPLER_TAGS = ("exhaustive", "mcmc", "explicit")


class NotConnectedError(DomainError):
    pass


class IncompleteBaseSpectrumError(DomainError):
    pass


@dataclass(frozen=True)
class HomSample:
    perms: tuple[Permutation, ...]
    n: int
    sampler_tag: str = "explicit"
    seed: int | None = None

    def __post_init__(self) -> None:
        perms = tuple(self.perms)
        if any(p.n != self.n for p in perms):
            raise DomainError("all permutations must act on the same n points")
        if self.sampler_tag not in SAMPLER_TAGS:
            raise DomainError(f"unknown sampler tag {self.sampler_tag!r}")
        if len(perms) % 2:
            raise DomainError("need an even number of generator images")
        rel = _relator(len(perms) // 2)
        if not evaluate_hom(perms, rel).is_identity():
            raise DomainError("permutations do not satisfy the surface relator")
        object.__setattr__(self, "perms", perms)

    @classmethod
    def from_images(cls, images: Sequence[Sequence[int]], sampler_tag: str = "explicit", seed: int | None = None) -> HomSample:
        """From 1-based image lists."""
        perms = tuple(Permutation.from_one_based(x) for x in images)
        n = perms[0].n if perms else 0
        return cls(perms, n, sampler_tag, seed)

    @property
    def genus(self) -> int:
        return len(self.perms) // 2

    def connected(self) -> bool:
        return is_transitive(self.perms)

    def to_json(self) -> dict:
        return {"n": self.n, "perms": [p.one_based() for p in self.perms], "sampler_tag": self.sampler_tag, "seed": self.seed}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> HomSample:
        h = cls.from_images(d["perms"], d.get("sampler_tag", "explicit"), d.get("seed"))
        if h.n != d["n"]:
            raise DomainError("n does not match the permutation size")
        return h


@dataclass(frozen=True)
class CoverSpectrum:
    base_name: str
    hom: HomSample
    spectrum: LengthSpectrum
    # degree k of each class over its base geodesic, aligned with spectrum.classes
    degrees: tuple[int, ...] = field(default=(), compare=False)

    @property
    def connected(self) -> bool:
        return self.hom.connected()


def _relator(genus: int) -> Word:
    letters = []
    for j in range(1, genus + 1):
        a, b = 2 * j - 1, 2 * j
        letters += [a, b, -a, -b]
    return Word(tuple(letters))


def _genus_of(base) -> int:
    return base if isinstance(base, int) else base.genus


# ----------------------------------------------------------------------------
# exact index of Hom(Gamma_g, S_n)
# ----------------------------------------------------------------------------


class _SymmetricGroup:
    """S_n as integer indices with multiplication, inverse and power tables."""

    def __init__(self, n: int):
        self.n = n
        self.perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
        self.size = len(self.perms)
        weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self._codes = self.perms @ weights
        self._weights = weights
        # comp[i, j] is the index of p_i o p_j
        composed = self.perms[:, self.perms]  # [i, j, x] = p_i(p_j(x))
        self.comp = self.index(composed)
        self.inv = self.index(np.argsort(self.perms, axis=1))
        self.identity = 0
        self.fix = (self.perms == np.arange(n)).sum(axis=1)

    def index(self, arr: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._codes, arr @ self._weights)

    def power(self, q: int) -> np.ndarray:
        out = np.zeros(self.size, dtype=np.int64)
        base = np.arange(self.size)
        for _ in range(q):
            out = self.comp[out, base]
        return out

    def permutation(self, i: int) -> Permutation:
        return Permutation(tuple(int(x) for x in self.perms[i]))


@lru_cache(maxsize=8)
def _symmetric_group(n: int) -> _SymmetricGroup:
    return _SymmetricGroup(n)


class _HomSpace:
    """Solutions of prod_k [a_k, b_k] = id, in lexicographic order of
    (commutator_1, pair_1, commutator_2, pair_2, ...)."""

    def __init__(self, n: int, genus: int):
        self.n, self.genus = n, genus
        G = self.G = _symmetric_group(n)
        N = G.size
        ab = G.comp
        ij = np.arange(N)
        comm = ab[ab[ab[ij[:, None], ij[None, :]], G.inv[ij][:, None]], G.inv[ij][None, :]]
        flat = comm.ravel()
        order = np.argsort(flat, kind="stable")
        self.pairs_by_comm = np.split(order, np.searchsorted(flat[order], np.arange(1, N)))
        self.count = [len(p) for p in self.pairs_by_comm]
        # rest[k][s]: ways for handles k+1..g to multiply to s
        rest = [[0] * N for _ in range(genus + 1)]
        rest[genus][G.identity] = 1
        for k in range(genus - 1, -1, -1):
            nxt = rest[k + 1]
            for s in range(N):
                tot = 0
                for r in range(N):
                    c = self.count[r]
                    if c:
                        tot += c * nxt[int(G.comp[G.inv[r], s])]
                rest[k][s] = tot
        self.rest = rest
        self.total = rest[0][G.identity]

    def _block(self, k: int, prefix: int, r: int) -> int:
        # homs whose handle k (0-based) has commutator r after the given prefix product
        G = self.G
        return self.count[r] * self.rest[k + 1][int(G.inv[G.comp[prefix, r]])]

    def unrank(self, index: int) -> list[int]:
        if not 0 <= index < self.total:
            raise DomainError("index out of range")
        G = self.G
        prefix, out = G.identity, []
        for k in range(self.genus):
            for r in range(G.size):
                block = self._block(k, prefix, r)
                if index < block:
                    inner = self.rest[k + 1][int(G.inv[G.comp[prefix, r]])]
                    pair = int(self.pairs_by_comm[r][index // inner])
                    index %= inner
                    out += [pair // G.size, pair % G.size]
                    prefix = int(G.comp[prefix, r])
                    break
                index -= block
        return out

    def iterate(self) -> Iterator[list[int]]:
        G = self.G

        def rec(k, prefix, acc):
            if k == self.genus:
                yield acc
                return
            for r in range(G.size):
                nxt = int(G.comp[prefix, r])
                if not self.count[r] or not self.rest[k + 1][int(G.inv[nxt])]:
                    continue
                for pair in self.pairs_by_comm[r]:
                    pair = int(pair)
                    yield from rec(k + 1, nxt, acc + [pair // G.size, pair % G.size])

        yield from rec(0, G.identity, [])

    def all_rows(self) -> np.ndarray:
        """Every solution as a row of generator indices, in rank order."""
        G = self.G
        rows = np.zeros((1, 0), dtype=np.int64)
        prefix = np.array([G.identity])
        for k in range(self.genus):
            new_rows, new_prefix = [], []
            for row, pre in zip(rows, prefix):
                for r in range(G.size):
                    nxt = int(G.comp[pre, r])
                    if not self.count[r] or not self.rest[k + 1][int(G.inv[nxt])]:
                        continue
                    pairs = self.pairs_by_comm[r]
                    block = np.empty((len(pairs), row.size + 2), dtype=np.int64)
                    block[:, : row.size] = row
                    block[:, row.size] = pairs // G.size
                    block[:, row.size + 1] = pairs % G.size
                    new_rows.append(block)
                    new_prefix.append(np.full(len(pairs), nxt))
            rows = np.concatenate(new_rows)
            prefix = np.concatenate(new_prefix)
        return rows

    def evaluate(self, rows: np.ndarray, w: Word) -> np.ndarray:
        G = self.G
        out = np.full(len(rows), G.identity, dtype=np.int64)
        for x in w:
            g = rows[:, abs(x) - 1]
            out = G.comp[out, g if x > 0 else G.inv[g]]
        return out

    def sample(self, index: int, seed: int | None = None) -> HomSample:
        perms = tuple(self.G.permutation(i) for i in self.unrank(index))
        return HomSample(perms, self.n, "exhaustive", seed)


def _check_budget(n: int, genus: int) -> None:
    if n < 1:
        raise DomainError("n must be >= 1")
    if math.factorial(n) ** (2 * genus) > MAX_RELATOR_CHECKS:
        raise BudgetExceededError(f"exhaustive enumeration of Hom(Gamma_{genus}, S_{n}) exceeds {MAX_RELATOR_CHECKS} relator checks")


@lru_cache(maxsize=16)
def _hom_space(n: int, genus: int) -> _HomSpace:
    _check_budget(n, genus)
    return _HomSpace(n, genus)


def exact_sampling_available(base, n: int) -> bool:
    return n >= 1 and math.factorial(n) ** (2 * _genus_of(base)) <= MAX_RELATOR_CHECKS


def hom_count(base, n: int) -> int:
    """|Hom(Gamma_g, S_n)| by exhaustive counting (small n only)."""
    return _hom_space(n, _genus_of(base)).total


def enumerate_homs(base, n: int) -> Iterator[HomSample]:
    """Every homomorphism exactly once, in rank order."""
    space = _hom_space(n, _genus_of(base))
    G = space.G
    for row in space.iterate():
        yield HomSample(tuple(G.permutation(i) for i in row), n, "exhaustive")


# ----------------------------------------------------------------------------
# characters: the counting formula and connectivity
# ----------------------------------------------------------------------------


def _partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def irrep_dimension(shape: Sequence[int]) -> int:
    """Hook length formula."""
    n = sum(shape)
    conj = [sum(1 for r in shape if r > j) for j in range(shape[0])] if shape else []
    hooks = 1
    for i, r in enumerate(shape):
        for j in range(r):
            hooks *= r - j + conj[j] - i - 1
    return math.factorial(n) // hooks


def character_hom_count(genus: int, n: int) -> int:
    """(n!)^{2g-1} sum over irreps of dim^{2-2g}."""
    f = math.factorial(n)
    total = sum(Fraction(1, irrep_dimension(p) ** (2 * genus - 2)) for p in _partitions(n))
    value = f ** (2 * genus - 1) * total
    if value.denominator != 1:
        raise ArithmeticError("character sum is not an integer")
    return int(value)


@lru_cache(maxsize=None)
def transitive_hom_count(genus: int, n: int) -> int:
    """Transitive homomorphisms, from H_n = sum_k C(n-1, k-1) T_k H_{n-k} (orbit of point 1)."""
    if n == 1:
        return 1
    h = character_hom_count(genus, n)
    rest = sum(math.comb(n - 1, k - 1) * transitive_hom_count(genus, k) * character_hom_count(genus, n - k) for k in range(1, n))
    return h - rest


def connected_probability(genus: int, n: int) -> Fraction:
    """Exact probability that a uniformly random degree-n cover is connected."""
    if n < 1:
        raise DomainError("n must be >= 1")
    h = character_hom_count(genus, n) if n > 1 else 1
    return Fraction(transitive_hom_count(genus, n), h)


# ----------------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------------


def _transposition(rng, n: int) -> np.ndarray:
    i, j = rng.choice(n, size=2, replace=False)
    t = np.arange(n)
    t[i], t[j] = j, i
    return t


def _compose(*ps: np.ndarray) -> np.ndarray:
    # _compose(p, q) = p o q
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = p[out]
    return out


def _cycles_of(p: np.ndarray) -> list[list[int]]:
    seen = np.zeros(len(p), dtype=bool)
    out = []
    for s0 in range(len(p)):
        if seen[s0]:
            continue
        c, j = [], s0
        while not seen[j]:
            seen[j] = True
            c.append(j)
            j = int(p[j])
        out.append(c)
    return out


def _cycle_type(p: np.ndarray) -> tuple[int, ...]:
    return tuple(sorted(len(c) for c in _cycles_of(p)))


def _log_centralizer(ct: tuple[int, ...]) -> float:
    """log |Z(p)| = sum over cycle lengths k of m_k log k + log m_k!."""
    return sum(m * math.log(k) + math.lgamma(m + 1) for k, m in Counter(ct).items())


def _by_length(p: np.ndarray) -> dict[int, list[list[int]]]:
    out: dict[int, list[list[int]]] = {}
    for c in _cycles_of(p):
        out.setdefault(len(c), []).append(c)
    return out


def _conjugator(x: np.ndarray, y: np.ndarray, rng) -> np.ndarray:
    """Uniform b with b x b^{-1} = y (x, y of equal cycle type)."""
    cx, cy = _by_length(x), _by_length(y)
    b = np.empty(len(x), dtype=np.int64)
    for k, xs in cx.items():
        ys = cy[k]
        # a uniform bijection of k-cycles with a uniform rotation on each is uniform over the coset
        for i, j in enumerate(rng.permutation(len(xs))):
            shift = int(rng.integers(k))
            for t, u in enumerate(xs[i]):
                b[u] = ys[j][(t + shift) % k]
    return b


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _compose(a, b, np.argsort(a), np.argsort(b))


def _completion(free: list[np.ndarray], genus: int) -> tuple[np.ndarray, float]:
    """(d, log weight): the last commutator must equal d; there are |Z(a_g)| choices of b_g when allowed."""
    n = len(free[0])
    acc = np.arange(n)
    for k in range(genus - 1):
        acc = _compose(acc, _commutator(free[2 * k], free[2 * k + 1]))
    d = np.argsort(acc)
    a = free[-1]
    ct = _cycle_type(a)
    if _cycle_type(_compose(np.argsort(a), d)) != ct:
        return d, -math.inf
    return d, _log_centralizer(ct)


def mcmc_hom(genus: int, n: int, seed: int, steps: int | None = None) -> HomSample:
    """Approximate uniform sample from Hom(Gamma_g, S_n).

    The chain runs on the free part (a_1, b_1, ..., a_g); b_g is then drawn
    exactly, since the solutions of [a_g, b_g] = d form a coset of the
    centralizer of a_g^{-1} (or are absent).  The free part therefore has
    weight |Z(a_g)| [a_g^{-1} d ~ a_g^{-1}], targeted by Metropolis moves that
    multiply one entry by a random transposition.  Mixing is not certified.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if n == 1:
        return HomSample(tuple(Permutation.identity(1) for _ in range(2 * genus)), 1, "mcmc", seed)
    # start with every handle commuting: a_k = b_k, which always completes
    free: list[np.ndarray] = []
    for _ in range(genus - 1):
        x = rng.permutation(n)
        free += [x, x.copy()]
    free.append(rng.permutation(n))
    d, logw = _completion(free, genus)
    steps = 100 * n * genus if steps is None else steps
    for _ in range(steps):
        j = int(rng.integers(len(free)))
        t = _transposition(rng, n)
        old = free[j]
        free[j] = t[old]
        d_new, logw_new = _completion(free, genus)
        if logw_new >= logw or rng.random() < math.exp(logw_new - logw):
            d, logw = d_new, logw_new
        else:
            free[j] = old
    a = free[-1]
    ainv = np.argsort(a)
    # [a, b] = d  <=>  b a^{-1} b^{-1} = a^{-1} d
    b = _conjugator(ainv, _compose(ainv, d), rng)
    perms = free + [b]
    return HomSample(tuple(Permutation(tuple(int(v) for v in p)) for p in perms), n, "mcmc", seed)


def sample_hom(base, n: int, seed: int) -> HomSample:
    """Uniform sample: exact by index for small n, MCMC (tagged) otherwise."""
    genus = _genus_of(base)
    if n < 1:
        raise DomainError("n must be >= 1")
    if exact_sampling_available(genus, n):
        space = _hom_space(n, genus)
        rng = np.random.default_rng(seed)
        return space.sample(int(rng.integers(space.total)), seed)
    return mcmc_hom(genus, n, seed)


# ----------------------------------------------------------------------------
# lifting
# ----------------------------------------------------------------------------


def _check_base(base_spec: LengthSpectrum, L: float) -> None:
    if L > base_spec.cutoff_L * (1 + 1e-12):
        raise IncompleteBaseSpectrumError(f"base spectrum is complete only to {base_spec.cutoff_L}, L={L} requested")


def lift_spectrum(base_spec: LengthSpectrum, hom: HomSample, L: float) -> CoverSpectrum:
    """Cover classes up to L: a k-cycle of phi(gamma) lifts gamma to a class of length k l(gamma)."""
    _check_base(base_spec, L)
    lifts = []
    for c in base_spec.classes:
        kmax = max_iterate(c.length, L)
        if kmax == 0:
            break
        image = evaluate_hom(hom.perms, c.word)
        traces = None
        for cyc in image.cycles():
            k = len(cyc)
            if k > kmax:
                continue
            if traces is None:
                traces = chebyshev_traces(c.trace, kmax)
            lifts.append((PrimitiveClass(c.word**k, abs(traces[k]), k * c.length, c.oriented_multiplicity), k))
    lifts.sort(key=lambda x: _class_order(x[0]))
    genus = None
    if base_spec.genus is not None and hom.connected():
        genus = hom.n * (base_spec.genus - 1) + 1
    spec = LengthSpectrum(
        tuple(c for c, _ in lifts),
        L,
        hom.n * base_spec.volume,
        genus,
        f"{base_spec.base_name}/cover{hom.n}" if base_spec.base_name else f"cover{hom.n}",
        {"sampler_tag": hom.sampler_tag},
    )
    return CoverSpectrum(base_spec.base_name, hom, spec, tuple(k for _, k in lifts))


def vz_check(base_spec: LengthSpectrum, hom: HomSample, L: float) -> tuple[float, float]:
    """Both sides of the length-sum identity over pairs with m l <= L.

    lhs sums l(gamma') over cover pairs (gamma', m); rhs sums
    l(gamma) Fix(phi(gamma^q)) over base pairs, evaluating gamma^q directly.
    """
    cover = lift_spectrum(base_spec, hom, L)
    lhs = math.fsum(c.oriented_multiplicity * c.length * max_iterate(c.length, L) for c in cover.spectrum.classes)
    rhs_terms = []
    for c in base_spec.classes:
        qmax = max_iterate(c.length, L)
        if qmax == 0:
            break
        for q in range(1, qmax + 1):
            fix = fixed_points(evaluate_hom(hom.perms, c.word**q))
            rhs_terms.append(c.oriented_multiplicity * c.length * fix)
    return lhs, math.fsum(rhs_terms)


def lift_count_identity(base_spec: LengthSpectrum, hom: HomSample, L: float) -> tuple[int, int]:
    """Integer form: sum over cover pairs of the degree k versus sum of Fix over base pairs."""
    cover = lift_spectrum(base_spec, hom, L)
    lhs = sum(c.oriented_multiplicity * k * max_iterate(c.length, L) for c, k in zip(cover.spectrum.classes, cover.degrees))
    rhs = 0
    for c in base_spec.classes:
        qmax = max_iterate(c.length, L)
        if qmax == 0:
            break
        rhs += sum(c.oriented_multiplicity * fixed_points(evaluate_hom(hom.perms, c.word**q)) for q in range(1, qmax + 1))
    return lhs, rhs


# ----------------------------------------------------------------------------
# fixed-point statistics
# ----------------------------------------------------------------------------


def divisor_count(q: int) -> int:
    if q < 1:
        raise DomainError("q must be >= 1")
    return sum(1 for d in range(1, q + 1) if q % d == 0)


def exact_fix_mean(base, word: Word, q: int, n: int) -> Fraction:
    """E[Fix(phi(word^q))] over the uniform measure, by exhaustion."""
    if q < 1:
        raise DomainError("q must be >= 1")
    space = _hom_space(n, _genus_of(base))
    G = space.G
    rows = space.all_rows()
    images = G.power(q)[space.evaluate(rows, word)]
    return Fraction(int(G.fix[images].sum()), space.total)


def exact_pair_distribution(base, n: int, generator: int = 1) -> np.ndarray:
    """Exact probability of each image of one generator, indexed like S_n (lexicographic)."""
    space = _hom_space(n, _genus_of(base))
    rows = space.all_rows()
    counts = np.bincount(rows[:, generator - 1], minlength=space.G.size)
    return counts / space.total


def fix_samples(base, word: Word, q: int, n: int, num_samples: int, seed: int) -> tuple[np.ndarray, str]:
    if q < 1:
        raise DomainError("q must be >= 1")
    if num_samples < 1:
        raise DomainError("num_samples must be >= 1")
    genus = _genus_of(base)
    w = word**q
    if exact_sampling_available(genus, n):
        space = _hom_space(n, genus)
        rng = np.random.default_rng(seed)
        idx = rng.integers(space.total, size=num_samples)
        rows = np.array([space.unrank(int(i)) for i in idx], dtype=np.int64)
        return space.G.fix[space.evaluate(rows, w)].astype(float), "exhaustive"
    vals = [fixed_points(evaluate_hom(mcmc_hom(genus, n, seed + i).perms, w)) for i in range(num_samples)]
    return np.asarray(vals, dtype=float), "mcmc"


def fix_statistics(base, word: Word, q: int, n: int, num_samples: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo mean of Fix(phi(word^q)) and its standard error."""
    vals, _ = fix_samples(base, word, q, n, num_samples, seed)
    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.inf
    return float(vals.mean()), stderr


# ----------------------------------------------------------------------------
# connectivity diagnostic
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SunadaDiagnostic:
    factor: float  # 1/((n-1) sqrt(2n)), the structural part of the n^{-3/2} bound
    diameter: int


def sunada_diagnostic(hom: HomSample) -> SunadaDiagnostic:
    if not hom.connected():
        raise NotConnectedError("the cover is not connected")
    n = hom.n
    if n == 1:
        return SunadaDiagnostic(math.inf, 0)
    return SunadaDiagnostic(1.0 / ((n - 1) * math.sqrt(2 * n)), diameter(hom.perms))
