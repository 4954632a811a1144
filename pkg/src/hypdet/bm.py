"""Random oriented cubic graphs and their left-right turn combinatorics.

A graph on 2n vertices has 6n half-edges; vertex ``v`` owns half-edges
3v, 3v+1, 3v+2.  ``pairing`` is the edge involution and ``rotation`` sends a
half-edge to the next one around its vertex in the chosen cyclic order.

A state is the half-edge through which a path has just entered a vertex.
Turning left leaves through the rotation successor, turning right through the
predecessor:

    T_l = pairing o rotation,    T_r = pairing o rotation^{-1}.

For a turn word w the map T_w (letters applied left to right) permutes the
6n states; each of its k-cycles is a closed path whose turn sequence is w^k.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError


class ParabolicWordError(DomainError):
    pass


@dataclass(frozen=True)
class OrientedCubicGraph:
    n_vertices: int
    pairing: tuple[int, ...]
    rotation: tuple[int, ...]

    def __post_init__(self) -> None:
        h = 3 * self.n_vertices
        p, r = self.pairing, self.rotation
        if len(p) != h or len(r) != h:
            raise DomainError("pairing and rotation must cover all 3 * n_vertices half-edges")
        if any(p[i] == i or p[p[i]] != i for i in range(h)):
            raise DomainError("pairing must be a fixed-point-free involution")
        for v in range(self.n_vertices):
            own = {3 * v, 3 * v + 1, 3 * v + 2}
            if {r[i] for i in own} != own or any(r[i] == i for i in own):
                raise DomainError(f"rotation at vertex {v} is not a 3-cycle of its half-edges")

    @property
    def n(self) -> int:
        return self.n_vertices // 2

    def degrees(self) -> list[int]:
        return [3] * self.n_vertices

    def turn_maps(self) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(self.pairing)
        r = np.asarray(self.rotation)
        return p[r], p[np.argsort(r)]


def _rotation(orientations) -> tuple[int, ...]:
    rot = []
    for v, o in enumerate(orientations):
        a, b, c = 3 * v, 3 * v + 1, 3 * v + 2
        rot += [b, c, a] if o == 0 else [c, a, b]
    return tuple(rot)


def from_pairing(n_vertices: int, pairs, orientations) -> OrientedCubicGraph:
    """Graph from a list of half-edge pairs and one orientation bit per vertex."""
    p = [-1] * (3 * n_vertices)
    for a, b in pairs:
        p[a], p[b] = b, a
    return OrientedCubicGraph(n_vertices, tuple(p), _rotation(orientations))


def sample_graph(n: int, seed: int) -> OrientedCubicGraph:
    """Configuration model: uniform perfect matching of 6n half-edges, uniform rotations."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(6 * n)
    orient = rng.integers(2, size=2 * n)
    return from_pairing(2 * n, order.reshape(-1, 2).tolist(), orient.tolist())


def relabel(g: OrientedCubicGraph, seed: int) -> OrientedCubicGraph:
    """The same graph with vertices and half-edge slots renamed at random."""
    rng = np.random.default_rng(seed)
    V = g.n_vertices
    vperm = rng.permutation(V)
    shifts = rng.integers(3, size=V)
    new = np.empty(3 * V, dtype=np.int64)
    for v in range(V):
        for i in range(3):
            new[3 * v + i] = 3 * vperm[v] + (i + shifts[v]) % 3
    p = np.empty(3 * V, dtype=np.int64)
    r = np.empty(3 * V, dtype=np.int64)
    pair, rot = np.asarray(g.pairing), np.asarray(g.rotation)
    p[new] = new[pair]
    r[new] = new[rot]
    return OrientedCubicGraph(V, tuple(int(x) for x in p), tuple(int(x) for x in r))


# ----------------------------------------------------------------------------
# words
# ----------------------------------------------------------------------------


def min_rotation(s: str) -> str:
    if not s:
        return s
    return min(s[i:] + s[:i] for i in range(len(s)))


def primitive_root(s: str) -> tuple[str, int]:
    n = len(s)
    for d in range(1, n + 1):
        if n % d == 0 and s[:d] * (n // d) == s:
            return s[:d], n // d
    return s, 1


@dataclass(frozen=True)
class LRWord:
    letters: str

    def __post_init__(self) -> None:
        if not self.letters or set(self.letters) - {"l", "r"}:
            raise DomainError("a turn word is a nonempty string over 'l', 'r'")

    @classmethod
    def canonical(cls, letters: str) -> LRWord:
        return cls(min_rotation(letters))

    @property
    def primitive(self) -> bool:
        return primitive_root(self.letters)[1] == 1

    @property
    def mixed(self) -> bool:
        return "l" in self.letters and "r" in self.letters

    def reversed_swapped(self) -> LRWord:
        return LRWord.canonical(self.letters[::-1].translate(str.maketrans("lr", "rl")))

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters


_L = ((1, 1), (0, 1))
_R = ((1, 0), (1, 1))


def _mat_mul(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def word_matrix(w: LRWord | str) -> tuple[tuple[int, int], tuple[int, int]]:
    """M_w = W_1 ... W_N with l -> [[1,1],[0,1]] and r -> [[1,0],[1,1]], in exact integers."""
    s = w.letters if isinstance(w, LRWord) else w
    M = ((1, 0), (0, 1))
    for x in s:
        M = _mat_mul(M, _L if x == "l" else _R)
    return M


def word_trace(w: LRWord | str) -> int:
    M = word_matrix(w)
    return M[0][0] + M[1][1]


def word_length(w: LRWord | str) -> float:
    tr = word_trace(w)
    if tr <= 2:
        raise ParabolicWordError(f"word {w} is parabolic (trace {tr})")
    return 2.0 * math.acosh(tr / 2.0)


def trace_cap(L: float) -> int:
    """Largest integer trace allowed by length <= L."""
    if not L > 0:
        raise DomainError("L must be positive")
    return int(math.floor(2.0 * math.cosh(L / 2.0) * (1 + 1e-12)))


@lru_cache(maxsize=64)
def _word_set(cap: int) -> tuple[LRWord, ...]:
    out = set()
    # a word with both letters of length N has trace >= N + 1
    max_len = max(cap - 1, 0)

    def dfs(prefix: str, M) -> None:
        if prefix and M[0][0] + M[1][1] > cap:
            return  # appending letters never lowers the trace
        if "l" in prefix and "r" in prefix:
            if prefix == min_rotation(prefix) and primitive_root(prefix)[1] == 1:
                out.add(prefix)
        if len(prefix) == max_len:
            return
        dfs(prefix + "l", _mat_mul(M, _L))
        dfs(prefix + "r", _mat_mul(M, _R))

    dfs("", ((1, 0), (0, 1)))
    return tuple(LRWord(s) for s in sorted(out, key=lambda s: (word_trace(s), len(s), s)))


def word_set_WL(L: float) -> list[LRWord]:
    """All primitive cyclic words with both letters and trace <= 2 cosh(L/2), one per rotation class."""
    return list(_word_set(trace_cap(L)))


# ----------------------------------------------------------------------------
# cycles and census
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class LRCycle:
    word: LRWord  # primitive root, canonical rotation
    period: int
    length: int  # number of states visited


@dataclass(frozen=True)
class LeftRightCycles:
    mixed: tuple[LRCycle, ...]  # cycles of the alternating 12n-state map
    pure: tuple[LRCycle, ...]  # left-only and right-only cycles (cusp data)

    def total_states(self) -> int:
        return sum(c.length for c in self.mixed)

    def mixed_counts(self) -> Counter:
        return Counter((str(c.word), c.period) for c in self.mixed)

    def pure_counts(self) -> Counter:
        return Counter((str(c.word), c.period) for c in self.pure)


def _cycles(perm: np.ndarray) -> list[list[int]]:
    seen = np.zeros(len(perm), dtype=bool)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        c = []
        j = s
        while not seen[j]:
            seen[j] = True
            c.append(j)
            j = int(perm[j])
        out.append(c)
    return out


def _as_cycle(turns: str) -> LRCycle:
    root, period = primitive_root(min_rotation(turns))
    return LRCycle(LRWord(root), period, len(turns))


def leftright_cycles(g: OrientedCubicGraph) -> LeftRightCycles:
    """Cycles of the left-right successor map on the 12n states (half-edge, next turn).

    The successor of (h, x) is (T_x(h), opposite of x), so every state lies on
    exactly one cycle and cycle lengths add up to 12n.  Pure-turn cycles (the
    orbits of T_l and of T_r, which bound cusps) are returned separately.
    """
    tl, tr = g.turn_maps()
    H = len(tl)
    # state index: h for (h, l), H + h for (h, r)
    succ = np.concatenate([H + tl, tr])
    mixed = []
    for c in _cycles(succ):
        turns = "".join("l" if s < H else "r" for s in c)
        mixed.append(_as_cycle(turns))
    pure = []
    for letter, t in (("l", tl), ("r", tr)):
        for c in _cycles(t):
            pure.append(LRCycle(LRWord(letter), len(c), len(c)))
    return LeftRightCycles(tuple(mixed), tuple(pure))


def word_permutation(g: OrientedCubicGraph, w: LRWord | str) -> np.ndarray:
    """T_w on half-edges: the state reached after following the turns of w."""
    s = w.letters if isinstance(w, LRWord) else w
    tl, tr = g.turn_maps()
    perm = np.arange(len(tl))
    for x in s:
        perm = (tl if x == "l" else tr)[perm]
    return perm


def census(g: OrientedCubicGraph, L: float) -> dict[str, int]:
    """Z_{n,w} for w in W_L: closed geodesics whose turn word is w in one orientation.

    A fixed point of T_w is an oriented closed path with word w.  Reversing
    the orientation turns w into its reversed, swapped word; when that is w
    again, each geodesic is met twice and the count is halved.
    """
    out = {}
    for w in word_set_WL(L):
        perm = word_permutation(g, w)
        fix = int((perm == np.arange(len(perm))).sum())
        if w.reversed_swapped() == w:
            if fix % 2:
                raise AssertionError(f"odd number of oriented closed paths for self-reverse word {w}")
            fix //= 2
        out[str(w)] = fix
    return out


def geodesic_cycles(g: OrientedCubicGraph, L: float) -> dict[str, Counter]:
    """For each w in W_L, the cycle-length distribution of T_w (a k-cycle is a geodesic with word w^k)."""
    out = {}
    for w in word_set_WL(L):
        out[str(w)] = Counter(len(c) for c in _cycles(word_permutation(g, w)))
    return out


def n_of_L(g: OrientedCubicGraph, L: float) -> int:
    """Pairs (gamma, m) with m l(gamma) <= L over oriented primitive closed geodesics."""
    total = 0
    for w, cyc in geodesic_cycles(g, L).items():
        ell = word_length(w)
        for k, count in cyc.items():
            # the geodesic has turn word w^k; it is primitive as a closed path
            total += count * int(math.floor(L / (k * ell) * (1 + 1e-12)))
    return total


# ----------------------------------------------------------------------------
# Monte Carlo
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WordStats:
    word: str
    trace: int
    length: float
    mean: float
    variance: float
    samples: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.samples)


def census_samples(n: int, L: float, num_samples: int, seed: int) -> tuple[list[str], np.ndarray]:
    """Matrix of Z_{n,w} counts, one row per graph with seed ``seed + i``."""
    words = [str(w) for w in word_set_WL(L)]
    rows = []
    for i in range(num_samples):
        c = census(sample_graph(n, seed + i), L)
        rows.append([c[w] for w in words])
    return words, np.asarray(rows, dtype=float).reshape(num_samples, len(words))


def poisson_stats(n: int, L: float, num_samples: int, seed: int) -> list[WordStats]:
    if num_samples < 2:
        raise DomainError("num_samples must be >= 2")
    words, Z = census_samples(n, L, num_samples, seed)
    out = []
    for j, w in enumerate(words):
        out.append(WordStats(w, word_trace(w), word_length(w), float(Z[:, j].mean()), float(Z[:, j].var(ddof=1)), num_samples))
    return out


def poisson_deviation(stat: WordStats) -> float:
    """|mean - variance| / max(mean, 0.05): zero for an exact Poisson law."""
    return abs(stat.mean - stat.variance) / max(stat.mean, 0.05)
