"""Words in surface groups, permutations, and Schreier-graph diagnostics.

Letters are signed generator indices: ``+i`` is generator ``i`` (1-based) and
``-i`` its inverse.  For a genus-``g`` surface group generator ``2j-1`` is
``a_j`` and ``2j`` is ``b_j``; the text form writes capitals for inverses,
e.g. ``a1b1A1``.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import DomainError


class IdentityWordError(DomainError):
    """Raised when a conjugacy key is requested for the identity element."""


class SizeMismatchError(DomainError):
    pass


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True, order=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "letters", free_reduce(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def __pow__(self, k: int) -> Word:
        if k < 0:
            return self.inverse() ** (-k)
        return Word(self.letters * k)

    def inverse(self) -> Word:
        return Word(tuple(-x for x in reversed(self.letters)))

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return format_word(self.letters)

    @classmethod
    def parse(cls, text: str) -> Word:
        return cls(parse_letters(text))


_TOKEN = re.compile(r"([abAB])(\d+)")


def letter_name(x: int) -> str:
    i = abs(x)
    handle, kind = (i + 1) // 2, "a" if i % 2 == 1 else "b"
    return (kind if x > 0 else kind.upper()) + str(handle)


def format_word(letters: Sequence[int]) -> str:
    return "".join(letter_name(x) for x in letters)


def parse_letters(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    pos, out = 0, []
    for m in _TOKEN.finditer(text):
        if m.start() != pos:
            raise ValueError(f"cannot parse word {text!r}")
        kind, handle = m.group(1), int(m.group(2))
        if handle < 1:
            raise ValueError(f"bad handle index in {text!r}")
        idx = 2 * handle - 1 if kind.lower() == "a" else 2 * handle
        out.append(idx if kind.islower() else -idx)
        pos = m.end()
    if pos != len(text):
        raise ValueError(f"cannot parse word {text!r}")
    return tuple(out)


@dataclass(frozen=True)
class Presentation:
    num_generators: int
    relators: tuple[Word, ...]

    def __post_init__(self) -> None:
        if self.num_generators < 1:
            raise ValueError("num_generators must be >= 1")
        for r in self.relators:
            if any(abs(x) > self.num_generators for x in r):
                raise ValueError("relator uses an unknown generator")

    @property
    def genus(self) -> int | None:
        if self.num_generators % 2 == 0 and len(self.relators) == 1:
            if self.relators[0] == surface_relator(self.num_generators // 2):
                return self.num_generators // 2
        return None


def surface_relator(g: int) -> Word:
    letters: list[int] = []
    for j in range(1, g + 1):
        a, b = 2 * j - 1, 2 * j
        letters += [a, b, -a, -b]
    return Word(tuple(letters))


def surface_presentation(g: int) -> Presentation:
    """Standard presentation ``[a1,b1]...[ag,bg] = 1`` of a genus-g surface group."""
    if g < 1:
        raise ValueError("genus must be >= 1")
    return Presentation(2 * g, (surface_relator(g),))


# ----------------------------------------------------------------------------
# cyclic words and conjugacy
# ----------------------------------------------------------------------------


def cyclic_reduce(w: Word | Sequence[int]) -> Word:
    letters = list(free_reduce(w))
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == -letters[j - 1]:
        i += 1
        j -= 1
    return Word(tuple(letters[i:j]))


def _min_rotation(s: Sequence[int]) -> tuple[int, ...]:
    n = len(s)
    if n == 0:
        return ()
    # Booth's algorithm would be O(n); words here are short.
    return min(tuple(s[i:]) + tuple(s[:i]) for i in range(n))


def _sort_key(letters: tuple[int, ...]) -> tuple:
    # length first so shorter representatives always win
    return (len(letters), tuple((abs(x), x < 0) for x in letters))


class _RelatorTable:
    """Subwords of all cyclic relator conjugates, indexed for Dehn steps."""

    def __init__(self, relators: Sequence[Word]):
        cycles: list[tuple[int, ...]] = []
        for r in relators:
            r = cyclic_reduce(r).letters
            for v in (r, tuple(-x for x in reversed(r))):
                for i in range(len(v)):
                    cycles.append(v[i:] + v[:i])
        self.cycles = sorted(set(cycles))
        self.lengths = sorted({len(c) for c in self.cycles})
        # subword -> complement inverse (replacement); keyed by length class
        self.long: dict[tuple[int, ...], tuple[int, ...]] = {}
        self.half: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
        for c in self.cycles:
            n = len(c)
            for k in range(1, n + 1):
                sub, rest = c[:k], c[k:]
                repl = tuple(-x for x in reversed(rest))
                if 2 * k > n:
                    prev = self.long.get(sub)
                    if prev is None or _sort_key(repl) < _sort_key(prev):
                        self.long[sub] = repl
                elif 2 * k == n:
                    self.half.setdefault(sub, set()).add(repl)
        self.max_len = max(self.lengths) if self.lengths else 0


_TABLES: dict[tuple[Word, ...], _RelatorTable] = {}


def _table(p: Presentation) -> _RelatorTable:
    t = _TABLES.get(p.relators)
    if t is None:
        t = _TABLES[p.relators] = _RelatorTable(p.relators)
    return t


def _dehn_cyclic(letters: tuple[int, ...], table: _RelatorTable) -> tuple[int, ...]:
    """Cyclic Dehn reduction: strip more-than-half relator pieces until none remain."""
    w = cyclic_reduce(letters).letters
    changed = True
    while changed and w:
        changed = False
        n = len(w)
        for k in range(min(n, table.max_len), 0, -1):
            for i in range(n):
                sub = tuple(w[(i + j) % n] for j in range(k))
                repl = table.long.get(sub)
                if repl is None:
                    continue
                rest = tuple(w[(i + k + j) % n] for j in range(n - k))
                w = cyclic_reduce(repl + rest).letters
                changed = True
                break
            if changed:
                break
    return w


def _half_swaps(w: tuple[int, ...], table: _RelatorTable) -> list[tuple[int, ...]]:
    out = []
    n = len(w)
    for k in set(len(s) for s in table.half):
        if k > n:
            continue
        for i in range(n):
            sub = tuple(w[(i + j) % n] for j in range(k))
            for repl in table.half.get(sub, ()):
                rest = tuple(w[(i + k + j) % n] for j in range(n - k))
                out.append(repl + rest)
    return out


def conjugacy_key(w: Word | Sequence[int], presentation: Presentation, max_states: int = 20000) -> tuple[int, ...]:
    """Canonical label of the conjugacy class of ``w``.

    Dehn reduction of the cyclic word, then closure under half-relator swaps
    (which preserve length), then the least rotation over the closure.
    """
    table = _table(presentation)
    start = _dehn_cyclic(tuple(w), table)
    if not start:
        raise IdentityWordError("word is trivial in the group")
    best_len = len(start)
    seen = {_min_rotation(start)}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in _half_swaps(cur, table):
            red = _dehn_cyclic(nxt, table)
            if not red:
                raise IdentityWordError("word is trivial in the group")
            if len(red) < best_len:
                # found a shorter representative: restart the closure from it
                best_len = len(red)
                seen = {_min_rotation(red)}
                queue = deque([red])
                break
            if len(red) > best_len:
                continue
            key = _min_rotation(red)
            if key not in seen:
                seen.add(key)
                queue.append(red)
                if len(seen) > max_states:
                    raise RuntimeError("conjugacy closure exceeded its state budget")
    return min(seen, key=_sort_key)


def primitive_root(letters: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Split a cyclic word as ``root ** period`` with the shortest root."""
    s = tuple(letters)
    n = len(s)
    for d in range(1, n + 1):
        if n % d == 0 and s[:d] * (n // d) == s:
            return s[:d], n // d
    return s, 1


# ----------------------------------------------------------------------------
# permutations
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{0..n-1}`` (displayed 1-based)."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        imgs = tuple(int(x) for x in self.images)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError("not a permutation")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, images: Sequence[int]) -> Permutation:
        return cls(tuple(x - 1 for x in images))

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]]) -> Permutation:
        """Build from 1-based cycles, e.g. ``from_cycles(3, [(1, 2)])``."""
        imgs = list(range(n))
        for c in cycles:
            for i, x in enumerate(c):
                imgs[x - 1] = c[(i + 1) % len(c)] - 1
        return cls(tuple(imgs))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: Permutation) -> Permutation:
        # (p * q)(i) = p(q(i))
        if self.n != other.n:
            raise SizeMismatchError("permutations on different sets")
        p = self.images
        return Permutation(tuple(p[j] for j in other.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def __pow__(self, k: int) -> Permutation:
        base = self if k >= 0 else self.inverse()
        result = Permutation.identity(self.n)
        for _ in range(abs(k)):
            result = result * base
        return result

    def one_based(self) -> list[int]:
        return [x + 1 for x in self.images]

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out = []
        for i in range(self.n):
            if seen[i]:
                continue
            c = []
            j = i
            while not seen[j]:
                seen[j] = True
                c.append(j)
                j = self.images[j]
            out.append(tuple(c))
        return out

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))


def cycle_type(p: Permutation) -> list[int]:
    return sorted((len(c) for c in p.cycles()), reverse=True)


def fixed_points(p: Permutation) -> int:
    return sum(1 for i, j in enumerate(p.images) if i == j)


def evaluate_hom(hom: Sequence[Permutation], w: Word | Sequence[int]) -> Permutation:
    """Image of ``w``: letters compose left to right, inverses for negative letters."""
    if not hom:
        raise SizeMismatchError("empty homomorphism")
    n = hom[0].n
    if any(p.n != n for p in hom):
        raise SizeMismatchError("permutations on different sets")
    invs: dict[int, Permutation] = {}
    result = list(range(n))
    for x in w:
        i = abs(x) - 1
        if i >= len(hom):
            raise SizeMismatchError(f"letter {x} has no image")
        if x > 0:
            p = hom[i].images
        else:
            if i not in invs:
                invs[i] = hom[i].inverse()
            p = invs[i].images
        result = [result[j] for j in p]
    return Permutation(tuple(result))


# ----------------------------------------------------------------------------
# Schreier graph
# ----------------------------------------------------------------------------


def schreier_graph(hom: Sequence[Permutation]) -> nx.MultiGraph:
    n = hom[0].n
    g = nx.MultiGraph()
    g.add_nodes_from(range(n))
    for k, p in enumerate(hom):
        for i, j in enumerate(p.images):
            g.add_edge(i, j, generator=k)
    return g


def orbits(hom: Sequence[Permutation]) -> list[list[int]]:
    n = hom[0].n
    seen = [False] * n
    out = []
    for s in range(n):
        if seen[s]:
            continue
        orbit, queue = [], [s]
        seen[s] = True
        while queue:
            i = queue.pop()
            orbit.append(i)
            for p in hom:
                for j in (p.images[i], p.images.index(i)):
                    if not seen[j]:
                        seen[j] = True
                        queue.append(j)
        out.append(sorted(orbit))
    return out


def is_transitive(hom: Sequence[Permutation]) -> bool:
    return len(orbits(hom)) == 1


def diameter(hom: Sequence[Permutation]) -> int:
    g = nx.Graph(schreier_graph(hom))
    if not nx.is_connected(g):
        raise ValueError("Schreier graph is not connected")
    return nx.diameter(g) if g.number_of_nodes() > 1 else 0


def _adjacency(hom: Sequence[Permutation]) -> np.ndarray:
    n = hom[0].n
    a = np.zeros((n, n))
    idx = np.arange(n)
    for p in hom:
        img = np.asarray(p.images)
        np.add.at(a, (idx, img), 1.0)
        np.add.at(a, (img, idx), 1.0)
    return a


def gap_estimate(hom: Sequence[Permutation], tol: float = 1e-10, max_iter: int = 100000, seed: int = 0) -> float:
    """Second-smallest eigenvalue of the normalized Schreier-graph Laplacian.

    Diagnostic only: power iteration on ``(I + A/deg)/2`` restricted to the
    complement of the constant vector.  Returns ``inf`` for ``n == 1``.
    """
    n = hom[0].n
    if n == 1:
        return math.inf
    a = _adjacency(hom)
    deg = 2.0 * len(hom)  # every vertex has degree 2 per generator
    m = 0.5 * (np.eye(n) + a / deg)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v -= v.mean()
    v /= np.linalg.norm(v)
    mu = 0.0
    for _ in range(max_iter):
        u = m @ v
        u -= u.mean()
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 1.0 * 2.0  # m vanishes on the complement: eigenvalue of L is 2
        u /= norm
        mu_new = float(u @ m @ u)
        if abs(mu_new - mu) < tol and abs(abs(u @ v) - 1.0) < 1e-8:
            mu = mu_new
            break
        v, mu = u, mu_new
    return 2.0 * (1.0 - mu)
