"""Catalog Fuchsian groups and complete enumeration of primitive closed geodesics.

The Bolza group is realized exactly inside the quaternion algebra
``(a, b)`` over Q(sqrt 2) with ``a = b = 2 + 2 sqrt 2``.  An element
``x0 + x1 i + x2 j + x3 k`` acts on the disc through the SU(1,1) matrix

    [[x0 - i beta^2 x3,  beta (x1 + i x2)],
     [beta (x1 - i x2),  x0 + i beta^2 x3]],   beta^2 = a,

so its trace ``2 x0`` and reduced norm are exact in Q(sqrt 2).  Coordinates are
stored doubled, ``2 x = P + Q sqrt 2`` with integer ``P, Q``.

Completeness of the enumeration: the Dirichlet domain at the origin is the
regular octagon with circumradius ``R_F``.  Every closed geodesic of length
``l`` has a lift whose axis meets the octagon, and that lift moves the origin
by at most ``D`` with ``sinh(D/2) = cosh(R_F) sinh(l/2)``.  Because the
octagon's face pairings satisfy greedy descent (any point outside the domain is
strictly closer to some translate ``s.o``), the group elements with
displacement ``<= D`` form a connected set in the Cayley graph of the face
pairings, so a breadth-first search restricted to that ball finds all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceLimitError
from .field import QSqrt2, chebyshev_traces
from .group import Presentation, Word, _dehn_cyclic, _table, cyclic_reduce, surface_presentation
from .spectrum import LengthSpectrum, PrimitiveClass, length_from_trace

SQRT2 = math.sqrt(2.0)



class UnknownCatalogError(DomainError):
    pass


# ----------------------------------------------------------------------------
# Z[sqrt 2] helpers on integer arrays (pairs P, Q meaning P + Q sqrt 2)
# ----------------------------------------------------------------------------


def _zmul(p1, q1, p2, q2):
    return p1 * p2 + 2 * q1 * q2, p1 * q2 + q1 * p2


def _halve(p, q):
    if ((p | q) & 1).any():
        raise ArithmeticError("coordinate left the lattice (1/2)Z[sqrt 2]")
    return p >> 1, q >> 1


# algebra constants as elements of Z[sqrt 2]
_A = (2, 2)
_B = (2, 2)
_AB = _zmul(*_A, *_B)


def _quat_mul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Product of doubled-coordinate quaternions, rows ``[P0,Q0,...,P3,Q3]``."""
    xp = [X[..., 2 * i] for i in range(4)]
    xq = [X[..., 2 * i + 1] for i in range(4)]
    yp = [Y[..., 2 * i] for i in range(4)]
    yq = [Y[..., 2 * i + 1] for i in range(4)]

    def m(i, j):
        return _zmul(xp[i], xq[i], yp[j], yq[j])

    def c(const, v):
        return _zmul(const[0], const[1], v[0], v[1])

    def add(*terms):
        p = sum(t[0] for t in terms)
        q = sum(t[1] for t in terms)
        return p, q

    def neg(v):
        return -v[0], -v[1]

    z0 = add(m(0, 0), c(_A, m(1, 1)), c(_B, m(2, 2)), neg(c(_AB, m(3, 3))))
    z1 = add(m(0, 1), m(1, 0), neg(c(_B, m(2, 3))), c(_B, m(3, 2)))
    z2 = add(m(0, 2), m(2, 0), c(_A, m(1, 3)), neg(c(_A, m(3, 1))))
    z3 = add(m(0, 3), m(3, 0), m(1, 2), neg(m(2, 1)))
    out = np.empty(np.broadcast_shapes(X.shape, Y.shape), dtype=np.int64)
    for i, z in enumerate((z0, z1, z2, z3)):
        p, q = _halve(*z)
        out[..., 2 * i] = p
        out[..., 2 * i + 1] = q
    return out


def _quat_conj(X: np.ndarray) -> np.ndarray:
    out = X.copy()
    out[..., 2:] *= -1
    return out


def _to_float(p, q):
    return (np.asarray(p, dtype=float) + SQRT2 * np.asarray(q, dtype=float)) / 2.0


_AB_FLOAT = _AB[0] + SQRT2 * _AB[1]
_BETA = math.sqrt(_A[0] + SQRT2 * _A[1])


def _exact_cosh_disp(X: np.ndarray) -> np.ndarray:
    x0 = _to_float(X[..., 0], X[..., 1])
    x3 = _to_float(X[..., 6], X[..., 7])
    return 2.0 * (x0 * x0 + _AB_FLOAT * x3 * x3) - 1.0


# ----------------------------------------------------------------------------
# matrix element types
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMat2:
    """Exact element of the Bolza quaternion order; behaves as a 2x2 matrix."""

    coords: tuple[int, ...]  # doubled coordinates P0,Q0,...,P3,Q3

    @classmethod
    def from_array(cls, a) -> ExactMat2:
        return cls(tuple(int(v) for v in a))

    @classmethod
    def identity(cls) -> ExactMat2:
        return cls((2, 0, 0, 0, 0, 0, 0, 0))

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def __matmul__(self, other: ExactMat2) -> ExactMat2:
        return ExactMat2.from_array(_quat_mul(self.array(), other.array()))

    def inverse(self) -> ExactMat2:
        # reduced norm is 1, so the inverse is the conjugate
        return ExactMat2.from_array(_quat_conj(self.array()))

    def coordinate(self, i: int) -> QSqrt2:
        return QSqrt2(self.coords[2 * i], self.coords[2 * i + 1]) / 2

    def trace(self) -> QSqrt2:
        return QSqrt2(self.coords[0], self.coords[1])

    def det(self) -> QSqrt2:
        x = [self.coordinate(i) for i in range(4)]
        a, b = QSqrt2(*_A), QSqrt2(*_B)
        return x[0] * x[0] - a * x[1] * x[1] - b * x[2] * x[2] + a * b * x[3] * x[3]

    def is_identity(self, up_to_sign: bool = False) -> bool:
        c = self.coords
        if any(c[2:]) or c[1] != 0:
            return False
        return c[0] == 2 or (up_to_sign and c[0] == -2)

    def matrix(self) -> np.ndarray:
        x = [float(self.coordinate(i)) for i in range(4)]
        b2 = _BETA * _BETA
        return np.array([
            [x[0] - 1j * b2 * x[3], _BETA * (x[1] + 1j * x[2])],
            [_BETA * (x[1] - 1j * x[2]), x[0] + 1j * b2 * x[3]],
        ])

    def cosh_displacement(self) -> float:
        return float(_exact_cosh_disp(self.array()))


@dataclass(frozen=True)
class FloatMat2:
    """SU(1,1) matrix ``[[A, B], [conj B, conj A]]`` in floating point."""

    A: complex
    B: complex

    @classmethod
    def identity(cls) -> FloatMat2:
        return cls(1.0 + 0j, 0j)

    def __matmul__(self, other: FloatMat2) -> FloatMat2:
        return FloatMat2(
            self.A * other.A + self.B * other.B.conjugate(),
            self.A * other.B + self.B * other.A.conjugate(),
        )

    def inverse(self) -> FloatMat2:
        return FloatMat2(self.A.conjugate(), -self.B)

    def trace(self) -> float:
        return 2.0 * self.A.real

    def det(self) -> float:
        return abs(self.A) ** 2 - abs(self.B) ** 2

    def is_identity(self, up_to_sign: bool = False, tol: float = 1e-9) -> bool:
        if abs(self.B) > tol or abs(self.A.imag) > tol:
            return False
        return abs(self.A.real - 1) < tol or (up_to_sign and abs(self.A.real + 1) < tol)

    def matrix(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.B.conjugate(), self.A.conjugate()]])

    def cosh_displacement(self) -> float:
        return 2.0 * abs(self.A) ** 2 - 1.0


def evaluate_word(gens: Sequence, w: Word | Sequence[int]):
    """Product of generator matrices along ``w`` (left to right)."""
    result = type(gens[0]).identity()
    for x in w:
        g = gens[abs(x) - 1]
        result = result @ (g if x > 0 else g.inverse())
    return result


# ----------------------------------------------------------------------------
# base surfaces
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseSurface:
    name: str
    presentation: Presentation
    generators: tuple  # images of the presentation generators
    volume: float
    pairing_words: tuple[Word, ...]  # Dirichlet face pairings, as words
    cosh_covering_radius: float
    exact: bool
    certified_gap: float | None = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def genus(self) -> int:
        g = self.presentation.genus
        if g is None:
            raise DomainError("not a standard surface presentation")
        return g

    def pairings(self) -> list:
        return [evaluate_word(self.generators, w) for w in self.pairing_words]

    def relator_image(self):
        return evaluate_word(self.generators, self.presentation.relators[0])


# The octagon pairings g_k = alpha + beta-rotated imaginary parts, doubled coords.
_OCTAGON_PAIRINGS = (
    (2, 2, 2, 0, 0, 0, 0, 0),   # alpha + i
    (2, 2, 0, 1, 0, 1, 0, 0),   # alpha + (sqrt2/2)(i + j)
    (2, 2, 0, 0, 2, 0, 0, 0),   # alpha + j
    (2, 2, 0, -1, 0, 1, 0, 0),  # alpha + (sqrt2/2)(-i + j)
)


def _bolza_generators(kind: str):
    g = [ExactMat2(c) for c in _OCTAGON_PAIRINGS]
    inv = [x.inverse() for x in g]
    # commutator form: a1 = g2, b1 = g3^-1, a2 = g3^-1 g2 g1^-1, b2 = g1 g0^-1
    gens = (g[2], inv[3], inv[3] @ g[2] @ inv[1], g[1] @ inv[0])
    if kind == "float":
        gens = tuple(_exact_to_float(x) for x in gens)
    return gens


def _exact_to_float(x: ExactMat2) -> FloatMat2:
    m = x.matrix()
    return FloatMat2(complex(m[0, 0]), complex(m[0, 1]))


# face pairings rewritten in the commutator generators
_BOLZA_PAIRING_WORDS = tuple(Word.parse(s) for s in ("B2A2b1a1", "A2b1a1", "a1", "B1"))
_BOLZA_COSH_RF = 3.0 + 2.0 * SQRT2
BOLZA_SYSTOLE_TRACE = QSqrt2(2, 2)


def _verify(base: BaseSurface) -> None:
    rel = base.relator_image()
    if not rel.is_identity(up_to_sign=True):
        raise AssertionError(f"{base.name}: relator does not map to +-identity")
    for i, g in enumerate(base.generators):
        if abs(float(g.trace())) <= 2.0:
            raise AssertionError(f"{base.name}: generator {i + 1} is not hyperbolic")
        if base.exact and g.det() != 1:
            raise AssertionError(f"{base.name}: generator {i + 1} has determinant != 1")
    if base.exact:
        expected = [ExactMat2(c) for c in _OCTAGON_PAIRINGS]
        if base.pairings() != expected:
            raise AssertionError(f"{base.name}: pairing words do not reproduce the octagon")


@lru_cache(maxsize=None)
def catalog(name: str) -> BaseSurface:
    """A verified catalog surface: ``"bolza"`` (exact) or ``"demo-float"``."""
    if name not in ("bolza", "demo-float"):
        raise UnknownCatalogError(f"unknown catalog surface {name!r}")
    exact = name == "bolza"
    base = BaseSurface(
        name=name,
        presentation=surface_presentation(2),
        generators=_bolza_generators("exact" if exact else "float"),
        volume=4.0 * math.pi,
        pairing_words=_BOLZA_PAIRING_WORDS,
        cosh_covering_radius=_BOLZA_COSH_RF,
        exact=exact,
    )
    _verify(base)
    if exact:
        short = enumerate_primitives(base, 3.1)
        if not short.classes or any(c.trace != BOLZA_SYSTOLE_TRACE for c in short.classes):
            raise AssertionError("bolza: systole check failed")
    return base


# ----------------------------------------------------------------------------
# ball search
# ----------------------------------------------------------------------------


class _ExactBackend:
    def __init__(self, pairings: Sequence[ExactMat2]):
        self.gens = np.array([p.array() for p in pairings], dtype=np.int64)

    def identity(self) -> np.ndarray:
        return ExactMat2.identity().array()[None, :]

    def mul(self, X: np.ndarray, k: int) -> np.ndarray:
        return _quat_mul(X, self.gens[k][None, :])

    def lmul(self, k: int, X: np.ndarray) -> np.ndarray:
        return _quat_mul(self.gens[k][None, :], X)

    def conj_all(self, X: np.ndarray) -> np.ndarray:
        """s_k^{-1} X s_k for every step k, stacked step-major."""
        inv = self.gens[np.arange(len(self.gens)) ^ 1]
        Y = _quat_mul(inv[:, None, :], _quat_mul(X[None, :, :], self.gens[:, None, :]))
        return Y.reshape(-1, X.shape[-1])

    def power(self, row: np.ndarray, k: int) -> np.ndarray:
        out = row[None, :]
        for _ in range(k - 1):
            out = _quat_mul(out, row[None, :])
        return out[0]

    def label(self, row) -> tuple:
        return tuple(int(v) for v in row)

    def cosh_disp(self, X):
        return _exact_cosh_disp(X)

    def keys(self, X) -> list[bytes]:
        return [row.tobytes() for row in X]

    def trace_key(self, row):
        return (int(row[0]), int(row[1]))

    def trace(self, row) -> QSqrt2:
        return QSqrt2(int(row[0]), int(row[1]))

    def trace_float(self, X):
        return 2.0 * _to_float(X[..., 0], X[..., 1])


class _FloatBackend:
    def __init__(self, pairings: Sequence[FloatMat2], digits: int = 7):
        self.gens = np.array([[p.A, p.B] for p in pairings], dtype=complex)
        self.digits = digits

    def identity(self):
        return np.array([[1.0 + 0j, 0j]])

    @staticmethod
    def _mul(A1, B1, A2, B2):
        return np.stack([A1 * A2 + B1 * np.conj(B2), A1 * B2 + B1 * np.conj(A2)], axis=-1)

    def mul(self, X, k):
        A2, B2 = self.gens[k]
        return self._mul(X[:, 0], X[:, 1], A2, B2)

    def lmul(self, k, X):
        A1, B1 = self.gens[k]
        return self._mul(A1, B1, X[:, 0], X[:, 1])

    def conj_all(self, X):
        n = len(self.gens)
        return np.concatenate([self.lmul(k ^ 1, self.mul(X, k)) for k in range(n)])

    def power(self, row, k):
        out = row
        for _ in range(k - 1):
            out = self._mul(out[0], out[1], row[0], row[1])
        return out

    def label(self, row) -> tuple:
        r = np.round(np.concatenate([row.real, row.imag]) * 10**self.digits).astype(np.int64)
        return tuple(int(v) for v in r)

    def cosh_disp(self, X):
        return 2.0 * np.abs(X[:, 0]) ** 2 - 1.0

    def keys(self, X):
        r = np.round(np.concatenate([X.real, X.imag], axis=1) * 10**self.digits).astype(np.int64)
        r[r == 0] = 0
        return [row.tobytes() for row in r]

    def trace_key(self, row):
        return round(2.0 * row[0].real, self.digits)

    def trace(self, row) -> float:
        return 2.0 * row[0].real

    def trace_float(self, X):
        return 2.0 * X[:, 0].real


def ball_radius(base: BaseSurface, L: float) -> float:
    """Displacement radius containing a lift of every closed geodesic of length <= L."""
    return 2.0 * math.asinh(base.cosh_covering_radius * math.sinh(L / 2.0))


def default_node_budget(base: BaseSurface, L: float) -> int:
    # area of the ball over the area of the fundamental domain, with margin
    D = ball_radius(base, L)
    return int(8 * (math.cosh(D) - 1.0) * 2 * math.pi / base.volume) + 10_000


@dataclass
class _Ball:
    elements: np.ndarray
    parent: np.ndarray
    letter: np.ndarray  # index into the step list, -1 at the root
    backend: object
    step_letters: list[int]  # signed pairing index of each step

    def word(self, i: int) -> list[int]:
        out = []
        while self.parent[i] >= 0:
            out.append(self.step_letters[int(self.letter[i])])
            i = int(self.parent[i])
        return out[::-1]


def _steps(base: BaseSurface):
    steps, letters = [], []
    for k, p in enumerate(base.pairings()):
        steps += [p, p.inverse()]
        letters += [k + 1, -(k + 1)]
    return steps, letters


def _ball_search(base: BaseSurface, D: float, node_budget: int) -> _Ball:
    steps, step_letters = _steps(base)
    backend = (_ExactBackend if base.exact else _FloatBackend)(steps)
    limit = math.cosh(D) * (1 + 1e-9) + 1e-9

    start = backend.identity()
    seen = {backend.keys(start)[0]}
    chunks, parents, letters = [start], [np.array([-1])], [np.array([-1])]
    frontier, frontier_idx = start, np.array([0])
    total = 1
    while len(frontier):
        new_rows, new_par, new_let = [], [], []
        for k in range(len(steps)):
            Y = backend.mul(frontier, k)
            ok = backend.cosh_disp(Y) <= limit
            if not ok.any():
                continue
            Y = Y[ok]
            for row, key, pi in zip(Y, backend.keys(Y), frontier_idx[ok]):
                if key in seen:
                    continue
                seen.add(key)
                new_rows.append(row)
                new_par.append(pi)
                new_let.append(k)
        if not new_rows:
            break
        block = np.stack(new_rows)
        idx = np.arange(total, total + len(block))
        total += len(block)
        if total > node_budget:
            raise ResourceLimitError(f"ball search exceeded node budget {node_budget}")
        chunks.append(block)
        parents.append(np.array(new_par))
        letters.append(np.array(new_let))
        frontier, frontier_idx = block, idx
    return _Ball(np.concatenate(chunks), np.concatenate(parents), np.concatenate(letters), backend, step_letters)


def _axis_ratio(backend, X: np.ndarray, ell: float) -> np.ndarray:
    """cosh of the distance from the origin to the axis of each element."""
    cd = np.maximum(backend.cosh_disp(X), 1.0)
    return np.sqrt((cd - 1.0) / 2.0) / math.sinh(ell / 2.0)


@dataclass
class _ClassData:
    label: tuple
    row: np.ndarray
    letters: list[int]  # pairing letters of the canonical representative
    members: list  # ball keys of every representative met
    inverse_label: tuple
    inverse_members: list


# Representatives whose axis passes within R_F of the origin form a finite set
# determined by the class.  Conjugating by single face pairings connects them
# inside the wider set with axis distance <= 2 R_F + margin (tiles along any
# segment from such an orbit point to the axis stay within that distance), so
# a flood fill from any one of them reaches all, and the least exact
# coordinate tuple among them is a canonical label.
_FILL_MARGIN = 0.5


def _conjugacy_class(ball: _Ball, row: np.ndarray, letters: list[int], ell: float, cosh_rf: float) -> _ClassData:
    backend = ball.backend
    near = cosh_rf * (1 + 1e-9)
    far = math.cosh(2.0 * math.acosh(cosh_rf) + _FILL_MARGIN)
    start = row[None, :]
    seen = {backend.keys(start)[0]}
    blocks = [start]
    parent = [np.array([-1])]
    via = [np.array([-1])]
    frontier = start
    offset, total = 0, 1
    n_steps = len(ball.step_letters)
    while len(frontier):
        # s_k^{-1} X s_k for every step k; the inverse of step k is step k ^ 1
        Y = backend.conj_all(frontier)
        src = np.tile(np.arange(offset, offset + len(frontier)), n_steps)
        stp = np.repeat(np.arange(n_steps), len(frontier))
        ok = _axis_ratio(backend, Y, ell) <= far
        Y, src, stp = Y[ok], src[ok], stp[ok]
        keep = []
        for j, key in enumerate(backend.keys(Y)):
            if key not in seen:
                seen.add(key)
                keep.append(j)
        offset = total
        frontier = Y[keep]
        total += len(keep)
        blocks.append(frontier)
        parent.append(src[keep])
        via.append(stp[keep])
    rows = np.concatenate(blocks)
    parent = np.concatenate(parent)
    via = np.concatenate(via)
    inv_rows = np.stack([_inverse_row(backend, r) for r in rows])
    near_idx = np.nonzero(_axis_ratio(backend, rows, ell) <= near)[0]
    if not len(near_idx):
        raise AssertionError("class has no representative near the origin")
    lab, i = min((backend.label(rows[j]), j) for j in near_idx)
    inv_lab = min(backend.label(inv_rows[j]) for j in near_idx)

    conj = []  # conjugator letters from the start to state i
    j = i
    while parent[j] >= 0:
        conj.append(ball.step_letters[int(via[j])])
        j = int(parent[j])
    conj.reverse()
    word = [-s for s in reversed(conj)] + list(letters) + conj
    members = backend.keys(rows)
    return _ClassData(lab, rows[i], word, members, inv_lab, backend.keys(inv_rows))


def _to_presentation_word(base: BaseSurface, pairing_letters: Sequence[int]) -> Word:
    out: list[int] = []
    for x in pairing_letters:
        w = base.pairing_words[abs(x) - 1]
        out.extend(w.letters if x > 0 else w.inverse().letters)
    return Word(tuple(out))


def _short_representative(base: BaseSurface, pairing_letters: Sequence[int]) -> Word:
    w = cyclic_reduce(_to_presentation_word(base, pairing_letters))
    if base.presentation.genus is not None:
        # Dehn reduction keeps the conjugacy class and only shortens
        w = Word(_dehn_cyclic(w.letters, _table(base.presentation)))
    return w


def enumerate_primitives(base: BaseSurface, L: float, node_budget: int | None = None) -> LengthSpectrum:
    """All primitive closed geodesics of length <= L, one entry per unoriented class."""
    if L < 0:
        raise DomainError("L must be >= 0")
    volume = base.volume
    genus = base.presentation.genus
    if L == 0:
        return LengthSpectrum((), 0.0, volume, genus, base.name)
    D = ball_radius(base, L)
    budget = node_budget if node_budget is not None else default_node_budget(base, L)
    ball = _ball_search(base, D, budget)
    backend = ball.backend

    tr = np.abs(backend.trace_float(ball.elements))
    lengths = np.full(len(ball.elements), np.inf)
    hyper = tr > 2.0 + 1e-12
    lengths[hyper] = 2.0 * np.arccosh(tr[hyper] / 2.0)
    cand = np.nonzero(lengths <= L * (1 + 1e-12))[0]
    ratio = np.array([_axis_ratio(backend, ball.elements[i : i + 1], lengths[i])[0] for i in cand])
    cand = cand[ratio <= base.cosh_covering_radius * (1 + 1e-9)]
    order = sorted(cand, key=lambda i: (lengths[i], int(i)))

    covered: set = set()
    found = []  # (length, class data, |trace|), inverse classes folded in
    keys = backend.keys(ball.elements[order]) if order else []
    for i, key in zip(order, keys):
        if key in covered:
            continue
        ell = float(lengths[i])
        row = ball.elements[i]
        cls = _conjugacy_class(ball, row, ball.word(int(i)), ell, base.cosh_covering_radius)
        if cls.inverse_label == cls.label:
            raise AssertionError("element conjugate to its inverse in a torsion-free group")
        covered.update(cls.members)
        covered.update(cls.inverse_members)
        found.append((ell, cls, abs(backend.trace(row))))

    classes = []
    for ell, cls, trace in found:
        if _is_proper_power(ball, cls, ell, trace, found, base):
            continue
        word = _short_representative(base, cls.letters)
        classes.append(PrimitiveClass(word, trace, ell, 2))
    meta = {"ball_size": len(ball.elements), "ball_radius": D}
    return LengthSpectrum(tuple(classes), float(L), volume, genus, base.name, meta)


def _inverse_row(backend, row):
    if isinstance(backend, _ExactBackend):
        return _quat_conj(row)
    A, B = row
    return np.array([np.conj(A), -B])


def _invert_letters(letters):
    return [-x for x in reversed(letters)]


def _is_proper_power(ball, cls, ell, trace, found, base) -> bool:
    """Whether the class is a proper power of a shorter class in ``found``."""
    backend = ball.backend
    for dell, d, dtrace in found:
        if dell >= ell * (1 - 1e-12):
            break
        ratio = ell / dell
        k = round(ratio)
        if k < 2 or abs(ratio - k) > 1e-9:
            continue
        if base.exact and abs(chebyshev_traces(dtrace, k)[k]) != trace:
            continue
        p = _conjugacy_class(ball, backend.power(d.row, k), d.letters * k, ell, base.cosh_covering_radius)
        if cls.label in (p.label, p.inverse_label):
            return True
    return False


def _element_row(base: BaseSurface, g) -> np.ndarray:
    return g.array() if base.exact else np.array([g.A, g.B], dtype=complex)


def class_label(base: BaseSurface, w: Word | Sequence[int], oriented: bool = True) -> tuple:
    """Exact canonical label of the conjugacy class of a hyperbolic word.

    Two words get the same label iff they are conjugate in the group (with
    ``oriented=False``: conjugate up to inversion).
    """
    steps, step_letters = _steps(base)
    backend = (_ExactBackend if base.exact else _FloatBackend)(steps)
    g = evaluate_word(base.generators, w)
    ell = length_from_trace(g.trace())
    row = _element_row(base, g)
    rf = base.cosh_covering_radius * (1 + 1e-9)
    # conjugate until the axis passes within R_F of the origin; each step
    # strictly shrinks the axis distance (Dirichlet descent at the foot point)
    r = _axis_ratio(backend, row[None, :], ell)[0]
    while r > rf:
        Y = backend.conj_all(row[None, :])
        ratios = _axis_ratio(backend, Y, ell)
        k = int(np.argmin(ratios))
        if not ratios[k] < r:
            raise AssertionError("descent toward the fundamental domain stalled")
        row, r = Y[k], ratios[k]
    probe = _Ball(np.empty(0), np.empty(0), np.empty(0), backend, step_letters)
    cls = _conjugacy_class(probe, row, [], ell, base.cosh_covering_radius)
    return cls.label if oriented else min(cls.label, cls.inverse_label)


def systole_words(spec: LengthSpectrum) -> list[Word]:
    if not spec.classes:
        return []
    s = spec.classes[0].length
    return [c.word for c in spec.classes if abs(c.length - s) < 1e-12]
