"""Truncated length spectra and the counting quantities built on them.

All counts are over oriented classes: an unoriented primitive geodesic is
stored once with ``oriented_multiplicity == 2`` and contributes twice.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, TextIO

import numpy as np

from .errors import CutoffExceededError, DomainError
from .field import QSqrt2
from .group import Word

L0 = 2.0 * math.asinh(1.0)
FORMAT_VERSION = 1
# lengths are floats; k*l <= L is decided with this relative slack
_REL_SLACK = 1e-12


class EmptySpectrumError(DomainError):
    pass


def max_iterate(length: float, L: float) -> int:
    """Largest m with m*length <= L (0 if none)."""
    if L <= 0:
        return 0
    return int(math.floor(L / length * (1 + _REL_SLACK)))


def length_from_trace(tr) -> float:
    """Translation length 2 arccosh(|tr|/2) of a hyperbolic element."""
    x = abs(float(tr))
    if isinstance(tr, QSqrt2):
        hyperbolic = abs(tr) > 2
    else:
        hyperbolic = x > 2.0
    if not hyperbolic:
        raise DomainError(f"trace {tr} is not hyperbolic")
    return 2.0 * math.acosh(x / 2.0)


@dataclass(frozen=True)
class PrimitiveClass:
    """One unoriented primitive closed geodesic (or an oriented class if multiplicity 1)."""

    word: Word
    trace: object  # QSqrt2 in exact mode, float otherwise
    length: float
    oriented_multiplicity: int = 2

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise DomainError("length must be positive")
        if abs(float(self.trace)) <= 2.0:
            raise DomainError("trace must be hyperbolic")
        if self.oriented_multiplicity < 1:
            raise DomainError("multiplicity must be >= 1")


def _class_order(c: PrimitiveClass):
    return (c.length, len(c.word), str(c.word))


@dataclass(frozen=True)
class LengthSpectrum:
    classes: tuple[PrimitiveClass, ...]
    cutoff_L: float
    volume: float
    genus: int | None = None
    base_name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.volume > 0:
            raise DomainError("volume must be positive")
        cls = tuple(sorted(self.classes, key=_class_order))
        if cls and cls[-1].length > self.cutoff_L * (1 + _REL_SLACK):
            raise DomainError("class longer than the cutoff")
        object.__setattr__(self, "classes", cls)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[PrimitiveClass]:
        return iter(self.classes)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([c.length for c in self.classes], dtype=float)

    @cached_property
    def multiplicities(self) -> np.ndarray:
        return np.array([c.oriented_multiplicity for c in self.classes], dtype=np.int64)

    def require(self, L: float) -> None:
        if L > self.cutoff_L * (1 + _REL_SLACK):
            raise CutoffExceededError(f"L={L} exceeds spectrum cutoff {self.cutoff_L}")

    def truncate(self, L: float) -> LengthSpectrum:
        self.require(L)
        keep = tuple(c for c in self.classes if c.length <= L * (1 + _REL_SLACK))
        return LengthSpectrum(keep, L, self.volume, self.genus, self.base_name, dict(self.meta))

    def oriented_count(self) -> int:
        return int(self.multiplicities.sum())


def count_with_iterates(s: LengthSpectrum, L: float) -> int:
    """N(L): oriented pairs (gamma, m) with m*l(gamma) <= L."""
    s.require(L)
    return sum(c.oriented_multiplicity * max_iterate(c.length, L) for c in s.classes if c.length <= L * (1 + _REL_SLACK))


def count_primitive(s: LengthSpectrum, L: float) -> int:
    s.require(L)
    return sum(c.oriented_multiplicity for c in s.classes if c.length <= L * (1 + _REL_SLACK))


def systole(s: LengthSpectrum) -> float:
    if not s.classes:
        raise EmptySpectrumError("spectrum has no classes")
    return s.classes[0].length


def reciprocal_sum(s: LengthSpectrum, L: float) -> float:
    s.require(L)
    return math.fsum(c.oriented_multiplicity / c.length for c in s.classes if c.length <= L * (1 + _REL_SLACK))


def buser_constant(s: LengthSpectrum) -> float:
    """Coefficient (2/L0) N(L0) of the linear term of the counting bound."""
    return 2.0 / L0 * count_with_iterates(s, L0)


def buser_bound(genus: int, T: float, s: LengthSpectrum) -> float:
    """Explicit upper bound (g-1) e^{T+6} + (2/L0) N(L0) T for N(T)."""
    if genus < 2:
        raise DomainError("genus must be >= 2")
    if T < 0:
        raise DomainError("T must be >= 0")
    return (genus - 1) * math.exp(T + 6.0) + buser_constant(s) * T


@dataclass(frozen=True)
class HypothesisReport:
    h1_holds: bool
    h2_holds: bool
    n_of_L: int
    systole: float


def check_H1(gap: float, eta: float) -> bool:
    if not eta > 0:
        raise DomainError("eta must be positive")
    return gap >= eta


def check_H2(s: LengthSpectrum, C: float, L: float, alpha: float) -> bool:
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    return count_with_iterates(s, L) <= C * s.volume**alpha


def hypothesis_report(s: LengthSpectrum, gap: float, eta: float, C: float, L: float, alpha: float) -> HypothesisReport:
    return HypothesisReport(
        h1_holds=check_H1(gap, eta),
        h2_holds=check_H2(s, C, L, alpha),
        n_of_L=count_with_iterates(s, L),
        systole=systole(s) if s.classes else math.inf,
    )


def counting_rows(s: LengthSpectrum, Ls: Iterable[float]) -> list[tuple[float, int, int, float]]:
    """Rows (L, N, N0, systole) for CSV export."""
    sys_ = systole(s) if s.classes else math.inf
    return [(L, count_with_iterates(s, L), count_primitive(s, L), sys_) for L in Ls]


# ----------------------------------------------------------------------------
# text format
# ----------------------------------------------------------------------------


def _trace_fields(tr) -> tuple[str, str]:
    if isinstance(tr, QSqrt2):
        return str(tr.p), str(tr.q)
    return repr(float(tr)), "0"


def write_spectrum(s: LengthSpectrum, fh: TextIO) -> None:
    exact = all(isinstance(c.trace, QSqrt2) for c in s.classes)
    fh.write(f"# hypdet-spectrum v{FORMAT_VERSION}\n")
    fh.write(f"base={s.base_name}\n")
    fh.write(f"L={s.cutoff_L!r}\n")
    fh.write(f"volume={s.volume!r}\n")
    fh.write(f"genus={'' if s.genus is None else s.genus}\n")
    fh.write(f"exact={'1' if exact else '0'}\n")
    fh.write("word;trace_p;trace_q;length;oriented_multiplicity\n")
    for c in s.classes:
        p, q = _trace_fields(c.trace)
        fh.write(f"{c.word};{p};{q};{c.length!r};{c.oriented_multiplicity}\n")


def dumps_spectrum(s: LengthSpectrum) -> str:
    buf = io.StringIO()
    write_spectrum(s, buf)
    return buf.getvalue()


def read_spectrum(fh: TextIO) -> LengthSpectrum:
    first = fh.readline().strip()
    if first != f"# hypdet-spectrum v{FORMAT_VERSION}":
        raise DomainError(f"unsupported spectrum header {first!r}")
    header: dict[str, str] = {}
    for line in fh:
        line = line.strip()
        if line.startswith("word;"):
            break
        key, _, value = line.partition("=")
        header[key] = value
    else:
        raise DomainError("spectrum file has no class table")
    exact = header.get("exact", "1") == "1"
    classes = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        try:
            word, p, q, length, mult = line.split(";")
            trace = QSqrt2(p, q) if exact else float(p)
            classes.append(PrimitiveClass(Word.parse(word), trace, float(length), int(mult)))
        except ValueError as exc:
            raise DomainError(f"malformed spectrum row {line!r}: {exc}") from None
    genus = header.get("genus", "")
    try:
        return LengthSpectrum(
            tuple(classes),
            float(header["L"]),
            float(header["volume"]),
            int(genus) if genus else None,
            header.get("base", ""),
        )
    except (KeyError, ValueError) as exc:
        raise DomainError(f"malformed spectrum header: {exc}") from None


def loads_spectrum(text: str) -> LengthSpectrum:
    return read_spectrum(io.StringIO(text))


def save_spectrum(s: LengthSpectrum, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_spectrum(s, fh)


def load_spectrum(path) -> LengthSpectrum:
    with open(path, encoding="utf-8") as fh:
        return read_spectrum(fh)
