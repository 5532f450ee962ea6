"""Truncated noncommutative power series over graded generators.

A series is a sparse map from words (tuples of generator symbols) to float
coefficients. Each generator carries a grade (its power of the step size), and
every word whose total grade exceeds the truncation order is discarded. This is
enough to expand products of exponentials of operator series and read off order
conditions in the associative word basis.

Generator symbols are plain strings:

* ``"F"``, ``"A"``, ``"B"`` have grade 1,
* ``"Y<n>"`` (``"Y2"``, ``"Y3"``, ...) has grade ``n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

MAX_ORDER = 9

Word = tuple[str, ...]


class Family(str, enum.Enum):
    SS = "SS"
    METHOD_ADJOINT = "MethodAdjoint"
    SPLITTING = "Splitting"


class Role(str, enum.Enum):
    S2 = "S2"
    BASIC_CHI = "BasicChi"
    ADJOINT_CHI = "AdjointChi"
    FLOW_A = "FlowA"
    FLOW_B = "FlowB"


FAMILY_ROLES = {
    Family.SS: {Role.S2},
    Family.METHOD_ADJOINT: {Role.BASIC_CHI, Role.ADJOINT_CHI},
    Family.SPLITTING: {Role.FLOW_A, Role.FLOW_B},
}


def symbol_grade(symbol: str) -> int:
    if symbol in ("F", "A", "B"):
        return 1
    if symbol.startswith("Y") and symbol[1:].isdigit():
        return int(symbol[1:])
    raise ValueError(f"unknown generator symbol {symbol!r}")


def word_grade(word: Word) -> int:
    return sum(symbol_grade(s) for s in word)


def word_key(word: Word) -> tuple:
    """Sort key: by grade, then lexicographically by (grade, symbol) per letter."""
    return (word_grade(word), tuple((symbol_grade(s), s) for s in word))


@dataclass(frozen=True)
class GeneratorSet:
    """The graded generators of one scheme family up to a truncation order."""

    family: Family
    entries: tuple[tuple[str, int], ...]

    @classmethod
    def for_family(cls, family: Family | str, order: int) -> GeneratorSet:
        family = Family(family)
        if family is Family.SPLITTING:
            entries = (("A", 1), ("B", 1))
        elif family is Family.SS:
            entries = (("F", 1),) + tuple((f"Y{n}", n) for n in range(3, order + 1, 2))
        else:
            entries = (("F", 1),) + tuple((f"Y{n}", n) for n in range(2, order + 1))
        return cls(family, entries)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.entries)

    def words(self, order: int, include_empty: bool = True) -> list[Word]:
        """All words of grade <= ``order``, sorted by :func:`word_key`."""
        by_grade: list[list[Word]] = [[()]] + [[] for _ in range(order)]
        for g in range(1, order + 1):
            for sym, sg in self.entries:
                if sg <= g:
                    by_grade[g].extend((sym,) + w for w in by_grade[g - sg])
        out = [w for g in range(0 if include_empty else 1, order + 1) for w in by_grade[g]]
        return sorted(out, key=word_key)


@dataclass(frozen=True)
class TruncatedSeries:
    """Element of the free associative algebra truncated above grade ``order``."""

    order: int
    terms: Mapping[Word, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"truncation order must lie in [0, {MAX_ORDER}], got {self.order}")
        clean = {}
        for w, c in self.terms.items():
            w = tuple(w)
            if c != 0 and word_grade(w) <= self.order:
                clean[w] = float(c)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def identity(cls, order: int) -> TruncatedSeries:
        return cls(order, {(): 1.0})

    @classmethod
    def zero(cls, order: int) -> TruncatedSeries:
        return cls(order, {})

    @classmethod
    def monomial(cls, order: int, word: Iterable[str] | str, coeff: float = 1.0) -> TruncatedSeries:
        if isinstance(word, str):
            word = (word,)
        return cls(order, {tuple(word): coeff})

    def coeff(self, word: Iterable[str] | str) -> float:
        if isinstance(word, str):
            word = (word,)
        return self.terms.get(tuple(word), 0.0)

    def constant(self) -> float:
        return self.terms.get((), 0.0)

    def grade_part(self, grade: int) -> dict[Word, float]:
        return {w: c for w, c in self.terms.items() if word_grade(w) == grade}

    def _check(self, other: TruncatedSeries):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.order != self.order:
            raise ValueError(f"truncation orders differ: {self.order} vs {other.order}")
        return None

    def __add__(self, other: TruncatedSeries) -> TruncatedSeries:
        return series_add(self, other)

    def __neg__(self) -> TruncatedSeries:
        return self.scale(-1.0)

    def __sub__(self, other: TruncatedSeries) -> TruncatedSeries:
        return series_add(self, -other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        return series_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        return NotImplemented

    def scale(self, factor: float) -> TruncatedSeries:
        return TruncatedSeries(self.order, {w: factor * c for w, c in self.terms.items()})

    def sorted_items(self) -> list[tuple[Word, float]]:
        return sorted(self.terms.items(), key=lambda wc: word_key(wc[0]))

    def max_abs_by_grade(self) -> list[float]:
        out = [0.0] * (self.order + 1)
        for w, c in self.terms.items():
            g = word_grade(w)
            out[g] = max(out[g], abs(c))
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return f"TruncatedSeries(order={self.order}, 0)"
        parts = [f"{c:+.6g}*{''.join(w) or 'I'}" for w, c in self.sorted_items()]
        return f"TruncatedSeries(order={self.order}, {' '.join(parts)})"


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    if a.order != b.order:
        raise ValueError(f"truncation orders differ: {a.order} vs {b.order}")
    out = dict(a.terms)
    for w, c in b.terms.items():
        out[w] = out.get(w, 0.0) + c
    return TruncatedSeries(a.order, out)


def _by_grade(s: TruncatedSeries) -> list[list[tuple[Word, float]]]:
    buckets: list[list[tuple[Word, float]]] = [[] for _ in range(s.order + 1)]
    for w, c in s.terms.items():
        buckets[word_grade(w)].append((w, c))
    return buckets


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Concatenation product, dropping words above the truncation grade."""
    if a.order != b.order:
        raise ValueError(f"truncation orders differ: {a.order} vs {b.order}")
    n = a.order
    ga, gb = _by_grade(a), _by_grade(b)
    out: dict[Word, float] = {}
    for i, ta in enumerate(ga):
        if not ta:
            continue
        for j in range(n - i + 1):
            for wa, ca in ta:
                for wb, cb in gb[j]:
                    w = wa + wb
                    out[w] = out.get(w, 0.0) + ca * cb
    return TruncatedSeries(n, out)


def series_exp(x: TruncatedSeries) -> TruncatedSeries:
    """exp(x) = sum_k x^k / k!, finite since x has no constant term."""
    if x.constant() != 0.0:
        raise ValueError("series_exp requires a zero constant term")
    result = TruncatedSeries.identity(x.order)
    power = TruncatedSeries.identity(x.order)
    for k in range(1, x.order + 1):
        power = series_mul(power, x)
        if not power.terms:
            break
        result = series_add(result, power.scale(1.0 / math.factorial(k)))
    return result


def stage_series(family: Family | str, role: Role | str, coeff: float, order: int) -> TruncatedSeries:
    """Exponent (not the exponential) of one stage operator scaled by ``coeff``.

    ``S2`` uses only odd grades, ``BasicChi`` every grade, ``AdjointChi`` every
    grade with sign ``(-1)**(n+1)`` on grade ``n``; the splitting flows are linear.
    """
    family, role = Family(family), Role(role)
    if role not in FAMILY_ROLES[family]:
        raise ValueError(f"role {role.value} is not valid for family {family.value}")
    if role is Role.FLOW_A:
        return TruncatedSeries(order, {("A",): coeff})
    if role is Role.FLOW_B:
        return TruncatedSeries(order, {("B",): coeff})
    terms: dict[Word, float] = {}
    if order >= 1:
        terms[("F",)] = coeff
    if role is Role.S2:
        for n in range(3, order + 1, 2):
            terms[(f"Y{n}",)] = coeff**n
    else:
        sign = -1.0 if role is Role.ADJOINT_CHI else 1.0
        for n in range(2, order + 1):
            terms[(f"Y{n}",)] = coeff**n * (sign ** (n + 1))
    return TruncatedSeries(order, terms)


def target_exponent(family: Family | str, order: int) -> TruncatedSeries:
    """Exponent of the exact flow: F for compositions, A + B for splittings."""
    if Family(family) is Family.SPLITTING:
        return TruncatedSeries(order, {("A",): 1.0, ("B",): 1.0})
    return TruncatedSeries(order, {("F",): 1.0})
