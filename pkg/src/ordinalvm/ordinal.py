"""Ordinals below w^w in Cantor normal form.

An :class:`Ordinal` is stored as a tuple of ``(exponent, coefficient)`` pairs
with strictly decreasing natural exponents and positive coefficients, so
structural equality is ordinal equality.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Tuple, Union

__all__ = [
    "Ordinal",
    "OrdinalSyntaxError",
    "ZERO",
    "ONE",
    "OMEGA",
    "parse_ordinal",
    "format_ordinal",
    "compare",
    "succ",
    "add",
    "is_limit",
    "split",
    "sup_progression",
]


class OrdinalSyntaxError(ValueError):
    pass


def _normalize(terms: Iterable[Tuple[int, int]]) -> Tuple[Tuple[int, int], ...]:
    # Left-to-right ordinal sum of single terms: a term absorbs everything
    # before it with a smaller exponent and merges with an equal exponent.
    out: list = []
    for e, c in terms:
        if e < 0 or c < 0:
            raise ValueError("exponents and coefficients must be natural")
        if c == 0:
            continue
        while out and out[-1][0] < e:
            out.pop()
        if out and out[-1][0] == e:
            out[-1] = (e, out[-1][1] + c)
        else:
            out.append((e, c))
    return tuple(out)


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        norm = _normalize(self.terms)
        if norm != self.terms:
            object.__setattr__(self, "terms", norm)

    @classmethod
    def of(cls, value: "OrdinalLike") -> "Ordinal":
        if isinstance(value, Ordinal):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not an ordinal")
        if isinstance(value, int):
            if value < 0:
                raise ValueError("negative ordinal")
            return cls(((0, value),)) if value else ZERO
        if isinstance(value, str):
            return parse_ordinal(value)
        raise TypeError(f"cannot make an ordinal from {value!r}")

    @classmethod
    def omega(cls, exponent: int = 1, coefficient: int = 1) -> "Ordinal":
        return cls(((exponent, coefficient),))

    @property
    def finite_part(self) -> int:
        if self.terms and self.terms[-1][0] == 0:
            return self.terms[-1][1]
        return 0

    @property
    def limit_part(self) -> "Ordinal":
        if self.terms and self.terms[-1][0] == 0:
            return Ordinal(self.terms[:-1])
        return self

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)

    @property
    def degree(self) -> int:
        """Leading exponent; 0 for finite ordinals."""
        return self.terms[0][0] if self.terms else 0

    def omega_coefficient(self, exponent: int) -> int:
        for e, c in self.terms:
            if e == exponent:
                return c
        return 0

    def __int__(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.finite_part

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return other >= 0 and self.terms == Ordinal.of(other).terms
        if isinstance(other, Ordinal):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.terms)

    def __lt__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        # Lexicographic on (exponent, coefficient) pairs; a proper prefix is smaller.
        return self.terms < other.terms

    def __add__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return Ordinal(self.terms + other.terms)

    def __radd__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return Ordinal.of(other) + self
        return NotImplemented

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"


OrdinalLike = Union[Ordinal, int, str]

ZERO = Ordinal()
ONE = Ordinal(((0, 1),))
OMEGA = Ordinal(((1, 1),))

_TERM = re.compile(r"^(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


def parse_ordinal(text: str) -> Ordinal:
    """Parse ``w^2*3+w+4`` style literals; unnormalized sums are normalized."""
    src = text.replace(" ", "")
    if not src:
        raise OrdinalSyntaxError("empty ordinal literal")
    terms = []
    for part in src.split("+"):
        m = _TERM.match(part)
        if m is None:
            raise OrdinalSyntaxError(f"bad ordinal term {part!r} in {text!r}")
        exp, coef, nat = m.groups()
        if nat is not None:
            terms.append((0, int(nat)))
        else:
            terms.append((int(exp) if exp is not None else 1, int(coef) if coef is not None else 1))
    return Ordinal(tuple(terms))


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if e == 0:
            parts.append(str(c))
            continue
        head = "w" if e == 1 else f"w^{e}"
        parts.append(head if c == 1 else f"{head}*{c}")
    return "+".join(parts)


def compare(a: OrdinalLike, b: OrdinalLike) -> int:
    """Return -1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    if a.terms == b.terms:
        return 0
    return -1 if a.terms < b.terms else 1


def succ(a: OrdinalLike) -> Ordinal:
    t = Ordinal.of(a).terms
    # already normal: bump the finite part or append one
    terms = t[:-1] + ((0, t[-1][1] + 1),) if t and t[-1][0] == 0 else t + ((0, 1),)
    out = object.__new__(Ordinal)
    object.__setattr__(out, "terms", terms)
    return out


def add(a: OrdinalLike, b: OrdinalLike) -> Ordinal:
    return Ordinal.of(a) + Ordinal.of(b)


def is_limit(a: OrdinalLike) -> bool:
    a = Ordinal.of(a)
    return bool(a) and a.finite_part == 0


def split(a: OrdinalLike) -> Tuple[Ordinal, int]:
    a = Ordinal.of(a)
    return a.limit_part, a.finite_part


def sup_progression(base: OrdinalLike, delta: int) -> Ordinal:
    """Supremum of ``base + n*delta`` over all natural ``n``."""
    if delta < 0:
        raise ValueError("delta must be natural")
    base = Ordinal.of(base)
    if delta == 0:
        return base
    return base.limit_part + OMEGA
