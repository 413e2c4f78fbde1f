"""Run certificates: an w-indexed description of a halted transfinite run.

A halted run with timesteps ``0 .. T`` (order type ``alpha = T + 1``) is
described over natural-number *indices*: a :class:`Bijection` maps every index
to a timestep, with index 0 reserved for the final timestep.  The certificate
is the interleaving of four streams:

* z-statements about indices: :class:`Final`, :class:`Less`, :class:`Succ`,
  :class:`Limit`;
* :class:`Control` records ``(i, line)``: the instruction active at index ``i``;
* :class:`Value` records ``(reg, i, v)``: register ``reg`` at index ``i`` holds
  the ordinal whose index is ``v``;
* :class:`Inverse` records ``(reg, v, i)``: ``i`` is the index of the earliest
  timestep at which ``reg`` holds the value with index ``v``.

Values reuse the timestep indexing, so every register value must be at most
the halt time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .machine import Halted, RunSummary
from .ordinal import OMEGA, Ordinal, OrdinalLike, is_limit, succ

__all__ = [
    "Final",
    "Less",
    "Succ",
    "Limit",
    "Control",
    "Value",
    "Inverse",
    "ZStatement",
    "Record",
    "CertificateError",
    "Bijection",
    "order_type",
    "build_bijection",
    "emit_z",
    "emit_control",
    "emit_values",
    "emit_inverses",
    "multiplex",
    "demultiplex",
    "certify",
    "z_positions",
]


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class Final:
    m: int
    tag = "Z"


@dataclass(frozen=True)
class Less:
    """Timestep at index ``n`` precedes timestep at index ``m``."""

    n: int
    m: int
    tag = "Z"


@dataclass(frozen=True)
class Succ:
    """Timestep at index ``m`` is the successor of timestep at index ``n``."""

    m: int
    n: int
    tag = "Z"


@dataclass(frozen=True)
class Limit:
    m: int
    tag = "Z"


@dataclass(frozen=True)
class Control:
    i: int
    line: int
    tag = "CONTROL"


@dataclass(frozen=True)
class Value:
    reg: int
    i: int
    v: int
    tag = "VALUE"


@dataclass(frozen=True)
class Inverse:
    reg: int
    v: int
    i: int
    tag = "INVERSE"


ZStatement = Union[Final, Less, Succ, Limit]
Record = Union[Final, Less, Succ, Limit, Control, Value, Inverse]
Z_TYPES = (Final, Less, Succ, Limit)


def _ordinal_type(alpha: Ordinal) -> Tuple[int, int]:
    if alpha.degree > 1:
        raise CertificateError(f"order type {alpha} is not below w^2")
    return alpha.omega_coefficient(1), alpha.finite_part


class Bijection:
    """Index <-> timestep map for order type ``w*k + n`` with ``n >= 1``.

    Index 0 is the last timestep.  The others are dealt round-robin over the
    ``k`` w-blocks ``w*j + t`` and the finite tail ``w*k + t`` (t < n-1); once
    the tail runs out only the blocks are dealt.
    """

    def __init__(self, alpha: OrdinalLike):
        alpha = Ordinal.of(alpha)
        k, n = _ordinal_type(alpha)
        if n == 0:
            raise CertificateError(f"order type {alpha} has no final element")
        self.order_type = alpha
        self.blocks = k
        self.tail = n - 1
        self.last = Ordinal(((1, k), (0, n - 1)))

    @property
    def size(self) -> Optional[int]:
        """Number of indices, or None when infinite."""
        return None if self.blocks else self.tail + 1

    def __contains__(self, i: int) -> bool:
        return i >= 0 and (self.size is None or i < self.size)

    def element(self, i: int) -> Ordinal:
        if i not in self:
            raise IndexError(f"index {i} out of range for order type {self.order_type}")
        if i == 0:
            return self.last
        k, T = self.blocks, self.tail
        j = i - 1
        if j < T * (k + 1):
            t, s = divmod(j, k + 1)
            return Ordinal(((1, s), (0, t))) if s < k else Ordinal(((1, k), (0, t)))
        t, s = divmod(j - T * (k + 1), k)
        return Ordinal(((1, s), (0, T + t)))

    def index(self, e: OrdinalLike) -> int:
        e = Ordinal.of(e)
        if not e < self.order_type:
            raise CertificateError(f"{e} is not below the order type {self.order_type}")
        if e == self.last:
            return 0
        k, T = self.blocks, self.tail
        s, t = e.omega_coefficient(1), e.finite_part
        if s == k:
            return 1 + t * (k + 1) + k
        if t < T:
            return 1 + t * (k + 1) + s
        return 1 + T * (k + 1) + (t - T) * k + s

    def indices(self) -> Iterator[int]:
        return iter(range(self.size)) if self.size is not None else itertools.count()


def order_type(summary: RunSummary) -> Ordinal:
    if not isinstance(summary.outcome, Halted):
        raise CertificateError(f"certificates need a halted run, got {summary.outcome}")
    return succ(summary.outcome.time)


def build_bijection(alpha: OrdinalLike) -> Bijection:
    return Bijection(alpha)


def emit_z(b: Bijection) -> Iterator[ZStatement]:
    """z-statements in order of index sum; all facts about indices below ``k`` come before position ``2k^2``."""
    yield Final(0)
    if is_limit(b.element(0)):
        # never for a run (a limit time sits at line 0, which would have halted at
        # time 0); for bare order types w*k+1 the pair (0, 1) then misses 2(0+1)^2
        yield Limit(0)
    size = b.size
    for s in itertools.count(1):
        if size is not None and s > 2 * size - 3:
            return
        lo = 0 if size is None else max(0, s - size + 1)
        for a in range(lo, (s + 1) // 2):
            c = s - a
            ea, ec = b.element(a), b.element(c)
            if ea < ec:
                yield Less(a, c)
                if ec == succ(ea):
                    yield Succ(c, a)
            else:
                yield Less(c, a)
                if ea == succ(ec):
                    yield Succ(a, c)
        if (size is None or s < size) and is_limit(b.element(s)):
            yield Limit(s)


def emit_control(summary: RunSummary, b: Bijection) -> Iterator[Control]:
    for i in b.indices():
        yield Control(i, summary.configuration_at(b.element(i)).ip)


def emit_values(summary: RunSummary, b: Bijection) -> Iterator[Value]:
    regs = summary.registers
    for i in b.indices():
        cfg = summary.configuration_at(b.element(i))
        for rid, r in enumerate(regs):
            value = cfg.registers[r]
            if not value < b.order_type:
                raise CertificateError(
                    f"register {r} holds {value} at time {cfg.time}, beyond the halt time; certificate unsupported"
                )
            yield Value(rid, i, b.index(value))


def emit_inverses(summary: RunSummary, b: Bijection) -> Iterator[Optional[Inverse]]:
    """Inverse records by value index; yields None for a value no register attains."""
    regs = summary.registers
    for v in b.indices():
        value = b.element(v)
        found = False
        for rid, r in enumerate(regs):
            t = summary.first_time(r, value)
            if t is not None:
                found = True
                yield Inverse(rid, v, b.index(t))
        if not found:
            yield None


def multiplex(*streams: Iterable[Optional[Record]]) -> Iterator[Record]:
    """Round-robin interleave, one item per live stream per round; ``None`` items are skipped."""
    live = [iter(s) for s in streams]
    while live:
        still = []
        for it in live:
            try:
                item = next(it)
            except StopIteration:
                continue
            still.append(it)
            if item is not None:
                yield item
        live = still


def demultiplex(records: Iterable[Record]) -> Tuple[List[ZStatement], List[Control], List[Value], List[Inverse]]:
    z, c, v, inv = [], [], [], []
    for rec in records:
        {"Z": z, "CONTROL": c, "VALUE": v, "INVERSE": inv}[rec.tag].append(rec)
    return z, c, v, inv


def certify(summary: RunSummary, prefix: Optional[int] = None) -> Iterator[Record]:
    """Lazily generate the certificate of a halted run, optionally cut at ``prefix`` records."""
    b = Bijection(order_type(summary))
    stream = multiplex(emit_z(b), emit_control(summary, b), emit_values(summary, b), emit_inverses(summary, b))
    return itertools.islice(stream, prefix) if prefix is not None else stream


def z_positions(records: Iterable[Record]) -> Iterator[Tuple[int, ZStatement]]:
    """``(z-position, statement)`` for the z-statements of a record stream."""
    pos = 0
    for rec in records:
        if rec.tag == "Z":
            yield pos, rec
            pos += 1


def statement_indices(st: ZStatement) -> Tuple[int, ...]:
    if isinstance(st, Less):
        return (st.n, st.m)
    if isinstance(st, Succ):
        return (st.m, st.n)
    return (st.m,)
