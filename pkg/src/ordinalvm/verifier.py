"""Streaming checker for run certificates.

:func:`verify` folds :meth:`Verifier.ingest` over a record stream.  It either
rejects at a finite record position naming the violated rule, or accepts the
prefix it was given.  Rules:

====  ==================================================================
R1    the first z-statement is ``Final`` and no other ``Final`` follows
R2    the final index runs a ``HALT`` line
R3    nothing is above the final index; an index running ``HALT`` has no
      later timestep
R4    order facts stay acyclic (no ``n<m`` together with ``m<n``)
R5    every mentioned pair ``(n, m)`` is ordered before z-position
      ``2(n+m)^2``
R6    ``Succ(m, n)`` needs ``n<m`` first, is one-to-one, leaves no index
      between ``n`` and ``m``, and never names a ``Limit`` index
R7    each successor step follows the program: next control line, the
      incremented register moves to its successor, others stay put
R8    control is at line 0 on every limit index
R9    register values are monotone along the order (a known decrease
      across a step is reported as R9 rather than R7)
R10   ``Inverse(r, v, i)`` names an index where ``r`` holds ``v``, and no
      index holding ``v`` precedes it
FRAME undecodable input
====  ==================================================================

Facts a check needs but has not seen yet become obligations with a z-position
deadline: facts about indices below ``k`` must arrive before position ``2k^2``.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple, Union

from .certificate import Control, Final, Inverse, Less, Limit, Record, Succ, Value
from .codec import FrameError, decode_bits
from .machine import BranchEq, Halt, Inc, Program

__all__ = ["AcceptPrefix", "Reject", "Verdict", "Verifier", "RejectError", "verify", "RULES"]

RULES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10", "FRAME")


@dataclass(frozen=True)
class AcceptPrefix:
    consumed: int

    def __str__(self):
        return f"ACCEPT {self.consumed}"


@dataclass(frozen=True)
class Reject:
    position: int
    rule: str
    detail: str = ""

    def __str__(self):
        return f"REJECT {self.position} {self.rule} {self.detail}".rstrip()


Verdict = Union[AcceptPrefix, Reject]


class RejectError(Exception):
    def __init__(self, rule: str, detail: str):
        super().__init__(f"{rule}: {detail}")
        self.rule = rule
        self.detail = detail


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _OrderGraph:
    """Order facts with ``Succ`` chains contracted to blocks; transitive closure as bitsets."""

    def __init__(self):
        self.block_of: Dict[int, int] = {}
        self.members: Dict[int, List[int]] = {}
        self.pos: Dict[int, int] = {}
        self.reach: Dict[int, int] = {}
        self.anc: Dict[int, int] = {}
        self._next = 0

    def add_node(self, x: int) -> None:
        if x in self.block_of:
            return
        b = self._next
        self._next += 1
        self.block_of[x] = b
        self.members[b] = [x]
        self.pos[x] = 0
        self.reach[b] = 0
        self.anc[b] = 0

    def add_less(self, a: int, b: int) -> None:
        A, B = self.block_of[a], self.block_of[b]
        if A == B:
            if self.pos[a] > self.pos[b]:
                raise RejectError("R4", f"{a}<{b} contradicts the successor chain")
            return
        if self.reach[B] >> A & 1:
            raise RejectError("R4", f"{a}<{b} closes an order cycle")
        if self.reach[A] >> B & 1:
            return
        down = self.reach[B] | (1 << B)
        up = self.anc[A] | (1 << A)
        for X in _bits(up):
            self.reach[X] |= down
        for Y in _bits(down):
            self.anc[Y] |= up

    def merge(self, n: int, m: int) -> None:
        """Make ``m`` the immediate successor of ``n``; both are already ordered ``n<m``."""
        X, Y = self.block_of[n], self.block_of[m]
        between = self.reach[X] & self.anc[Y]
        if between:
            l = self.members[next(_bits(between))][0]
            raise RejectError("R6", f"{l} lies between {n} and its successor {m}")
        bx, by = 1 << X, 1 << Y
        offset = len(self.members[X])
        for k, y in enumerate(self.members[Y]):
            self.block_of[y] = X
            self.pos[y] = offset + k
        self.members[X].extend(self.members.pop(Y))
        reach = (self.reach[X] | self.reach.pop(Y)) & ~(bx | by)
        anc = (self.anc[X] | self.anc.pop(Y)) & ~(bx | by)
        self.reach[X], self.anc[X] = reach, anc
        for W in _bits(anc):
            self.reach[W] = (self.reach[W] & ~by) | bx | reach
        for W in _bits(reach):
            self.anc[W] = (self.anc[W] & ~by) | bx | anc

    def has_above(self, x: int) -> bool:
        b = self.block_of[x]
        return bool(self.reach[b]) or self.members[b][-1] != x


class Verifier:
    """Incremental certificate checker for one program."""

    def __init__(self, program: Program):
        self.program = program
        self.registers = program.registers
        self.halt_lines = set(program.halt_lines)
        self.consumed = 0
        self.zpos = 0
        self.final: Optional[int] = None
        self.mentioned: Set[int] = set()
        self.less: Set[Tuple[int, int]] = set()
        self.greater: Dict[int, Set[int]] = {}
        self.smaller: Dict[int, Set[int]] = {}
        self.succ_of: Dict[int, int] = {}
        self.pred_of: Dict[int, int] = {}
        self.limits: Set[int] = set()
        self.graph = _OrderGraph()
        self.control: Dict[int, int] = {}
        self.values: List[Dict[int, int]] = [dict() for _ in self.registers]
        self.holders: List[Dict[int, List[int]]] = [dict() for _ in self.registers]
        self.inverse: List[Dict[int, int]] = [dict() for _ in self.registers]
        self.inverse_at: List[Dict[int, int]] = [dict() for _ in self.registers]
        self.steps_checked: Set[int] = set()
        self._pairs: List[Tuple[int, int, int]] = []  # R5 heap: (deadline, lo, hi)
        self._due: List[Tuple[int, int]] = []  # obligation heap: (deadline, id)
        self._obligations: Dict[int, Tuple[str, str, int, int, str]] = {}
        self._waiting: Dict[Tuple, List[int]] = {}
        self._ob_ids = 0

    # -- obligations -------------------------------------------------------

    def _decide(self, kind: str, a: int, b: int) -> Optional[bool]:
        if kind == "order":  # element(a) <= element(b)
            if a == b or (a, b) in self.less:
                return True
            if (b, a) in self.less:
                return False
            return None
        # "succ": element(a) == element(b) + 1
        if self.succ_of.get(b) == a:
            return True
        if a == b or (a, b) in self.less or b in self.succ_of or a in self.pred_of:
            return False
        return None

    def _oblige(self, kind: str, rule: str, a: int, b: int, detail: str) -> None:
        verdict = self._decide(kind, a, b)
        if verdict is True:
            return
        if verdict is False:
            raise RejectError(rule, detail)
        deadline = 2 * (a + b) ** 2 if kind == "order" else 2 * (max(a, b) + 1) ** 2
        if deadline <= self.zpos:
            raise RejectError(rule, detail + " (fact missing by its deadline)")
        oid = self._ob_ids
        self._ob_ids += 1
        self._obligations[oid] = (kind, rule, a, b, detail)
        heapq.heappush(self._due, (deadline, oid))
        keys = [("less", a, b), ("less", b, a)]
        if kind == "succ":
            keys += [("succ", b)]
        for key in keys:
            self._waiting.setdefault(key, []).append(oid)

    def _wake(self, key) -> None:
        for oid in self._waiting.pop(key, ()):
            ob = self._obligations.get(oid)
            if ob is None:
                continue
            kind, rule, a, b, detail = ob
            verdict = self._decide(kind, a, b)
            if verdict is True:
                del self._obligations[oid]
            elif verdict is False:
                raise RejectError(rule, detail)
            else:
                self._waiting.setdefault(key, []).append(oid)

    def _expire(self) -> None:
        while self._pairs and self._pairs[0][0] <= self.zpos:
            _, lo, hi = heapq.heappop(self._pairs)
            if (lo, hi) not in self.less and (hi, lo) not in self.less:
                raise RejectError("R5", f"pair ({lo},{hi}) unordered at z-position {self.zpos}")
        while self._due and self._due[0][0] <= self.zpos:
            _, oid = heapq.heappop(self._due)
            ob = self._obligations.pop(oid, None)
            if ob is None:
                continue
            kind, rule, a, b, detail = ob
            if self._decide(kind, a, b) is not True:
                raise RejectError(rule, detail + " (fact missing by its deadline)")

    # -- ingestion ---------------------------------------------------------

    def ingest(self, rec: Record) -> None:
        """Consume one record; raises :class:`RejectError` on a violation."""
        self.consumed += 1
        if rec.tag == "Z":
            self._z(rec)
        elif isinstance(rec, Control):
            self._control(rec)
        elif isinstance(rec, Value):
            self._value(rec)
        elif isinstance(rec, Inverse):
            self._inverse(rec)
        else:
            raise RejectError("FRAME", f"unknown record {rec!r}")

    def _mention(self, x: int) -> None:
        if x in self.mentioned:
            return
        for y in self.mentioned:
            heapq.heappush(self._pairs, (2 * (x + y) ** 2, min(x, y), max(x, y)))
        self.mentioned.add(x)
        self.graph.add_node(x)

    def _z(self, st) -> None:
        if self.zpos == 0 and not isinstance(st, Final):
            raise RejectError("R1", "first z-statement is not Final")
        if self.zpos > 0 and isinstance(st, Final):
            raise RejectError("R1", f"Final({st.m}) after the first z-statement")
        for x in _indices(st):
            self._mention(x)
        self._expire()
        if isinstance(st, Final):
            self.final = st.m
            self._check_final()
        elif isinstance(st, Less):
            self._less(st.n, st.m)
        elif isinstance(st, Succ):
            self._succ(st.m, st.n)
        else:
            self._limit(st.m)
        self.zpos += 1

    def _less(self, n: int, m: int) -> None:
        if n == m:
            raise RejectError("R4", f"{n}<{n}")
        if (n, m) in self.less:
            return
        if n == self.final:
            raise RejectError("R3", f"final index {n} below {m}")
        if self.control.get(n) in self.halt_lines:
            raise RejectError("R3", f"index {n} runs HALT but precedes {m}")
        self.graph.add_less(n, m)
        if self.final is not None and self.graph.has_above(self.final):
            raise RejectError("R3", f"{m} ends up above the final index {self.final}")
        self.less.add((n, m))
        self.greater.setdefault(n, set()).add(m)
        self.smaller.setdefault(m, set()).add(n)
        self._wake(("less", n, m))
        self._wake(("less", m, n))
        for r in range(len(self.registers)):
            vals = self.values[r]
            if n in vals and m in vals:
                self._monotone(r, n, m)

    def _succ(self, m: int, n: int) -> None:
        if self.succ_of.get(n) == m:
            return
        if m == n:
            raise RejectError("R6", f"{m} cannot succeed itself")
        if n == self.final:
            raise RejectError("R3", f"the final index {n} has a successor {m}")
        if (n, m) not in self.less:
            raise RejectError("R6", f"Succ({m},{n}) before {n}<{m} is known")
        if n in self.succ_of:
            raise RejectError("R6", f"{n} already has successor {self.succ_of[n]}")
        if m in self.pred_of:
            raise RejectError("R6", f"{m} already succeeds {self.pred_of[m]}")
        if m in self.limits:
            raise RejectError("R6", f"limit index {m} cannot be a successor")
        self.graph.merge(n, m)
        if self.final is not None and self.graph.has_above(self.final):
            raise RejectError("R3", f"successor chain places indices above the final index {self.final}")
        self.succ_of[n] = m
        self.pred_of[m] = n
        self._wake(("succ", n))
        self._step(n)

    def _limit(self, m: int) -> None:
        if m in self.pred_of:
            raise RejectError("R6", f"{m} succeeds {self.pred_of[m]} and cannot be a limit")
        self.limits.add(m)
        self._check_limit(m)

    def _check_final(self) -> None:
        f = self.final
        if f in self.control and self.control[f] not in self.halt_lines:
            raise RejectError("R2", f"final index {f} runs line {self.control[f]}, not HALT")

    def _check_limit(self, m: int) -> None:
        if m in self.control and self.control[m] != 0:
            raise RejectError("R8", f"limit index {m} runs line {self.control[m]}, not 0")

    def _control(self, rec: Control) -> None:
        i, line = rec.i, rec.line
        if not 0 <= line < len(self.program):
            raise RejectError("R7", f"control line {line} outside the program")
        old = self.control.get(i)
        if old is not None:
            if old != line:
                raise RejectError("R7", f"conflicting control at index {i}")
            return
        self.control[i] = line
        if i == self.final:
            self._check_final()
        if line in self.halt_lines and self.greater.get(i):
            raise RejectError("R3", f"index {i} runs HALT but precedes {min(self.greater[i])}")
        if i in self.limits:
            self._check_limit(i)
        self._around(i)

    def _value(self, rec: Value) -> None:
        r, i, v = rec.reg, rec.i, rec.v
        if not 0 <= r < len(self.registers):
            raise RejectError("FRAME", f"unknown register id {r}")
        vals = self.values[r]
        if i in vals:
            if vals[i] != v:
                raise RejectError("R7", f"conflicting values for {self.registers[r]} at index {i}")
            return
        vals[i] = v
        self.holders[r].setdefault(v, []).append(i)
        name = self.registers[r]
        claimed = self.inverse_at[r].get(i)
        if claimed is not None and claimed != v:
            raise RejectError("R10", f"inverse of {name} says index {i} holds {claimed}, value says {v}")
        if v in self.inverse[r]:
            first = self.inverse[r][v]
            self._oblige("order", "R10", first, i, f"{name} holds {v} at {i} before its inverse {first}")
        for j in self.greater.get(i, ()):
            if j in vals:
                self._monotone(r, i, j)
        for j in self.smaller.get(i, ()):
            if j in vals:
                self._monotone(r, j, i)
        self._around(i)

    def _inverse(self, rec: Inverse) -> None:
        r, v, i = rec.reg, rec.v, rec.i
        if not 0 <= r < len(self.registers):
            raise RejectError("FRAME", f"unknown register id {r}")
        name = self.registers[r]
        old = self.inverse[r].get(v)
        if old is not None:
            if old != i:
                raise RejectError("R10", f"two inverses for {name}={v}")
            return
        self.inverse[r][v] = i
        self.inverse_at[r][i] = v
        held = self.values[r].get(i)
        if held is not None and held != v:
            raise RejectError("R10", f"inverse of {name} says index {i} holds {v}, value says {held}")
        for m in self.holders[r].get(v, ()):
            self._oblige("order", "R10", i, m, f"{name} holds {v} at {m} before its inverse {i}")

    def _monotone(self, r: int, n: int, m: int) -> None:
        vn, vm = self.values[r][n], self.values[r][m]
        self._oblige("order", "R9", vn, vm, f"{self.registers[r]} decreases from index {n} to {m}")

    def _around(self, i: int) -> None:
        if i in self.pred_of:
            self._step(self.pred_of[i])
        if i in self.succ_of:
            self._step(i)

    def _step(self, n: int) -> None:
        """R7 for the step from index ``n`` to its successor, once all data is in."""
        if n in self.steps_checked:
            return
        m = self.succ_of[n]
        if n not in self.control or m not in self.control:
            return
        if any(n not in vals or m not in vals for vals in self.values):
            return
        self.steps_checked.add(n)
        cn, cm = self.control[n], self.control[m]
        ins = self.program[cn]
        vn = [vals[n] for vals in self.values]
        vm = [vals[m] for vals in self.values]
        moved = None
        if isinstance(ins, Halt):
            raise RejectError("R7", f"index {n} runs HALT yet has successor {m}")
        if isinstance(ins, Inc):
            expected = cn + 1
            moved = self.registers.index(ins.reg)
        elif isinstance(ins, BranchEq):
            a, b = self.registers.index(ins.left), self.registers.index(ins.right)
            expected = ins.target if vn[a] == vn[b] else cn + 1
        else:
            raise RejectError("R7", f"line {cn} is not an ordinal-machine instruction")
        if cm != expected:
            raise RejectError("R7", f"after line {cn} at index {n} expected line {expected} at {m}, got {cm}")
        for r, name in enumerate(self.registers):
            if r == moved:
                self._oblige("succ", "R7", vm[r], vn[r], f"INC {name} from index {n} to {m}: value {vm[r]} is not the successor of {vn[r]}")
            elif vn[r] != vm[r]:
                if self._decide("order", vn[r], vm[r]) is False:
                    raise RejectError("R9", f"{name} decreases from index {n} to {m}")
                raise RejectError("R7", f"{name} changes from index {n} to {m} without an INC")


def _indices(st) -> Tuple[int, ...]:
    if isinstance(st, Less):
        return (st.n, st.m)
    if isinstance(st, Succ):
        return (st.m, st.n)
    return (st.m,)


def verify(program: Program, stream: Union[str, Iterable[Record]], max_records: Optional[int] = None) -> Verdict:
    """Check at most ``max_records`` records of a certificate stream.

    ``stream`` is an iterable of records or a '0'/'1' bit string.  A rejection
    position is the 0-based index of the offending record.
    """
    records = decode_bits(stream) if isinstance(stream, str) else iter(stream)
    checker = Verifier(program)
    position = 0
    while max_records is None or position < max_records:
        try:
            rec = next(records)
        except StopIteration:
            break
        except FrameError as exc:
            return Reject(position, "FRAME", str(exc))
        try:
            checker.ingest(rec)
        except RejectError as exc:
            return Reject(position, exc.rule, exc.detail)
        position += 1
    return AcceptPrefix(position)
