"""Text assembler for ordinal machine programs.

Source format, one statement per line (``;`` and ``/`` also separate statements)::

    # comment
    LOOP: BEQ x y DONE
          INC x
          BEQ x x LOOP
    DONE: HALT

Branch targets are labels or literal instruction indices.  Two macros are
expanded before labels are resolved:

``DEC b y``
    ``b`` becomes the predecessor of ``y`` (``y`` itself when ``y`` is 0 or a
    limit).  Uses a fresh counter; ``b`` must be 0 on entry.  ``DEC y`` is
    short for ``DEC pred.y y``.
``MOV x y``
    increments ``x`` until it equals ``y``.  Diverges when ``x > y``.

Both macros re-enter through their first instruction after a limit, so they
handle limit-valued operands only when expanded at instruction 0, where the
limit rule sends control.  A macro at the very end of a program gets a
trailing ``HALT`` so its exit has somewhere to land.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

from .machine import BitBranch, BranchEq, Halt, Inc, Instruction, MachineError, Program

__all__ = ["AssemblyError", "Statement", "parse_source", "expand_macros", "assemble"]


class AssemblyError(MachineError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


_LABEL = re.compile(r"^([A-Za-z_][\w.]*|\d+)\s*:\s*(.*)$")
_NAME = re.compile(r"^[A-Za-z_][\w.']*$")

_ARITY = {"INC": (1,), "BEQ": (3,), "BIT": (3,), "HALT": (0,), "DEC": (1, 2), "MOV": (2,)}


@dataclass(frozen=True)
class Statement:
    op: str
    args: Tuple[str, ...]
    labels: Tuple[str, ...] = ()
    line: int = 0


def parse_source(text: str) -> List[Statement]:
    stmts: List[Statement] = []
    pending: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        for chunk in re.split(r"[;/]", raw.split("#", 1)[0]):
            body = chunk.strip()
            while True:
                m = _LABEL.match(body)
                if m is None:
                    break
                pending.append(m.group(1))
                body = m.group(2).strip()
            if not body:
                continue
            op, *args = body.split()
            op = op.upper()
            if op not in _ARITY:
                raise AssemblyError(f"unknown statement {op!r}", lineno)
            if len(args) not in _ARITY[op]:
                want = " or ".join(map(str, _ARITY[op]))
                raise AssemblyError(f"{op} takes {want} operands, got {len(args)}", lineno)
            if op == "DEC" and len(args) == 1:
                args = [f"pred.{args[0]}", args[0]]
            regs = args[:2] if op in ("BEQ", "BIT") else args
            for name in regs:
                if not _NAME.match(name):
                    raise AssemblyError(f"bad register name {name!r}", lineno)
            stmts.append(Statement(op, tuple(args), tuple(pending), lineno))
            pending = []
    if pending:
        raise AssemblyError(f"label {pending[-1]!r} does not precede a statement")
    if not stmts:
        raise AssemblyError("empty program")
    return stmts


def expand_macros(stmts: Sequence[Statement]) -> List[Statement]:
    """Rewrite DEC/MOV into INC/BEQ with fresh internal labels and registers."""
    out: List[Statement] = []
    fresh = itertools.count()
    for st in stmts:
        if st.op == "DEC":
            dst, src = st.args
            k = next(fresh)
            a, entry, loop, done = f"_dec{k}.a", f"_dec{k}.entry", f"_dec{k}.loop", f"_dec{k}.done"
            out += [
                # 0 and limits: the counter catches up with src without any INC of dst
                Statement("BEQ", (a, src, done), st.labels + (entry,), st.line),
                Statement("INC", (a,), (), st.line),
                Statement("BEQ", (a, src, done), (loop,), st.line),
                Statement("INC", (a,), (), st.line),
                Statement("INC", (dst,), (), st.line),
                Statement("BEQ", (dst, dst, loop), (), st.line),
            ]
            out.append(Statement("_MARK", (done,), (), st.line))
        elif st.op == "MOV":
            dst, src = st.args
            k = next(fresh)
            loop, done = f"_mov{k}.loop", f"_mov{k}.done"
            out += [
                Statement("BEQ", (dst, src, done), st.labels + (loop,), st.line),
                Statement("INC", (dst,), (), st.line),
                Statement("BEQ", (dst, dst, loop), (), st.line),
            ]
            out.append(Statement("_MARK", (done,), (), st.line))
        else:
            out.append(st)
    # fold marker labels onto the following real statement
    folded: List[Statement] = []
    carry: Tuple[str, ...] = ()
    for st in out:
        if st.op == "_MARK":
            carry += st.args
            continue
        folded.append(Statement(st.op, st.args, carry + st.labels, st.line) if carry else st)
        carry = ()
    if carry:
        folded.append(Statement("HALT", (), carry, stmts[-1].line))
    return folded


def _resolve(target: str, labels: Dict[str, int], line: int) -> int:
    if target in labels:
        return labels[target]
    if target.isdigit():
        return int(target)
    raise AssemblyError(f"unknown label {target!r}", line)


def assemble(text: str) -> Program:
    stmts = expand_macros(parse_source(text))
    labels: Dict[str, int] = {}
    for i, st in enumerate(stmts):
        for lab in st.labels:
            if lab in labels:
                raise AssemblyError(f"duplicate label {lab!r}", st.line)
            if lab.isdigit() and int(lab) != i:
                raise AssemblyError(f"numeric label {lab} sits at instruction {i}", st.line)
            labels[lab] = i
    instructions: List[Instruction] = []
    lines: List[int] = []
    for st in stmts:
        ins: Instruction
        if st.op == "INC":
            ins = Inc(st.args[0])
        elif st.op == "BEQ":
            ins = BranchEq(st.args[0], st.args[1], _resolve(st.args[2], labels, st.line))
        elif st.op == "BIT":
            ins = BitBranch(st.args[0], st.args[1], _resolve(st.args[2], labels, st.line))
        else:
            ins = Halt()
        instructions.append(ins)
        lines.append(st.line)
    try:
        return Program(tuple(instructions), labels, tuple(lines))
    except AssemblyError:
        raise
    except MachineError as exc:
        raise AssemblyError(str(exc)) from None
