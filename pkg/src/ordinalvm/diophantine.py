"""Bit-level tools for encoding finite-time bit-reading machines as integer relations.

Bit strings are nonnegative Python ints read least-significant-bit first.
Reals are exact :class:`fractions.Fraction` values in (0, 1); bit ``i`` of a
real ``x`` is the ``(i+1)``-th binary digit after the point.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .machine import BitBranch, BranchEq, Halt, Inc, MachineError, Program

__all__ = [
    "stretch",
    "dominates",
    "bit_select",
    "truncation_witness",
    "BoundaryError",
    "real_bits",
    "truncate",
    "Poly",
    "PolyEq",
    "Dominates",
    "Interval",
    "Exp",
    "ConstraintSystem",
    "UnboundVariable",
    "eval_system",
    "system_from_json",
    "system_to_json",
    "TruncatedOutcome",
    "run_truncated",
    "encode_program",
    "branch_domination_system",
    "branch_witness",
]


def stretch(g: int, n: int) -> int:
    """Move bit ``i`` of ``g`` to position ``n*i``, zero elsewhere."""
    if n < 1:
        raise ValueError("stretch factor must be positive")
    if g < 0:
        raise ValueError("bit strings are nonnegative")
    if n == 1 or g == 0:
        return g
    sep = "0" * (n - 1)
    return int(sep.join(bin(g)[2:]), 2)


def dominates(a: int, b: int) -> bool:
    """True iff every set bit of ``a`` is set in ``b``."""
    if a < 0 or b < 0:
        return False
    return a & ~b == 0


def bit_select(x: int, i: int) -> int:
    # mask with 2^i, then test the product for zero
    y = x & (1 << i)
    return 0 if y == 0 else 1


class BoundaryError(ValueError):
    """``2^a * r`` is an integer, so no ``g`` satisfies the strict inequalities."""


def _fraction(r) -> Fraction:
    if isinstance(r, str):
        return Fraction(r.strip())
    return Fraction(r)


def truncation_witness(r, a: int) -> int:
    """The unique ``g`` with ``g < 2**a * r < g + 1``."""
    if a < 0:
        raise ValueError("exponent must be natural")
    scaled = _fraction(r) * (1 << a)
    if scaled.denominator == 1:
        raise BoundaryError(f"2^{a} * {r} = {scaled} is an integer")
    return scaled.numerator // scaled.denominator


def real_bits(x, n: int) -> List[int]:
    """First ``n`` binary digits of ``x`` after the point."""
    x = _fraction(x)
    if not 0 < x < 1:
        raise ValueError(f"real input {x} must lie strictly between 0 and 1")
    h = (x * (1 << n)).__floor__()
    return [(h >> (n - 1 - i)) & 1 for i in range(n)]


def truncate(x, n: int) -> int:
    """Store the first ``n`` digits of ``x`` as an integer with digit ``i`` at bit ``i``."""
    return sum(bit << i for i, bit in enumerate(real_bits(x, n)))


# ---------------------------------------------------------------------------
# constraint language

Monomial = Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class Poly:
    """Integer polynomial as ``{monomial: coefficient}``; a monomial is sorted ``(var, power)`` pairs."""

    terms: Mapping[Monomial, int] = field(default_factory=dict)

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): 1})

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls({(): c} if c else {})

    @classmethod
    def of(cls, value) -> "Poly":
        if isinstance(value, Poly):
            return value
        if isinstance(value, int):
            return cls.const(value)
        if isinstance(value, str):
            return cls.const(int(value)) if value.lstrip("-").isdigit() else cls.var(value)
        raise TypeError(f"cannot make a polynomial from {value!r}")

    def _combine(self, other, sign: int) -> "Poly":
        other = Poly.of(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0) + sign * c
        return Poly({m: c for m, c in out.items() if c})

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return Poly.of(other)._combine(self, -1)

    def __mul__(self, other):
        other = Poly.of(other)
        out: Dict[Monomial, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                powers = dict(m1)
                for v, p in m2:
                    powers[v] = powers.get(v, 0) + p
                mono = tuple(sorted(powers.items()))
                out[mono] = out.get(mono, 0) + c1 * c2
        return Poly({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    @property
    def variables(self) -> set:
        return {v for mono in self.terms for v, _ in mono}

    def evaluate(self, env: Mapping[str, int]) -> int:
        total = 0
        for mono, c in self.terms.items():
            t = c
            for v, p in mono:
                if v not in env:
                    raise UnboundVariable(v)
                t *= env[v] ** p
            total += t
        return total

    def to_json(self) -> list:
        return [
            {"coef": str(c), "vars": {v: p for v, p in mono}}
            for mono, c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json(cls, data) -> "Poly":
        if isinstance(data, (int, str)):
            return cls.of(data)
        out = Poly()
        for term in data:
            mono = tuple(sorted((v, int(p)) for v, p in term.get("vars", {}).items() if int(p)))
            out = out + Poly({mono: int(term["coef"])})
        return out


class UnboundVariable(KeyError):
    def __str__(self):
        return f"missing binding for variable {self.args[0]!r}"


@dataclass(frozen=True)
class PolyEq:
    poly: Poly

    def holds(self, w, reals) -> bool:
        return self.poly.evaluate(w) == 0


@dataclass(frozen=True)
class Dominates:
    """Bitwise domination ``lhs <= rhs``; negative sides never dominate or get dominated."""

    lhs: Poly
    rhs: Poly

    def holds(self, w, reals) -> bool:
        return dominates(self.lhs.evaluate(w), self.rhs.evaluate(w))


@dataclass(frozen=True)
class Interval:
    """``g < 2^a * r < g + 1`` with ``r`` a real variable or a literal fraction."""

    g: str
    a: str
    real: str

    def holds(self, w, reals) -> bool:
        for v in (self.g, self.a):
            if v not in w:
                raise UnboundVariable(v)
        if self.real in reals:
            r = Fraction(reals[self.real])
        else:
            try:
                r = Fraction(self.real)
            except ValueError:
                raise UnboundVariable(self.real) from None
        a = w[self.a]
        if a < 0:
            return False
        scaled = r * (1 << a)
        return w[self.g] < scaled < w[self.g] + 1


@dataclass(frozen=True)
class Exp:
    """``base ** exponent == result``, each side a variable name or integer literal."""

    base: str
    exponent: str
    result: str

    def holds(self, w, reals) -> bool:
        b, e, r = (Poly.of(t).evaluate(w) for t in (self.base, self.exponent, self.result))
        if e < 0:
            return False
        return b**e == r


Atom = Union[PolyEq, Dominates, Interval, Exp]


@dataclass(frozen=True)
class ConstraintSystem:
    atoms: Tuple[Atom, ...] = ()

    @property
    def integer_variables(self) -> set:
        names = set()
        for atom in self.atoms:
            if isinstance(atom, PolyEq):
                names |= atom.poly.variables
            elif isinstance(atom, Dominates):
                names |= atom.lhs.variables | atom.rhs.variables
            elif isinstance(atom, Interval):
                names |= {atom.g, atom.a}
            else:
                names |= {t for t in (atom.base, atom.exponent, atom.result) if not t.lstrip("-").isdigit()}
        return names


def eval_system(system: ConstraintSystem, witness: Mapping[str, int], reals: Optional[Mapping[str, object]] = None) -> bool:
    """True iff every atom holds; raises :class:`UnboundVariable` on a missing binding."""
    reals = {k: _fraction(v) for k, v in (reals or {}).items()}
    w = {k: int(v) for k, v in witness.items()}
    missing = system.integer_variables - set(w)
    if missing:
        raise UnboundVariable(sorted(missing)[0])
    # evaluate every atom so a missing real binding is never masked by an earlier failure
    results = [atom.holds(w, reals) for atom in system.atoms]
    return all(results)


def system_to_json(system: ConstraintSystem) -> dict:
    atoms = []
    for atom in system.atoms:
        if isinstance(atom, PolyEq):
            atoms.append({"type": "poly_eq", "poly": atom.poly.to_json()})
        elif isinstance(atom, Dominates):
            atoms.append({"type": "dominates", "lhs": atom.lhs.to_json(), "rhs": atom.rhs.to_json()})
        elif isinstance(atom, Interval):
            atoms.append({"type": "interval", "g": atom.g, "a": atom.a, "real": atom.real})
        else:
            atoms.append({"type": "exp", "base": atom.base, "exponent": atom.exponent, "result": atom.result})
    return {"atoms": atoms}


def system_from_json(data: Union[str, dict]) -> ConstraintSystem:
    if isinstance(data, str):
        data = json.loads(data)
    atoms: List[Atom] = []
    for item in data.get("atoms", []):
        kind = item.get("type")
        if kind == "poly_eq":
            atoms.append(PolyEq(Poly.from_json(item["poly"])))
        elif kind == "dominates":
            atoms.append(Dominates(Poly.from_json(item["lhs"]), Poly.from_json(item["rhs"])))
        elif kind == "interval":
            atoms.append(Interval(item["g"], item["a"], str(item["real"])))
        elif kind == "exp":
            atoms.append(Exp(str(item["base"]), str(item["exponent"]), str(item["result"])))
        else:
            raise ValueError(f"unknown atom type {kind!r}")
    return ConstraintSystem(tuple(atoms))


# ---------------------------------------------------------------------------
# truncated runs of bit-reading machines


class TruncatedOutcome(enum.Enum):
    NORMAL_HALT = "NormalHalt"
    ABNORMAL = "Abnormal"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EncodedProgram:
    op: np.ndarray
    arg_a: np.ndarray
    arg_b: np.ndarray
    target: np.ndarray
    registers: Tuple[str, ...]
    sources: Tuple[str, ...]


def encode_program(program: Program) -> EncodedProgram:
    regs = program.registers
    sources = program.bit_sources
    ri = {r: k for k, r in enumerate(regs)}
    si = {s: k for k, s in enumerate(sources)}
    n = len(program)
    op = np.zeros(n, dtype=np.int64)
    a = np.zeros(n, dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    t = np.zeros(n, dtype=np.int64)
    for k, ins in enumerate(program.instructions):
        if isinstance(ins, Inc):
            op[k], a[k] = _kernels.OP_INC, ri[ins.reg]
        elif isinstance(ins, BranchEq):
            op[k], a[k], b[k], t[k] = _kernels.OP_BEQ, ri[ins.left], ri[ins.right], ins.target
        elif isinstance(ins, BitBranch):
            op[k], a[k], b[k], t[k] = _kernels.OP_BIT, si[ins.source], ri[ins.index], ins.target
        else:
            op[k] = _kernels.OP_HALT
    return EncodedProgram(op, a, b, t, regs, sources)


def run_truncated(
    program: Program,
    x,
    r=None,
    n: int = 1,
    steps_per_bit: int = 16,
    bit_sources: Sequence[str] = ("x", "r"),
) -> TruncatedOutcome:
    """Run a bit-reading machine on the first ``n`` digits of its real inputs.

    The interface stores ``n`` digits of each input and gives the machine a
    budget of ``steps_per_bit * n`` steps.  The run is normal only if the
    machine halts within budget without reading a digit it was not given.
    """
    if n < 1:
        raise ValueError("truncation length must be positive")
    reals = {bit_sources[0]: x}
    if r is not None:
        reals[bit_sources[1]] = r
    enc = encode_program(program)
    bits = np.zeros((max(len(enc.sources), 1), n), dtype=np.uint8)
    for k, name in enumerate(enc.sources):
        if name not in reals:
            raise MachineError(f"no real input bound to bit source {name!r}")
        stored = truncate(reals[name], n)
        # branch reads go through the stored integer, one mask per digit
        bits[k] = [bit_select(stored, i) for i in range(n)]
    regs = np.zeros(max(len(enc.registers), 1), dtype=np.int64)
    status, _, ip = _kernels.interpret(enc.op, enc.arg_a, enc.arg_b, enc.target, regs, bits, steps_per_bit * n)
    if status == _kernels.ST_FELL_OFF:
        raise MachineError(f"fell off program at ip={ip}")
    return TruncatedOutcome.NORMAL_HALT if status == _kernels.ST_HALT else TruncatedOutcome.ABNORMAL


def branch_domination_system() -> ConstraintSystem:
    """Constraints tying a taken bit branch to a zero input digit.

    Variables: ``T`` line activity of the branch, ``G`` the times the branch
    jumped to its target, ``S`` the input digit read at each time (placed
    at that time's bit), ``X`` = ``S`` masked to ``T``.  The jump may only happen
    where the branch line is active and the digit is 0: ``G`` is bitwise
    dominated by ``T - X``.
    """
    T, G, S, X = (Poly.var(v) for v in ("T", "G", "S", "X"))
    return ConstraintSystem(
        (
            Dominates(X, T),
            Dominates(X, S),
            Dominates(G, T - X),
        )
    )


def branch_witness(program: Program, x, n: int, branch_line: int, steps_per_bit: int = 16) -> Dict[str, int]:
    """Witness for :func:`branch_domination_system` read off a truncated run."""
    ins = program[branch_line]
    if not isinstance(ins, BitBranch):
        raise MachineError(f"line {branch_line} is not a bit branch")
    stored = truncate(x, n)
    regs = {reg: 0 for reg in program.registers}
    T = G = S = 0
    ip, t = 0, 0
    while not isinstance(program[ip], Halt):
        if t > steps_per_bit * n:
            raise MachineError("run exceeds its step budget")
        cur = program[ip]
        if isinstance(cur, Inc):
            regs[cur.reg] += 1
            ip += 1
        elif isinstance(cur, BranchEq):
            ip = cur.target if regs[cur.left] == regs[cur.right] else ip + 1
        else:
            digit = bit_select(stored, regs[cur.index])
            if ip == branch_line:
                T |= 1 << t
                S |= digit << t
                if digit == 0:
                    G |= 1 << t
            ip = cur.target if digit == 0 else ip + 1
        t += 1
    return {"T": T, "G": G, "S": S, "X": S & T}
