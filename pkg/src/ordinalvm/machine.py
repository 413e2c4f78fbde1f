"""Ordinal register machine: three instructions, limit steps, w-loop acceleration.

Instructions are ``Inc(r)``, ``BranchEq(a, b, target)`` and ``Halt()``.  Every
instruction takes one time step; ``Halt`` halts at the time it becomes active.
At a limit time control returns to instruction 0 and each register takes the
supremum of the values it held before.

Transfinite runs are simulated by stepping concretely and, when a pass through
the program provably repeats forever with constant register increments, by
jumping straight to the limit configuration (:func:`apply_limit`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .ordinal import ZERO, Ordinal, OrdinalLike, succ, sup_progression

__all__ = [
    "Inc",
    "BranchEq",
    "BitBranch",
    "Halt",
    "Instruction",
    "Program",
    "Configuration",
    "Halted",
    "LoopDescriptor",
    "ConcreteSegment",
    "LimitJump",
    "RunSummary",
    "OutOfFuel",
    "OutOfJumps",
    "MachineError",
    "FellOffProgram",
    "initial_configuration",
    "step",
    "detect_omega_loop",
    "apply_limit",
    "run",
]


class MachineError(Exception):
    pass


class FellOffProgram(MachineError):
    def __init__(self, ip: int, time: Ordinal):
        super().__init__(f"fell off program at ip={ip} t={time}")
        self.ip = ip
        self.time = time


@dataclass(frozen=True)
class Inc:
    reg: str

    def __str__(self):
        return f"INC {self.reg}"


@dataclass(frozen=True)
class BranchEq:
    left: str
    right: str
    target: int

    def __str__(self):
        return f"BEQ {self.left} {self.right} {self.target}"


@dataclass(frozen=True)
class BitBranch:
    """``if <source>[<index>] == 0 goto target``; only finite-time machines use it."""

    source: str
    index: str
    target: int

    def __str__(self):
        return f"BIT {self.source} {self.index} {self.target}"


@dataclass(frozen=True)
class Halt:
    def __str__(self):
        return "HALT"


Instruction = Union[Inc, BranchEq, BitBranch, Halt]


@dataclass(frozen=True)
class Program:
    instructions: Tuple[Instruction, ...]
    labels: Mapping[str, int] = field(default_factory=dict)
    source_lines: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if not self.instructions:
            raise MachineError("empty program")
        n = len(self.instructions)
        for i, ins in enumerate(self.instructions):
            target = getattr(ins, "target", None)
            if target is not None and not 0 <= target < n:
                raise MachineError(f"instruction {i} ({ins}) branches out of range")

    def __len__(self) -> int:
        return len(self.instructions)

    def __getitem__(self, ip: int) -> Instruction:
        return self.instructions[ip]

    @property
    def registers(self) -> Tuple[str, ...]:
        """Ordinal registers in sorted order (bit sources are not registers)."""
        regs = set()
        for ins in self.instructions:
            if isinstance(ins, Inc):
                regs.add(ins.reg)
            elif isinstance(ins, BranchEq):
                regs.update((ins.left, ins.right))
            elif isinstance(ins, BitBranch):
                regs.add(ins.index)
        return tuple(sorted(regs))

    @property
    def bit_sources(self) -> Tuple[str, ...]:
        return tuple(sorted({ins.source for ins in self.instructions if isinstance(ins, BitBranch)}))

    @property
    def halt_lines(self) -> Tuple[int, ...]:
        return tuple(i for i, ins in enumerate(self.instructions) if isinstance(ins, Halt))

    def listing(self) -> str:
        return "\n".join(f"{i}: {ins}" for i, ins in enumerate(self.instructions))


@dataclass(frozen=True)
class Configuration:
    time: Ordinal
    ip: int
    registers: Mapping[str, Ordinal]

    def with_(self, **changes) -> "Configuration":
        return Configuration(
            changes.get("time", self.time),
            changes.get("ip", self.ip),
            changes.get("registers", self.registers),
        )

    def __str__(self):
        regs = " ".join(f"{r}={v}" for r, v in sorted(self.registers.items()))
        return f"t={self.time} ip={self.ip} {regs}".rstrip()


@dataclass(frozen=True)
class Halted:
    time: Ordinal
    registers: Mapping[str, Ordinal]

    def __str__(self):
        regs = " ".join(f"{r}={v}" for r, v in sorted(self.registers.items()))
        return f"HALTED t={self.time} {regs}".rstrip()


@dataclass(frozen=True)
class OutOfFuel:
    configuration: Configuration

    def __str__(self):
        return f"OUT_OF_FUEL {self.configuration}"


@dataclass(frozen=True)
class OutOfJumps:
    configuration: Configuration

    def __str__(self):
        return f"OUT_OF_JUMPS {self.configuration}"


@dataclass(frozen=True)
class LoopDescriptor:
    entry_ip: int
    period: int
    deltas: Mapping[str, int]
    branch_signature: Tuple[bool, ...]
    # ip visited at each offset of one pass, starting with entry_ip
    path: Tuple[int, ...] = ()
    # register increments accumulated before each offset of a pass
    prefix_increments: Tuple[Mapping[str, int], ...] = field(default=(), compare=False, repr=False)

    def increments_before(self, offset: int) -> Mapping[str, int]:
        return self.prefix_increments[offset]


@dataclass(frozen=True)
class ConcreteSegment:
    configurations: Tuple[Configuration, ...]


@dataclass(frozen=True)
class LimitJump:
    loop: LoopDescriptor
    start: Configuration
    post: Configuration

    def configuration_at_offset(self, j: int) -> Configuration:
        """Configuration ``j`` steps after ``start`` (j finite, before the limit)."""
        passes, k = divmod(j, self.loop.period)
        inc = self.loop.increments_before(k)
        regs = {
            r: v + (passes * self.loop.deltas.get(r, 0) + inc.get(r, 0))
            for r, v in self.start.registers.items()
        }
        return Configuration(self.start.time + j, self.loop.path[k], regs)

    def first_offset(self, reg: str, value: Ordinal) -> Optional[int]:
        """Least offset at which ``reg`` equals ``value`` inside this jump, if any."""
        start = self.start.registers[reg]
        if start.limit_part != value.limit_part:
            return None
        gap = value.finite_part - start.finite_part
        if gap < 0:
            return None
        d = self.loop.deltas.get(reg, 0)
        best = None
        for k in range(self.loop.period):
            rest = gap - self.loop.increments_before(k).get(reg, 0)
            if rest < 0:
                continue
            if d == 0:
                if rest == 0:
                    best = k if best is None else min(best, k)
            elif rest % d == 0:
                j = (rest // d) * self.loop.period + k
                best = j if best is None else min(best, j)
        return best


Phase = Union[ConcreteSegment, LimitJump]
Outcome = Union[Halted, OutOfFuel, OutOfJumps]


@dataclass(frozen=True)
class RunSummary:
    program: Program
    phases: Tuple[Phase, ...]
    outcome: Outcome

    @property
    def registers(self) -> Tuple[str, ...]:
        return tuple(sorted(self.initial.registers))

    @property
    def initial(self) -> Configuration:
        first = self.phases[0]
        return first.configurations[0] if isinstance(first, ConcreteSegment) else first.start

    @property
    def jumps(self) -> Tuple[LimitJump, ...]:
        return tuple(p for p in self.phases if isinstance(p, LimitJump))

    def configurations(self) -> Iterator[Configuration]:
        """Concretely materialized configurations (limit jumps contribute their endpoints)."""
        for p in self.phases:
            if isinstance(p, ConcreteSegment):
                yield from p.configurations
            else:
                yield p.start

    def configuration_at(self, time: OrdinalLike) -> Configuration:
        time = Ordinal.of(time)
        for p in self.phases:
            if isinstance(p, ConcreteSegment):
                cs = p.configurations
                if cs and cs[0].time <= time <= cs[-1].time:
                    # concrete segments advance one step per configuration
                    return cs[time.finite_part - cs[0].time.finite_part]
            else:
                if p.start.time <= time < p.post.time:
                    return p.configuration_at_offset(time.finite_part - p.start.time.finite_part)
        raise MachineError(f"time {time} is not covered by this run")

    def first_time(self, reg: str, value: OrdinalLike) -> Optional[Ordinal]:
        """Earliest time at which ``reg`` holds ``value``, or None if never."""
        value = Ordinal.of(value)
        index = self.__dict__.setdefault("_first_time_index", {})
        for p in self.phases:
            if isinstance(p, ConcreteSegment):
                key = (id(p), reg)
                table = index.get(key)
                if table is None:
                    table = {}
                    for c in p.configurations:
                        table.setdefault(c.registers[reg], c.time)
                    index[key] = table
                if value in table:
                    return table[value]
            else:
                j = p.first_offset(reg, value)
                if j is not None:
                    return p.start.time + j
        return None


def initial_configuration(program: Program, inputs: Optional[Mapping[str, OrdinalLike]] = None) -> Configuration:
    inputs = dict(inputs or {})
    regs = {r: ZERO for r in program.registers}
    for name, value in inputs.items():
        if name not in regs:
            raise MachineError(f"input {name!r} is not a register of the program")
        regs[name] = Ordinal.of(value)
    return Configuration(ZERO, 0, regs)


def step(program: Program, c: Configuration) -> Union[Configuration, Halted]:
    if not 0 <= c.ip < len(program):
        raise FellOffProgram(c.ip, c.time)
    ins = program[c.ip]
    if isinstance(ins, Halt):
        return Halted(c.time, c.registers)
    if isinstance(ins, Inc):
        regs = dict(c.registers)
        regs[ins.reg] = succ(regs[ins.reg])
        nxt = Configuration(succ(c.time), c.ip + 1, regs)
    elif isinstance(ins, BranchEq):
        equal = c.registers[ins.left] == c.registers[ins.right]
        nxt = Configuration(succ(c.time), ins.target if equal else c.ip + 1, c.registers)
    else:
        raise MachineError(f"{ins} needs a real input; use diophantine.run_truncated")
    if nxt.ip >= len(program):
        raise FellOffProgram(nxt.ip, nxt.time)
    return nxt


def _flip_after(u: Ordinal, du: int, v: Ordinal, dv: int) -> Optional[int]:
    """First n >= 1 where ``u + n*du == v + n*dv`` differs from n = 0, or None."""
    if u.limit_part != v.limit_part:
        return None
    diff0 = u.finite_part - v.finite_part
    slope = du - dv
    if slope == 0:
        return None
    if diff0 == 0:
        return 1
    n, rem = divmod(-diff0, slope)
    return n if rem == 0 and n >= 1 else None


def _branch_stable(u: Ordinal, du: int, v: Ordinal, dv: int) -> bool:
    """Whether ``u + n*du == v + n*dv`` has the same truth value for every n >= 0."""
    return _flip_after(u, du, v, dv) is None


def detect_omega_loop(program: Program, c: Configuration, bound: int = 64) -> Optional[LoopDescriptor]:
    """Descriptor for a pass from ``c`` that repeats unchanged until the next limit.

    Returns None unless the repetition is certain.
    """
    return _detect(program, c, bound)[0]


def _detect(program: Program, c: Configuration, bound: int) -> Tuple[Optional[LoopDescriptor], int]:
    # The second value counts steps after c from which detection must fail
    # again: a pass whose earliest branch flips at iteration n repeats
    # verbatim until then, and every rotation of it still sees that flip.
    path = [c.ip]
    prefix = [{r: 0 for r in c.registers}]
    compares = []  # (left value, left reg, right value, right reg)
    signature = []
    cur = c
    for offset in range(bound):
        ins = program[cur.ip]
        if isinstance(ins, (Halt, BitBranch)):
            return None, 0
        if isinstance(ins, BranchEq):
            a, b = cur.registers[ins.left], cur.registers[ins.right]
            signature.append(a == b)
            compares.append((a, ins.left, b, ins.right))
        nxt = step(program, cur)
        counts = dict(prefix[-1])
        if isinstance(ins, Inc):
            counts[ins.reg] += 1
        if nxt.ip == c.ip:
            period = offset + 1
            deltas = counts
            flips = [f for a, ra, b, rb in compares if (f := _flip_after(a, deltas[ra], b, deltas[rb])) is not None]
            if flips:
                return None, (min(flips) - 1) * period
            return LoopDescriptor(c.ip, period, deltas, tuple(signature), tuple(path), tuple(prefix)), 0
        path.append(nxt.ip)
        prefix.append(counts)
        cur = nxt
    return None, 0


def apply_limit(loop: LoopDescriptor, start: Configuration) -> Configuration:
    regs = {}
    for r, v in start.registers.items():
        limit = sup_progression(v, loop.deltas.get(r, 0))
        # increment-only registers never decrease, so every limit exists
        assert limit >= v, "register sequence without a limit"
        regs[r] = limit
    return Configuration(sup_progression(start.time, loop.period), 0, regs)


def run(
    program: Program,
    inputs: Optional[Mapping[str, OrdinalLike]] = None,
    fuel: int = 100_000,
    max_jumps: int = 8,
    loop_bound: int = 64,
) -> RunSummary:
    """Run ``program`` for at most ``fuel`` concrete steps and ``max_jumps`` limits.

    With ``max_jumps == 0`` acceleration is disabled and the run is purely
    concrete.
    """
    if fuel < 0 or max_jumps < 0:
        raise ValueError("fuel and max_jumps must be natural")
    cur = initial_configuration(program, inputs)
    phases: List[Phase] = []
    segment: List[Configuration] = []
    jumps = 0
    spent = 0
    quiet = 0  # steps for which detection is known to fail
    outcome: Outcome
    while True:
        if quiet:
            quiet -= 1
        elif max_jumps > 0 and not isinstance(program[cur.ip], Halt):
            loop, quiet = _detect(program, cur, loop_bound)
            if loop is not None:
                if jumps == max_jumps:
                    segment.append(cur)
                    outcome = OutOfJumps(cur)
                    break
                if segment:
                    phases.append(ConcreteSegment(tuple(segment)))
                    segment = []
                post = apply_limit(loop, cur)
                phases.append(LimitJump(loop, cur, post))
                jumps += 1
                cur = post
                continue
        segment.append(cur)
        if spent == fuel and not isinstance(program[cur.ip], Halt):
            outcome = OutOfFuel(cur)
            break
        nxt = step(program, cur)
        if isinstance(nxt, Halted):
            outcome = nxt
            break
        spent += 1
        cur = nxt
    if segment:
        phases.append(ConcreteSegment(tuple(segment)))
    return RunSummary(program, tuple(phases), outcome)
