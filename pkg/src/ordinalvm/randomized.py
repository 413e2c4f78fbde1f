"""Seeded random program generators and the acceleration soundness check."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from . import _kernels
from .diophantine import encode_program
from .machine import BitBranch, BranchEq, Halt, Halted, Inc, Program, run

__all__ = ["random_program", "random_bit_reader", "SoundnessTrial", "soundness_trials"]

_REGS = ("a", "b", "c")


def random_program(rng: random.Random, max_len: int = 6) -> Program:
    """A random INC/BEQ/HALT program of 2..max_len instructions ending in HALT."""
    if max_len >= 4 and rng.random() < 0.6:
        return _loop_program(rng, max_len)
    n = rng.randint(2, max_len)
    body = []
    for _ in range(n - 1):
        roll = rng.random()
        if roll < 0.4:
            body.append(Inc(rng.choice(_REGS)))
        elif roll < 0.9:
            body.append(BranchEq(rng.choice(_REGS), rng.choice(_REGS), rng.randrange(n)))
        else:
            body.append(Halt())
    return Program(tuple(body) + (Halt(),))


def _loop_program(rng: random.Random, max_len: int) -> Program:
    # exit test, a random body, an unconditional jump back; HALT at the end
    n = rng.randint(4, max_len)
    u, v = rng.sample(_REGS, 2)
    body: List = [BranchEq(u, v, n - 1)]
    bumpable = [r for r in _REGS if r != v]
    for k in range(n - 3):
        if k == 0 or rng.random() < 0.7:
            body.append(Inc(u if k == 0 else rng.choice(bumpable)))
        else:
            body.append(BranchEq(rng.choice(_REGS), rng.choice(_REGS), rng.randrange(n)))
    r = rng.choice(_REGS)
    body.append(BranchEq(r, r, rng.randrange(n - 2)))
    return Program(tuple(body) + (Halt(),))


def random_bit_reader(rng: random.Random, max_reads: int = 8) -> Program:
    """A loop-free machine that reads at most ``max_reads`` digits of ``x``.

    Each block reads ``x[i]``, optionally bumps ``i`` and some scratch
    registers; a zero digit may skip ahead to a later block.  Every jump goes
    forward, so the run halts after at most one read per block.
    """
    blocks = rng.randint(1, max_reads)
    sizes: List[List] = []
    for _ in range(blocks):
        code: List = [None]  # BIT placeholder, target patched below
        if rng.random() < 0.8:
            code.append(Inc("i"))
        for _ in range(rng.randint(0, 2)):
            code.append(Inc(rng.choice(("s", "u"))))
        sizes.append(code)
    starts, pos = [], 0
    for code in sizes:
        starts.append(pos)
        pos += len(code)
    end = pos
    out = []
    for k, code in enumerate(sizes):
        later = starts[k + 1:] + [end]
        code[0] = BitBranch("x", "i", rng.choice(later))
        out.extend(code)
    out.append(Halt())
    return Program(tuple(out))


def _halts_finitely(prog: Program, inputs: Dict[str, int], fuel: int) -> bool:
    # cheap screen on the integer interpreter, independent of the ordinal one
    enc = encode_program(prog)
    regs = np.array([inputs.get(r, 0) for r in enc.registers] or [0], dtype=np.int64)
    status, _, _ = _kernels.interpret(
        enc.op, enc.arg_a, enc.arg_b, enc.target, regs, np.zeros((1, 1), dtype=np.uint8), fuel + 1
    )
    return status == _kernels.ST_HALT


@dataclass(frozen=True)
class SoundnessTrial:
    program: Program
    inputs: Dict[str, int]
    accelerated: object
    plain: object

    @property
    def agrees(self) -> bool:
        a, p = self.accelerated, self.plain
        return isinstance(a, Halted) and isinstance(p, Halted) and a.time == p.time and a.registers == p.registers


def soundness_trials(seed: int, count: int = 50, fuel: int = 10_000, max_len: int = 6, give_up: int = 100_000) -> List[SoundnessTrial]:
    """``count`` random programs that halt without acceleration, each also run with it."""
    rng = random.Random(seed)
    trials: List[SoundnessTrial] = []
    for _ in range(give_up):
        if len(trials) == count:
            break
        prog = random_program(rng, max_len)
        inputs = {r: rng.randint(0, 5) for r in prog.registers}
        if not _halts_finitely(prog, inputs, fuel):
            continue
        plain = run(prog, inputs, fuel=fuel, max_jumps=0).outcome
        if not isinstance(plain, Halted):
            continue
        if plain.time.finite_part < 2 * len(prog) and rng.random() < 0.8:
            continue  # mostly keep runs that loop at least once
        accel = run(prog, inputs, fuel=fuel).outcome
        trials.append(SoundnessTrial(prog, inputs, accel, plain))
    return trials
