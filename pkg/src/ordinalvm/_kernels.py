"""Hot loops: batched bit operations and the finite register-machine interpreter.

Each kernel exists twice: a numba ``@njit`` version and a pure numpy/Python
fallback with identical results.  Set ``ORDINALVM_DISABLE_NUMBA=1`` (or run
without numba installed) to use the fallbacks.  Both variants stay importable
as ``*_jit`` / ``*_py`` so the benchmark and the tests can compare them.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ORDINALVM_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# opcodes of the encoded finite machine
OP_INC = 0
OP_BEQ = 1
OP_HALT = 2
OP_BIT = 3

# interpreter status codes
ST_HALT = 0
ST_FUEL = 1
ST_OVERRUN = 2  # bit index beyond the stored prefix
ST_FELL_OFF = 3


def dominates_py(a, b):
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return (a & ~b) == 0


@_njit
def _dominates_loop(a, b, out):
    for k in range(a.shape[0]):
        out[k] = (a[k] & ~b[k]) == 0


def dominates_jit(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
    out = np.empty(a.size, dtype=np.bool_)
    _dominates_loop(np.ascontiguousarray(a).ravel(), np.ascontiguousarray(b).ravel(), out)
    return out.reshape(a.shape)


def bit_select_py(x, i):
    x = np.asarray(x, dtype=np.uint64)
    mask = np.left_shift(np.uint64(1), np.asarray(i, dtype=np.uint64))
    return ((x & mask) != 0).astype(np.uint8)


@_njit
def _bit_select_loop(x, i, out):
    one = np.uint64(1)
    for k in range(x.shape[0]):
        out[k] = 1 if (x[k] & (one << np.uint64(i[k]))) != 0 else 0


def bit_select_jit(x, i):
    x, i = np.broadcast_arrays(np.asarray(x, dtype=np.uint64), np.asarray(i, dtype=np.uint64))
    out = np.empty(x.size, dtype=np.uint8)
    _bit_select_loop(np.ascontiguousarray(x).ravel(), np.ascontiguousarray(i).ravel(), out)
    return out.reshape(x.shape)


def stretch_py(g, n):
    g = np.asarray(g, dtype=np.uint64)
    out = np.zeros_like(g)
    for i in range(64):
        if n * i >= 64:
            break
        bit = (g >> np.uint64(i)) & np.uint64(1)
        out |= bit << np.uint64(n * i)
    return out


@_njit
def _stretch_loop(g, n, out):
    for k in range(g.shape[0]):
        v = g[k]
        r = np.uint64(0)
        i = 0
        while v != 0 and n * i < 64:
            if v & np.uint64(1):
                r |= np.uint64(1) << np.uint64(n * i)
            v >>= np.uint64(1)
            i += 1
        out[k] = r


def stretch_jit(g, n):
    g = np.asarray(g, dtype=np.uint64)
    out = np.empty(g.size, dtype=np.uint64)
    _stretch_loop(np.ascontiguousarray(g).ravel(), n, out)
    return out.reshape(g.shape)


def interpret_py(op, arg_a, arg_b, target, regs, bits, fuel):
    """Run an encoded finite machine in place on ``regs``.

    ``op[k]`` is one of the ``OP_*`` codes.  For INC ``arg_a`` is the register;
    for BEQ ``arg_a``/``arg_b`` are the compared registers; for BIT ``arg_a``
    is the bit source row of ``bits`` and ``arg_b`` the index register.
    ``bits[s, j]`` holds bit ``j`` of source ``s``; indices past the row end are
    an overrun.  Returns ``(status, steps, ip)``.
    """
    n = op.shape[0]
    width = bits.shape[1]
    ip = 0
    steps = 0
    while True:
        if ip >= n:
            return ST_FELL_OFF, steps, ip
        code = op[ip]
        if code == OP_HALT:
            return ST_HALT, steps, ip
        if steps >= fuel:
            return ST_FUEL, steps, ip
        if code == OP_INC:
            regs[arg_a[ip]] += 1
            ip += 1
        elif code == OP_BEQ:
            if regs[arg_a[ip]] == regs[arg_b[ip]]:
                ip = target[ip]
            else:
                ip += 1
        else:
            j = regs[arg_b[ip]]
            if j >= width:
                return ST_OVERRUN, steps, ip
            if bits[arg_a[ip], j] == 0:
                ip = target[ip]
            else:
                ip += 1
        steps += 1


interpret_jit = _njit(interpret_py)

if USE_NUMBA:
    dominates_many = dominates_jit
    bit_select_many = bit_select_jit
    stretch_many = stretch_jit
    interpret = interpret_jit
else:
    dominates_many = dominates_py
    bit_select_many = bit_select_py
    stretch_many = stretch_py
    interpret = interpret_py


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
