"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--size N] [--repeat R]

Prints one line per kernel: best-of-R wall time for each backend and the ratio.
"""
import argparse
import time

import numpy as np

from ordinalvm import _kernels
from ordinalvm.assembler import assemble
from ordinalvm.diophantine import encode_program


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def interpreter_case():
    # count a up to 5000 in a loop: 10^4 steps
    enc = encode_program(assemble("0: BEQ a b 3\n1: INC a\n2: BEQ a a 0\n3: HALT"))
    bits = np.zeros((1, 1), dtype=np.uint8)

    def call(kernel):
        regs = np.array([0, 5000], dtype=np.int64)
        return kernel(enc.op, enc.arg_a, enc.arg_b, enc.target, regs, bits, 100_000)

    return call


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=1 << 20)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    a = rng.integers(0, 1 << 40, args.size, dtype=np.uint64)
    b = rng.integers(0, 1 << 40, args.size, dtype=np.uint64)
    i = rng.integers(0, 64, args.size, dtype=np.uint64)
    g = rng.integers(0, 1 << 16, args.size, dtype=np.uint64)
    run_interp = interpreter_case()

    cases = [
        ("dominates", lambda k: k(a, b), _kernels.dominates_jit, _kernels.dominates_py),
        ("bit_select", lambda k: k(a, i), _kernels.bit_select_jit, _kernels.bit_select_py),
        ("stretch n=4", lambda k: k(g, 4), _kernels.stretch_jit, _kernels.stretch_py),
        ("interpret 10^4 steps", run_interp, _kernels.interpret_jit, _kernels.interpret_py),
    ]
    print(f"numba available: {_kernels.HAVE_NUMBA}; active backend: {_kernels.backend()}; size {args.size}")
    print(f"{'kernel':<22} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, call, jit, py in cases:
        call(jit)  # compile outside the timing
        t_jit = best_of(lambda: call(jit), args.repeat)
        t_py = best_of(lambda: call(py), args.repeat)
        print(f"{name:<22} {t_jit * 1e3:>8.2f}ms {t_py * 1e3:>8.2f}ms {t_py / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
