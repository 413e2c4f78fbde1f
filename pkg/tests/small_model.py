"""Brute-force oracle and exhaustive stream families for z-statement checking.

The oracle never looks at the verifier.  A z-only stream is accepted iff

* it is empty, or its first statement is the only ``Final``;
* every ``Succ(m, n)`` comes after a direct ``Less(n, m)``;
* every pair of mentioned indices with deadline ``D = 2(n+m)^2`` that is
  due inside the stream (``max(D, q) < len``, ``q`` where the pair became
  mentioned) has a direct order fact before position ``max(D, q)``;
* some linear order of the mentioned indices puts ``n`` before ``m`` for each
  ``Less(n, m)``, puts ``m`` right after ``n`` (no mentioned index between) for
  each ``Succ(m, n)``, has the ``Final`` index last, and gives no ``Limit``
  index a successor fact.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from ordinalvm.certificate import Final, Less, Limit, Succ

Stream = Tuple[object, ...]


def indices(st) -> Tuple[int, ...]:
    if isinstance(st, Less):
        return (st.n, st.m)
    if isinstance(st, Succ):
        return (st.m, st.n)
    return (st.m,)


def alphabet(k: int) -> List[object]:
    r = range(k)
    return (
        [Final(i) for i in r]
        + [Less(a, b) for a in r for b in r]
        + [Succ(a, b) for a in r for b in r]
        + [Limit(i) for i in r]
    )


@lru_cache(maxsize=None)
def _ranks(k: int) -> np.ndarray:
    """``ranks[p, x]`` = position of element x in permutation p of range(k)."""
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.int8).reshape(-1, k)
    ranks = np.empty_like(perms)
    rows = np.arange(len(perms))[:, None]
    ranks[rows, perms] = np.arange(k, dtype=np.int8)
    return ranks


def _orderable(stream: Sequence[object]) -> bool:
    mentioned = sorted({i for st in stream for i in indices(st)})
    if not mentioned:
        return True
    relabel = {x: j for j, x in enumerate(mentioned)}
    pos = _ranks(len(mentioned))
    ok = np.ones(len(pos), dtype=bool)
    succ_from, limits = set(), set()
    for st in stream:
        if isinstance(st, Less):
            ok &= pos[:, relabel[st.n]] < pos[:, relabel[st.m]]
        elif isinstance(st, Succ):
            # adjacent among the mentioned indices
            ok &= pos[:, relabel[st.m]] == pos[:, relabel[st.n]] + 1
            succ_from.add(st.m)
        elif isinstance(st, Final):
            ok &= pos[:, relabel[st.m]] == len(mentioned) - 1
        else:
            limits.add(st.m)
    if limits & succ_from:
        return False
    return bool(ok.any())


def oracle_accepts(stream: Sequence[object]) -> bool:
    if not stream:
        return True
    if not isinstance(stream[0], Final) or any(isinstance(st, Final) for st in stream[1:]):
        return False
    seen_less = set()
    first_mention = {}
    first_order = {}
    for p, st in enumerate(stream):
        if isinstance(st, Succ) and (st.n, st.m) not in seen_less:
            return False
        for i in indices(st):
            first_mention.setdefault(i, p)
        if isinstance(st, Less):
            seen_less.add((st.n, st.m))
            first_order.setdefault(frozenset((st.n, st.m)), p)
    for a, b in itertools.combinations(sorted(first_mention), 2):
        due = max(2 * (a + b) ** 2, first_mention[a], first_mention[b])
        if due < len(stream) and first_order.get(frozenset((a, b)), len(stream)) >= due:
            return False
    return _orderable(stream)


# -- families ---------------------------------------------------------------


def short_streams(k: int = 3, max_len: int = 3):
    """Every stream of length <= max_len over the full k-index alphabet."""
    alpha = alphabet(k)
    for n in range(max_len + 1):
        yield from itertools.product(alpha, repeat=n)


def canonical_stream(order: Sequence[int]) -> Stream:
    """z-statements of the finite order ``order[0] < order[1] < ...`` in index-sum order."""
    rank = {x: r for r, x in enumerate(order)}
    out = [Final(order[-1])]
    pairs = sorted(itertools.combinations(sorted(order), 2), key=lambda p: (p[0] + p[1], p[0]))
    for a, b in pairs:
        lo, hi = (a, b) if rank[a] < rank[b] else (b, a)
        out.append(Less(lo, hi))
        if rank[hi] == rank[lo] + 1:
            out.append(Succ(hi, lo))
    return tuple(out)


def single_edits(stream: Stream, alpha: Sequence[object]):
    """Every deletion, adjacent swap and single-symbol substitution of ``stream``."""
    n = len(stream)
    for p in range(n):
        yield stream[:p] + stream[p + 1:]
    for p in range(n - 1):
        yield stream[:p] + (stream[p + 1], stream[p]) + stream[p + 2:]
    for p in range(n):
        for sym in alpha:
            if sym != stream[p]:
                yield stream[:p] + (sym,) + stream[p + 1:]


def edited_orders(k: int = 5):
    alpha = alphabet(k)
    for order in itertools.permutations(range(k)):
        base = canonical_stream(order)
        yield base
        yield from single_edits(base, alpha)


def oriented_tournaments(k: int = 5):
    """Final(k-1) followed by one Less per pair, every orientation of every pair."""
    pairs = sorted(itertools.combinations(range(k), 2), key=lambda p: (p[0] + p[1], p[0]))
    for flips in itertools.product((False, True), repeat=len(pairs)):
        body = tuple(Less(b, a) if f else Less(a, b) for (a, b), f in zip(pairs, flips))
        yield (Final(k - 1),) + body
