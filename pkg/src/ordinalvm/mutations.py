"""Targeted corruptions of clean certificates, one per verifier check.

Each kind picks its site automatically from the record list (or takes an
explicit record position) and changes the stream only around that site.
``EXPECTED_RULE`` maps every kind to the rule the verifier must report.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Set

from .certificate import Control, Final, Inverse, Less, Limit, Record, Succ, Value

__all__ = ["MutationKind", "Mutation", "MutationSiteError", "EXPECTED_RULE", "mutate", "find_site"]


class MutationKind(enum.Enum):
    FINAL_NOT_FIRST = "FinalNotFirst"
    REVERSE_LESS = "ReverseLess"
    DROP_SUCC = "DropSucc"
    INSERT_CYCLE = "InsertCycle"
    WRONG_CONTROL_AT_LIMIT = "WrongControlAtLimit"
    WRONG_SUCCESSOR_CONTROL = "WrongSuccessorControl"
    NON_MONOTONE_VALUE = "NonMonotoneValue"
    BREAK_INVERSE = "BreakInverse"
    LATE_ORDER_FACT = "LateOrderFact"

    def __str__(self):
        return self.value


EXPECTED_RULE: Dict[MutationKind, str] = {
    MutationKind.FINAL_NOT_FIRST: "R1",
    MutationKind.REVERSE_LESS: "R4",
    MutationKind.DROP_SUCC: "R7",
    MutationKind.INSERT_CYCLE: "R4",
    MutationKind.WRONG_CONTROL_AT_LIMIT: "R8",
    MutationKind.WRONG_SUCCESSOR_CONTROL: "R7",
    MutationKind.NON_MONOTONE_VALUE: "R9",
    MutationKind.BREAK_INVERSE: "R10",
    MutationKind.LATE_ORDER_FACT: "R5",
}


class MutationSiteError(IndexError):
    pass


@dataclass(frozen=True)
class Mutation:
    kind: MutationKind
    site: Optional[int] = None  # record position; None picks the first suitable site


def _final_index(records: Sequence[Record]) -> Optional[int]:
    for rec in records:
        if isinstance(rec, Final):
            return rec.m
    return None


def _limits(records: Sequence[Record]) -> Set[int]:
    return {rec.m for rec in records if isinstance(rec, Limit)}


def _value_table(records: Sequence[Record]) -> Dict[tuple, int]:
    return {(rec.reg, rec.i): rec.v for rec in records if isinstance(rec, Value)}


def _candidates(records: Sequence[Record], kind: MutationKind) -> List[int]:
    final = _final_index(records)
    K = MutationKind
    if kind is K.FINAL_NOT_FIRST:
        return [p for p, r in enumerate(records) if isinstance(r, Final)]
    if kind in (K.REVERSE_LESS, K.INSERT_CYCLE):
        return [p for p, r in enumerate(records) if isinstance(r, Less) and final not in (r.n, r.m)]
    if kind is K.LATE_ORDER_FACT:
        # skip pairs that a Succ or the final index's inverses lean on; those fail sooner
        succ_pairs = {(r.n, r.m) for r in records if isinstance(r, Succ)}
        return [
            p for p, r in enumerate(records)
            if isinstance(r, Less) and final not in (r.n, r.m) and (r.n, r.m) not in succ_pairs
        ]
    if kind is K.DROP_SUCC:
        # a successor fact that another step also needs as the witness of an INC
        values = _value_table(records)
        steps = [(r.n, r.m) for r in records if isinstance(r, Succ)]
        witnesses = set()
        for n, m in steps:
            for (reg, i), v in values.items():
                if i == n and (reg, m) in values and values[reg, m] != v and (values[reg, m], v) != (m, n):
                    witnesses.add((values[reg, m], v))
        return [p for p, r in enumerate(records) if isinstance(r, Succ) and (r.m, r.n) in witnesses]
    if kind is K.WRONG_CONTROL_AT_LIMIT:
        limits = _limits(records)
        return [p for p, r in enumerate(records) if isinstance(r, Control) and r.i in limits]
    if kind is K.WRONG_SUCCESSOR_CONTROL:
        limits = _limits(records)
        succs = {r.m for r in records if isinstance(r, Succ)}
        return [
            p for p, r in enumerate(records)
            if isinstance(r, Control) and r.i in succs and r.i not in limits and r.i != final
        ]
    if kind is K.NON_MONOTONE_VALUE:
        return [p for p, _ in _monotone_sites(records)]
    if kind is K.BREAK_INVERSE:
        values = _value_table(records)
        return [
            p for p, r in enumerate(records)
            if isinstance(r, Inverse)
            and any(reg == r.reg and v != r.v for (reg, _), v in values.items())
        ]
    raise ValueError(f"unknown mutation kind {kind}")


def _monotone_sites(records: Sequence[Record]) -> List[tuple]:
    """``(position, smaller value)`` for values that can be lowered below their predecessor's.

    The site is ``Value(r, i, v)`` where ``r`` already holds ``v`` at the
    predecessor ``p`` of ``i`` and ``i`` is not the first index holding ``v``.
    The replacement ``w`` has a direct fact ``w < v`` earlier in the stream, so
    the decrease is decided as soon as ``p < i`` arrives, ahead of the
    successor fact the step check waits for.
    """
    pos_less = {}
    for p, r in enumerate(records):
        if isinstance(r, Less):
            pos_less.setdefault((r.n, r.m), p)
    pred = {r.m: r.n for r in records if isinstance(r, Succ)}
    firsts = {(r.reg, r.i) for r in records if isinstance(r, Inverse)}
    values = _value_table(records)
    out = []
    for p, r in enumerate(records):
        if not isinstance(r, Value) or r.i not in pred or (r.reg, r.i) in firsts:
            continue
        q = pred[r.i]
        step_at = pos_less.get((q, r.i))
        if values.get((r.reg, q)) != r.v or step_at is None or step_at < p:
            continue
        below = [w for (w, v), at in pos_less.items() if v == r.v and at < step_at]
        if below:
            out.append((p, min(below)))
    return out


def find_site(records: Sequence[Record], kind: MutationKind) -> int:
    sites = _candidates(records, kind)
    if not sites:
        raise MutationSiteError(f"no site for {kind} in a prefix of {len(records)} records")
    return sites[0]


def mutate(records: Sequence[Record], mutation: Mutation) -> List[Record]:
    records = list(records)
    kind = mutation.kind
    site = find_site(records, kind) if mutation.site is None else mutation.site
    if not 0 <= site < len(records):
        raise MutationSiteError(f"site {site} outside a prefix of {len(records)} records")
    if site not in _candidates(records, kind):
        raise MutationSiteError(f"record {site} ({records[site]}) is not a {kind} site")
    rec = records[site]
    K = MutationKind
    if kind is K.FINAL_NOT_FIRST:
        rest = records[:site] + records[site + 1:]
        first_less = next(p for p, r in enumerate(rest) if isinstance(r, Less))
        return rest[: first_less + 1] + [rec] + rest[first_less + 1:]
    if kind is K.REVERSE_LESS:
        records[site] = Less(rec.m, rec.n)
        return records
    if kind is K.INSERT_CYCLE:
        return records[: site + 1] + [Less(rec.m, rec.n)] + records[site + 1:]
    if kind is K.DROP_SUCC:
        return records[:site] + records[site + 1:]
    if kind is K.LATE_ORDER_FACT:
        return records[:site] + records[site + 1:] + [rec]
    if kind is K.WRONG_CONTROL_AT_LIMIT:
        records[site] = Control(rec.i, 2 if rec.line != 2 else 1)
        return records
    if kind is K.WRONG_SUCCESSOR_CONTROL:
        final = _final_index(records)
        lines = sorted({r.line for r in records if isinstance(r, Control) and r.i != final} - {rec.line})
        if not lines:
            raise MutationSiteError("no alternative control line in the prefix")
        records[site] = Control(rec.i, lines[0])
        return records
    values = _value_table(records)
    if kind is K.NON_MONOTONE_VALUE:
        records[site] = replace(rec, v=dict(_monotone_sites(records))[site])
        return records
    # BREAK_INVERSE: point the inverse at an index holding a different value
    other_i = next(i for (reg, i), v in values.items() if reg == rec.reg and v != rec.v)
    records[site] = replace(rec, i=other_i)
    return records
