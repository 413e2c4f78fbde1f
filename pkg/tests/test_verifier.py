import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ordinalvm.assembler import assemble
from ordinalvm.certificate import Control, Final, Inverse, Less, Limit, Succ, Value, certify
from ordinalvm.codec import encode_bits
from ordinalvm.machine import run
from ordinalvm.mutations import EXPECTED_RULE, Mutation, MutationKind, MutationSiteError, mutate
from ordinalvm.ordinal import parse_ordinal as w
from ordinalvm.verifier import AcceptPrefix, Reject, verify

import small_model
from conftest import PROGRAMS, WAITER_T


def rule(verdict):
    return verdict.rule if isinstance(verdict, Reject) else None


@pytest.fixture(scope="module")
def waiter_records():
    prog = assemble((PROGRAMS / "waiter.ovm").read_text())
    return prog, list(certify(run(prog, {"y": w("w")}), 3000))


# -- worked examples -------------------------------------------------------------


def test_final_first_accepted(waiter):
    assert verify(waiter, [Final(0)]) == AcceptPrefix(1)


def test_less_first_rejected(waiter):
    assert verify(waiter, [Less(1, 2)]) == Reject(0, "R1", "first z-statement is not Final")


def test_antisymmetry(waiter):
    v = verify(waiter, [Final(0), Less(3, 5), Less(5, 3)])
    assert (v.position, v.rule) == (2, "R4")


def test_empty_stream(waiter):
    assert verify(waiter, [], max_records=0) == AcceptPrefix(0)
    assert verify(waiter, "") == AcceptPrefix(0)


def test_clean_waiter_prefix_accepted(waiter):
    summary = run(waiter, {"y": w("w")})
    assert verify(waiter, certify(summary, 100_000)) == AcceptPrefix(100_000)


def test_bits_and_records_agree(waiter_records):
    prog, recs = waiter_records
    assert verify(prog, encode_bits(recs[:500])) == verify(prog, recs[:500]) == AcceptPrefix(500)


def test_frame_error(waiter):
    v = verify(waiter, encode_bits([Final(0)]) + "1110")
    assert (v.position, v.rule) == (1, "FRAME")


# -- one hand-made stream per rule --------------------------------------------


@pytest.mark.parametrize(
    "stream, expected",
    [
        ([Final(0), Final(0)], ("R1", 1)),
        ([Final(0), Control(0, 1)], ("R2", 1)),
        ([Final(0), Less(0, 1)], ("R3", 1)),
        ([Final(2), Less(1, 2), Control(1, 3)], ("R3", 2)),
        ([Final(0), Less(1, 0), Less(2, 0), Less(2, 1), Less(1, 2)], ("R4", 4)),
        ([Final(9), Less(3, 4), Less(4, 5), Less(5, 3)], ("R4", 3)),
        ([Final(0), Limit(1), Less(2, 0)], ("R5", 2)),
        ([Final(0), Less(1, 0), Succ(2, 1)], ("R6", 2)),
        ([Final(0), Less(1, 0), Less(2, 0), Less(1, 2), Less(2, 5), Less(5, 0), Succ(0, 1)], ("R6", 6)),
        ([Final(0), Less(1, 0), Limit(0), Succ(0, 1)], ("R6", 3)),
        ([Final(0), Less(1, 0), Limit(1), Control(1, 2)], ("R8", 3)),
    ],
)
def test_rules_by_hand(waiter, stream, expected):
    v = verify(waiter, stream)
    assert (v.rule, v.position) == expected, v


def test_r7_control_succession(waiter):
    # time 0 runs line 0 (x=0 vs y=w: not equal), so time 1 must run line 1
    stream = [Final(0), Less(1, 0), Less(3, 0), Less(1, 3), Succ(3, 1), Control(1, 0), Control(3, 2)]
    values = [Value(r, i, 1) for i in (1, 3) for r in range(2)]
    v = verify(waiter, stream + values)
    assert v.rule == "R7"


def test_r9_and_r10(waiter):
    base = [Final(0), Less(1, 0), Less(2, 0), Less(1, 2)]
    assert rule(verify(waiter, base + [Value(0, 1, 2), Value(0, 2, 1)])) == "R9"
    assert rule(verify(waiter, base + [Value(0, 1, 1), Inverse(0, 1, 2), Value(0, 2, 1)])) == "R10"
    assert rule(verify(waiter, base + [Value(0, 2, 2), Inverse(0, 2, 1), Value(0, 1, 1)])) == "R10"


# -- mutations ----------------------------------------------------------------


@pytest.mark.parametrize("kind", list(MutationKind))
def test_mutation_rejected_with_documented_rule(waiter_records, kind):
    prog, recs = waiter_records
    v = verify(prog, mutate(recs, Mutation(kind)))
    assert isinstance(v, Reject) and v.rule == EXPECTED_RULE[kind], v


@pytest.mark.parametrize("kind", list(MutationKind))
def test_mutation_rejected_on_scratch_register_waiter(kind):
    prog = assemble(WAITER_T)
    recs = list(certify(run(prog, {"y": w("w")}), 3000))
    v = verify(prog, mutate(recs, Mutation(kind)))
    assert v.rule == EXPECTED_RULE[kind], v


@pytest.mark.parametrize("name, y", [("twice.ovm", "w"), ("waiter.ovm", "w*3+2"), ("dec.ovm", "w+3")])
def test_mutations_rejected_elsewhere(name, y):
    # other programs may surface a corruption through a neighbouring rule first
    prog = assemble((PROGRAMS / name).read_text())
    recs = list(certify(run(prog, {"y": w(y)}), 3000))
    for kind in MutationKind:
        try:
            mutated = mutate(recs, Mutation(kind))
        except MutationSiteError:
            continue
        assert isinstance(verify(prog, mutated), Reject), kind


def test_mutation_site_errors(waiter_records):
    prog, recs = waiter_records
    with pytest.raises(MutationSiteError):
        mutate(recs, Mutation(MutationKind.REVERSE_LESS, site=1))
    with pytest.raises(MutationSiteError):
        mutate(recs, Mutation(MutationKind.REVERSE_LESS, site=10**6))
    with pytest.raises(MutationSiteError):
        mutate(recs[:1], Mutation(MutationKind.DROP_SUCC))


def test_mutation_changes_only_the_site(waiter_records):
    _, recs = waiter_records
    out = mutate(recs, Mutation(MutationKind.REVERSE_LESS))
    diff = [p for p, (a, b) in enumerate(zip(recs, out)) if a != b]
    assert len(out) == len(recs) and len(diff) == 1


# -- prefix monotonicity and completeness ------------------------------------------


@given(st.sampled_from(list(MutationKind)), st.integers(0, 40))
@settings(max_examples=40)
def test_prefix_monotone(kind, extra):
    prog = assemble((PROGRAMS / "waiter.ovm").read_text())
    recs = mutate(list(certify(run(prog, {"y": w("w")}), 600)), Mutation(kind))
    full = verify(prog, recs)
    p = full.position
    assert verify(prog, recs, max_records=p + 1 + extra) == full
    assert verify(prog, recs, max_records=max(p - extra, 0)) == AcceptPrefix(max(p - extra, 0))


@pytest.mark.parametrize(
    "name, inputs",
    [
        ("waiter.ovm", {"y": "5"}),
        ("waiter.ovm", {"y": "w*2"}),
        ("waiter.ovm", {"y": "w*3+4"}),
        ("twice.ovm", {"y": "w+1"}),
        ("dec.ovm", {"y": "w*2"}),
        ("dec.ovm", {"y": "w+6"}),
    ],
)
def test_generated_certificates_accepted(name, inputs):
    prog = assemble((PROGRAMS / name).read_text())
    summary = run(prog, {k: w(v) for k, v in inputs.items()})
    recs = list(certify(summary, 5000))
    assert verify(prog, recs) == AcceptPrefix(len(recs))


def test_deterministic(waiter_records):
    prog, recs = waiter_records
    bad = mutate(recs, Mutation(MutationKind.BREAK_INVERSE))
    assert verify(prog, bad) == verify(prog, bad)


# -- small-model order semantics ---------------------------------------------------


def _agree(prog, streams):
    n = 0
    for s in streams:
        got = isinstance(verify(prog, s), AcceptPrefix)
        assert got == small_model.oracle_accepts(s), (s, verify(prog, s))
        n += 1
    return n


def test_small_model_short_streams(waiter):
    assert _agree(waiter, small_model.short_streams(3, 3)) == sum(24**n for n in range(4))


def test_small_model_tournaments(waiter):
    assert _agree(waiter, small_model.oriented_tournaments(5)) == 1024


def test_small_model_random_long_streams(waiter):
    rng = random.Random(3)
    alpha = small_model.alphabet(5)
    streams = []
    for _ in range(3000):
        base = list(small_model.canonical_stream(rng.sample(range(5), 5)))
        while len(base) < rng.randint(15, 30):
            base.insert(rng.randrange(1, len(base) + 1), rng.choice(base[1:] + alpha))
        streams.append(tuple(base))
    _agree(waiter, streams)
