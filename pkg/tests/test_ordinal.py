import random

import pytest
from hypothesis import given, strategies as st

from ordinalvm.ordinal import (
    OMEGA,
    ONE,
    ZERO,
    Ordinal,
    OrdinalSyntaxError,
    add,
    compare,
    format_ordinal,
    is_limit,
    parse_ordinal,
    split,
    succ,
    sup_progression,
)

from conftest import ordinals

w = parse_ordinal


def poly_key(a, base=10**6):
    # independent order oracle: w^e*c read as c*base^e with coefficients far below base
    return sum(c * base**e for e, c in a.terms)


@pytest.mark.parametrize(
    "a, expected",
    [("0", "1"), ("w", "w+1"), ("w^2+w*3", "w^2+w*3+1")],
)
def test_succ_examples(a, expected):
    assert succ(w(a)) == w(expected)


@pytest.mark.parametrize(
    "a, b, expected",
    [("1", "w", "w"), ("w", "1", "w+1"), ("w+3", "w*2", "w*3"), ("w^2+5", "w^2", "w^2*2")],
)
def test_add_examples(a, b, expected):
    assert add(w(a), w(b)) == w(expected)


@pytest.mark.parametrize("a, expected", [("0", False), ("w*2", True), ("w+4", False), ("w^3", True)])
def test_is_limit(a, expected):
    assert is_limit(w(a)) is expected


@pytest.mark.parametrize("a, lim, fin", [("7", "0", 7), ("w*2+5", "w*2", 5), ("w^3", "w^3", 0)])
def test_split(a, lim, fin):
    assert split(w(a)) == (w(lim), fin)


@pytest.mark.parametrize(
    "base, d, expected",
    [("5", 1, "w"), ("w+2", 3, "w*2"), ("w^2", 0, "w^2"), ("w^2*2+w+9", 4, "w^2*2+w*2")],
)
def test_sup_progression(base, d, expected):
    assert sup_progression(w(base), d) == w(expected)


def test_sup_progression_is_least_bound_by_enumeration():
    # w+2+3n stays below w*2, and every w+k is overtaken, so no smaller bound exists
    base = w("w+2")
    terms = [add(base, n * 3) for n in range(10_000)]
    assert all(t < w("w*2") for t in terms)
    assert max(terms) == w("w+29999")
    assert all(any(t > add(OMEGA, k) for t in terms) for k in range(0, 29_999, 997))


def test_parse_format_examples():
    assert format_ordinal(w("w^2*3+w+4")) == "w^2*3+w+4"
    assert w("w*0+3") == Ordinal.of(3)
    assert str(Ordinal.omega(2, 3)) == "w^2*3"
    assert str(ZERO) == "0" and ONE == 1 and OMEGA == w("w")


@pytest.mark.parametrize("bad", ["", "x", "w^", "w**2", "3w", "w+-1", "w^2*"])
def test_parse_rejects(bad):
    with pytest.raises(OrdinalSyntaxError):
        parse_ordinal(bad)


def test_parse_format_round_trip_random_sample():
    rng = random.Random(1)
    for _ in range(1000):
        terms = [(rng.randint(0, 4), rng.randint(0, 9)) for _ in range(rng.randint(0, 4))]
        a = Ordinal(terms)
        assert parse_ordinal(format_ordinal(a)) == a


def test_ints_interoperate():
    assert Ordinal.of(3) + 4 == 7
    assert 2 + OMEGA == OMEGA
    assert Ordinal.of(5) < OMEGA and not OMEGA < 5
    assert int(Ordinal.of(9)) == 9


# -- algebraic properties -------------------------------------------------


@given(ordinals(), ordinals())
def test_compare_agrees_with_polynomial_oracle(a, b):
    ka, kb = poly_key(a), poly_key(b)
    assert compare(a, b) == (ka > kb) - (ka < kb)


@given(ordinals(), ordinals(), ordinals())
def test_add_associative(a, b, c):
    assert (a + b) + c == a + (b + c)


@given(ordinals(), ordinals())
def test_add_monotone_and_bounds(a, b):
    assert a <= a + b
    assert b <= a + b


@given(ordinals(), ordinals(), ordinals())
def test_left_strict_monotone(a, b, c):
    if b < c:
        assert a + b < a + c


@given(ordinals(), ordinals(), ordinals())
def test_right_weak_monotone(a, b, c):
    if a <= b:
        assert a + c <= b + c


@given(ordinals())
def test_succ_is_plus_one_and_covers(a):
    s = succ(a)
    assert s == a + 1
    assert a < s and not is_limit(s)


@given(ordinals())
def test_split_reassembles(a):
    lim, n = split(a)
    assert lim + n == a
    assert lim == 0 or is_limit(lim)


@given(ordinals(), st.integers(1, 20))
def test_sup_progression_bounds_every_term(a, d):
    s = sup_progression(a, d)
    assert is_limit(s)
    for n in range(50):
        assert add(a, d * n) < s
    # least: the limit part of a plus any finite amount is below s
    assert split(a)[0] + (d * 1000 + split(a)[1]) < s


@given(ordinals())
def test_hash_consistent_with_eq(a):
    b = Ordinal(list(a.terms))
    assert a == b and hash(a) == hash(b)


@given(ordinals(), ordinals())
def test_total_order(a, b):
    assert sum([a < b, a == b, b < a]) == 1
