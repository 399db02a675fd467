import random

import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from thtc.syntax import TemporalTerm
from thtc.trace import (
    TRUE,
    HTcTrace,
    PartialValuation,
    Trace,
    format_value,
    leq,
    parse_value,
    proper_weakenings,
    strictly_less,
)

from helpers import sample_model


def trace(*states):
    return Trace(list(states))


class TestValueAt:
    def test_skips_over_undefined_state(self):
        t = trace({"x": 4}, {}, {"x": 5})
        assert t.value_at(0, TemporalTerm("x", 2)) == Fraction(5)

    def test_past_the_end_is_undefined(self):
        t = trace({"x": 4}, {}, {"x": 5})
        assert t.value_at(2, TemporalTerm("x", 1)) is None

    def test_before_the_start_is_undefined(self):
        t = trace({"x": 4}, {"x": 5})
        assert t.value_at(0, TemporalTerm("x", -1)) is None

    def test_sample_previous_value(self):
        model = sample_model()
        assert model.here.value_at(1, TemporalTerm("x", -1)) == Fraction(4)

    def test_one_is_always_defined(self):
        t = trace({})
        assert t.value_at(0, TemporalTerm("1", 7)) == Fraction(1)

    def test_index_out_of_range(self):
        t = trace({"x": 1})
        with pytest.raises(IndexError):
            t.value_at(1, TemporalTerm("x", 0))


class TestOrdering:
    def test_undefined_below_defined(self):
        a = trace({"x": 4}, {}, {"x": 5})
        b = trace({"x": 4}, {"x": 1}, {"x": 5})
        assert leq(a, b)

    def test_reflexive(self):
        a = trace({"x": 4}, {"y": TRUE})
        assert leq(a, a)

    def test_conflicting_values(self):
        assert not leq(trace({"x": 4}), trace({"x": 5}))

    def test_strict_needs_difference(self):
        assert strictly_less(trace({}), trace({"x": 4}))
        assert not strictly_less(trace({"x": 4}), trace({"x": 4}))
        assert not strictly_less(trace({"x": 4}), trace({}))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            leq(trace({}), trace({}, {}))


values_strategy = st.one_of(
    st.none(),
    st.sampled_from([Fraction(0), Fraction(1), Fraction(2)]),
)


@st.composite
def traces(draw, lam=None):
    lam = lam if lam is not None else draw(st.integers(1, 3))
    states = []
    for _ in range(lam):
        state = {}
        for name in ("x", "y"):
            value = draw(values_strategy)
            if value is not None:
                state[name] = value
        states.append(state)
    return Trace(states)


@given(traces(lam=2), traces(lam=2), traces(lam=2))
def test_partial_order(a, b, c):
    assert leq(a, a)
    if leq(a, b) and leq(b, a):
        assert a == b
    if leq(a, b) and leq(b, c):
        assert leq(a, c)


@given(traces())
def test_weakenings_are_strictly_below(t):
    count = 0
    for w in proper_weakenings(t):
        count += 1
        assert strictly_less(w, t)
        assert w != t
    assert count == 2 ** len(t.defined_entries()) - 1


class TestWeakenings:
    def test_single_entry(self):
        out = list(proper_weakenings(trace({"x": 4})))
        assert out == [trace({})]

    def test_two_entries(self):
        assert len(list(proper_weakenings(trace({"x": 4, "y": 6})))) == 3

    def test_no_entries(self):
        assert list(proper_weakenings(trace({}, {}))) == []


class TestHTcTrace:
    def test_rejects_incomparable(self):
        with pytest.raises(ValueError):
            HTcTrace(trace({"x": 4}), trace({}))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            HTcTrace(trace({}), trace({}, {}))

    def test_sample_is_valid(self):
        model = sample_model()
        assert model.length == 4
        assert leq(model.here, model.there)


class TestValues:
    def test_round_trip_decimals(self):
        for text in ("11.35", "-2.301", "89.049", "0", "400", "1/3", "-7/20"):
            assert format_value(parse_value(text)) in (text, format_value(Fraction(text)))

    def test_exact_decimal_formatting(self):
        assert format_value(Fraction("11.35")) == "11.35"
        assert format_value(Fraction("-2.301")) == "-2.301"
        assert format_value(Fraction(1, 3)) == "1/3"
        assert format_value(Fraction(-7, 20)) == "-0.35"
        assert format_value(TRUE) == "t"
        assert format_value(None) == "u"

    def test_truth_distinct_from_rationals(self):
        assert TRUE != Fraction(1)
        assert parse_value("t") is TRUE

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_value("1.2.3")

    def test_valuation_normalizes(self):
        v = PartialValuation({"x": 4, "y": None})
        assert v.defined() == {"x"}
        assert v.get("y") is None
        assert v.get("1") == Fraction(1)
