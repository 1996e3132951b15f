from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from actr_confluence.actr import (
    NIL_ID, ActrState, BufferTest, ActrRule, ChunkType, ModelError, actr_step, check_state, to_set_normal_form,
)
from actr_confluence.gen import random_model, random_state, reachable
from actr_confluence.parser import format_model, parse_model
from actr_confluence.terms import Var

import random

X, Y = Var("X"), Var("Y")
TYPES = (ChunkType("g", ("current",)), ChunkType("order", ("first", "second")))


def test_counting_model_shape(det_model):
    assert [r.name for r in det_model.rules] == ["count"]
    assert {t.name for t in det_model.types} == {"number", "g", "order"}
    assert len(det_model.initial.store) == 6
    assert det_model.initial.buffers == {"goal": ("g0", 0), "retrieval": ("a", 0)}


def test_buffers_only_model():
    m = parse_model("buffers goal, retrieval.")
    assert m.rules == () and m.types == ()
    # empty buffers hold the implicit nil chunk
    assert m.initial.buffers["goal"][0] == NIL_ID


@pytest.mark.parametrize("src, msg", [
    ("buffers goal. type g(c). rule r { goal: g(c: X) ==> modify goal g(c: X); clear goal }", "duplicate action"),
    ("buffers goal. type g(c). rule r { goal: h(c: X) ==> }", "undeclared type"),
    ("buffers goal. type g(c). rule r { imaginal: g(c: X) ==> }", "undeclared buffer"),
    ("buffers goal. type g(c). rule r { goal: g(d: X) ==> }", "not in type"),
    ("buffers goal. type g(c). rule r { goal: g() ==> request goal g(c: X) }", "unbound variable"),
    ("buffers goal. type g(c). chunk x : g(c: y).", "undeclared chunk"),
    ("buffers goal. type g(c). chunk x : g(c: x). chunk x : g(c: x).", "duplicate chunk identifier"),
    ("buffers goal. type nil.", "reserved"),
    ("buffers goal. type g(c). chunk x : g(c: x). rule r { goal: g(c: y) ==> }", "not a declared chunk"),
    ("buffers goal. type g(c). rule r { goal: g(c: X) ==> modify goal h(c: X) }", "undeclared type"),
])
def test_validation_errors(src, msg):
    with pytest.raises(ModelError, match=msg):
        parse_model(src)


def test_syntax_error_has_location():
    with pytest.raises(ModelError) as e:
        parse_model("buffers goal.\ntype g(c)\nchunk x : g(c: x).")
    assert e.value.line == 3 and e.value.col == 1


def test_modify_needs_matching_test():
    src = "buffers goal. type g(c). type h(c). rule r { goal: g(c: X) ==> modify goal h(c: X) }"
    with pytest.raises(ModelError, match="needs a test"):
        parse_model(src)


def test_set_normal_form_examples():
    r = ActrRule("r", (BufferTest("goal", "g", (("current", X),)),))
    assert to_set_normal_form(r, TYPES).lhs == r.lhs
    r = ActrRule("r", (BufferTest("retrieval", "order", (("first", X),)),))
    (t,) = to_set_normal_form(r, TYPES).lhs
    assert t.svp == (("first", X), ("second", Var("V1")))
    r = ActrRule("r", (BufferTest("retrieval", "order", (("first", X), ("first", Y))),))
    with pytest.raises(ModelError, match="inconsistent duplicate slot test"):
        to_set_normal_form(r, TYPES)
    r = ActrRule("r", (BufferTest("retrieval", "order", (("third", X),)),))
    with pytest.raises(ModelError):
        to_set_normal_form(r, TYPES)


def test_set_normal_form_consistent_duplicate_is_merged():
    r = ActrRule("r", (BufferTest("goal", "g", (("current", X), ("current", X))),))
    assert to_set_normal_form(r, TYPES).lhs[0].svp == (("current", X),)


def test_fresh_padding_avoids_existing_names():
    r = ActrRule("r", (BufferTest("retrieval", "order", (("first", Var("V1")),)),))
    (t,) = to_set_normal_form(r, TYPES).lhs
    assert dict(t.svp)["second"] == Var("V2")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_set_normal_form_idempotent(seed):
    m = random_model(random.Random(seed))
    for r in m.rules:
        once = to_set_normal_form(r, m.types)
        assert to_set_normal_form(once, m.types) == once
        for t in once.lhs:
            assert sorted(s for s, _ in t.svp) == sorted(m.type_slots[t.ctype])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_parse_print_roundtrip(seed):
    m = random_model(random.Random(seed))
    again = parse_model(format_model(m))
    assert again.types == m.types and again.buffers == m.buffers and again.rules == m.rules
    assert again.initial == m.initial and again.facts == m.facts
    assert format_model(again) == format_model(m)


def test_counting_step(det_model):
    (succ,) = actr_step(det_model.initial, det_model)
    name, s = succ
    assert name == "count"
    goal = s.store[s.buffers["goal"][0]]
    ret = s.store[s.buffers["retrieval"][0]]
    assert goal.value("current") == "2"
    assert (ret.ctype, ret.value("first"), ret.value("second")) == ("order", "2", "3")


def test_stuck_state_has_no_successor(det_model):
    gamma = (("goal", "g0", Fraction(0)), ("retrieval", "b", Fraction(0)))
    assert actr_step(ActrState(det_model.initial.store, gamma), det_model) == set()


def test_nonzero_delay_blocks(det_model):
    gamma = (("goal", "g0", Fraction(0)), ("retrieval", "a", Fraction(1)))
    assert actr_step(ActrState(det_model.initial.store, gamma), det_model) == set()


def test_ambiguous_request_from_start_state(ambig_model):
    # state where goal current = 0 and retrieval holds z: the request for first: 1 has two answers
    outs = actr_step(ambig_model.initial, ambig_model)
    seconds = set()
    for _, s in outs:
        seconds.add(s.store[s.buffers["retrieval"][0]].value("second"))
    assert len(outs) == 2 and seconds == {"2", "3"}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_successors_are_valid_states(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    roots = [m.initial, random_state(rng, m)]
    states, _, _ = reachable(m, roots, max_depth=3, max_states=30)
    for s in states:
        check_state(s, m)


def test_check_state_rejects_bad_states(det_model):
    store = det_model.initial.store
    with pytest.raises(ModelError):
        check_state(ActrState(store, (("goal", "g0", Fraction(0)),)), det_model)
    with pytest.raises(ModelError):
        check_state(ActrState(store, (("goal", "zz", Fraction(0)), ("retrieval", "a", Fraction(0)))), det_model)
    with pytest.raises(ModelError):
        check_state(ActrState(store, (("goal", "g0", Fraction(-1)), ("retrieval", "a", Fraction(0)))), det_model)
