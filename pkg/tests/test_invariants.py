import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mutations import MUTATIONS

from actr_confluence.chr import ChrState, match_rule, states_equivalent
from actr_confluence.confluence import CheckOptions, check_confluence
from actr_confluence.gen import random_model, random_state
from actr_confluence.invariants import (
    InvariantError, check_A, check_A1, check_A2, check_A3, check_A4, check_A5, fresh_constants,
    reconstruct_actr, satisfiable_A,
)
from actr_confluence.terms import Fn, Var
from actr_confluence.translation import chunk_term, theory_for, translate_model, translate_state


def delta(*chunks):
    return Fn("delta", (frozenset(chunks),))


def gamma(b, c, e=0):
    return Fn("gamma", (b, c, Fraction(e)))


C1 = chunk_term("c1", "g", [("current", "c1")])


@pytest.fixture
def goal_model():
    from actr_confluence.parser import parse_model
    return parse_model("buffers goal.\ntype g(current).\nfacts busy/1.\nchunk c1 : g(current: c1).\nbuffer goal = c1.\n")


def test_valid_state_holds(goal_model, det_model):
    s = ChrState((delta(C1), gamma("goal", "c1")), ())
    assert check_A(s, goal_model.signature).holds
    assert check_A(translate_state(det_model.initial), det_model.signature).holds


def test_A1_examples(goal_model):
    sig = goal_model.signature
    assert check_A1(ChrState((delta(C1), delta(C1), gamma("goal", "c1")), ()), sig).fired == {"A1"}
    partial = chunk_term("c1", "g", [])
    assert not check_A1(ChrState((delta(partial), gamma("goal", "c1")), ()), sig).holds


def test_A2_examples(goal_model):
    sig = goal_model.signature
    assert not check_A2(ChrState((delta(C1), gamma("goal", "c1"), gamma("goal", "c1", 1)), ()), sig).holds
    assert not check_A2(ChrState((delta(C1),), ()), sig).holds
    assert not check_A2(ChrState((delta(C1), gamma("goal", "zz")), ()), sig).holds
    assert check_A2(ChrState((delta(C1), gamma("goal", "c1")), ()), sig).holds


def test_A3_examples(goal_model):
    other = chunk_term("c1", "nil", [])
    same_type = chunk_term("c1", "g", [("current", "c2")])
    assert not check_A3(ChrState((delta(C1, other),), ())).holds
    assert not check_A3(ChrState((delta(C1, same_type),), ())).holds
    assert check_A3(ChrState((delta(C1),), ())).holds


def test_A4_examples():
    bad = Fn("chunk", ("a", "order", frozenset({("first", "1"), ("first", "2")})))
    ok = chunk_term("a", "order", [("first", "1"), ("second", "2")])
    assert not check_A4(ChrState((delta(bad),), ())).holds
    assert check_A4(ChrState((delta(ok),), ())).holds
    assert check_A4(ChrState((delta(chunk_term("n", "nil", [])),), ())).holds


def test_A5_examples(goal_model):
    sig = goal_model.signature
    assert not check_A5(ChrState((delta(C1), gamma("goal", "c1"), Fn("foo", ("x",))), ()), sig).holds
    assert not check_A5(ChrState((delta(C1), Fn("gamma", ("goal", Var("C"), 0))), ()), sig).holds
    assert check_A5(ChrState((delta(C1), gamma("goal", "c1")), (Fn("busy", ("goal",)),)), sig).holds
    assert not check_A5(ChrState((delta(C1), gamma("goal", "c1")), (Fn("idle", ("goal",)),)), sig).holds


def test_reconstruct(det_model, goal_model):
    s = translate_state(det_model.initial)
    assert reconstruct_actr(s, det_model.signature) == det_model.initial
    with pytest.raises(InvariantError):
        reconstruct_actr(ChrState((delta(C1),), ()), goal_model.signature)
    fact = ChrState((delta(C1), gamma("goal", "c1")), (Fn("busy", ("goal",)),))
    assert reconstruct_actr(fact, goal_model.signature).upsilon == (Fn("busy", ("goal",)),)


def _universe(model, pad=2):
    k = model.constants()
    return sorted(k) + fresh_constants(k, pad)


def test_satisfiable_examples(det_model):
    (r,) = translate_model(det_model)
    th, sig = theory_for(det_model), det_model.signature
    a, b = r.renamed("#1"), r.renamed("#2")
    two_deltas = ChrState(a.head + b.head[:1], a.guard)
    assert not satisfiable_A(two_deltas, _universe(det_model), sig, th)
    two_goal_gammas = ChrState(a.head + b.head[1:2], a.guard + b.guard)
    assert not satisfiable_A(two_goal_gammas, _universe(det_model), sig, th)
    full = ChrState(a.head, a.guard)
    assert satisfiable_A(full, _universe(det_model), sig, th)


@pytest.mark.parametrize("name", ["counting_det", "counting_ambig"])
def test_pruning_is_stable_under_extra_padding(models_dir, name):
    from actr_confluence.parser import load_model
    m = load_model(models_dir / f"{name}.actr")
    th, sig = theory_for(m), m.signature
    report = check_confluence(m, CheckOptions(show_all=True))
    pruned = [r for r in report.results if r.pruned]
    assert pruned
    for r in pruned:
        assert not satisfiable_A(r.overlap.state, _universe(m, 3), sig, th)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_mutations_fire_exactly_one_invariant(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    s = translate_state(random_state(rng, m))
    for _, mutate, expected in MUTATIONS:
        t = mutate(s)
        if t is not None:
            assert check_A(t, m.signature, theory_for(m)).fired == {expected}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 4))
def test_check_A_is_equivalence_invariant(seed, k):
    rng = random.Random(seed)
    m = random_model(rng)
    s = translate_state(random_state(rng, m))
    if k < len(MUTATIONS):
        s = MUTATIONS[k][1](s) or s
    shuffled = ChrState(tuple(rng.sample(s.goal, len(s.goal))), s.builtins + (Fn("true"),), s.globals)
    assert states_equivalent(s, shuffled)
    sig, th = m.signature, theory_for(m)
    assert check_A(s, sig, th).holds == check_A(shuffled, sig, th).holds


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_transitions_preserve_invariant(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    s = translate_state(random_state(rng, m))
    th = theory_for(m)
    for r in translate_model(m):
        for _, t in match_rule(s, r, th):
            assert check_A(t, m.signature, th).holds
