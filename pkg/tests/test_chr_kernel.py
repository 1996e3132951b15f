
import pytest
from hypothesis import given, settings, strategies as st

from oracles import all_head_injections, witness_renaming
from strategies import chr_states, variants

from actr_confluence.chr import (
    FAILED, ChrRule, ChrState, TheoryError, entailments, entails, eq, format_state, match_rule, member,
    normalize, states_equivalent,
)
from actr_confluence.terms import Fn, Var
from actr_confluence.translation import theory_for, translate_model, translate_state

X, Y, C, D, E = Var("X"), Var("Y"), Var("C"), Var("D"), Var("E")


def gamma(b, c, e):
    return Fn("gamma", (b, c, e))


def test_normalize_applies_equalities():
    s = normalize(ChrState((gamma("goal", C, 0),), (eq(C, "c1"),)))
    assert s == ChrState((gamma("goal", "c1", 0),), (), frozenset())


def test_normalize_clash_fails():
    assert normalize(ChrState((gamma("goal", C, 0),), (eq("c1", "c2"),), frozenset({C}))) == FAILED
    assert normalize(ChrState((), (Fn("false"),))) == FAILED
    assert normalize(ChrState((), (member("a", frozenset({"b"})),))).failed


def test_normalize_keeps_global_bindings():
    s = normalize(ChrState((gamma("goal", C, 0),), (eq(C, "c1"),), frozenset({C})))
    assert s.builtins == (eq(C, "c1"),) and s.goal == (gamma("goal", "c1", 0),)


def test_normalize_renames_locals_canonically():
    a = ChrState((Fn("p", (X, Y)), Fn("p", (Y, "a"))), ())
    b = ChrState((Fn("p", (Var("Q"), "a")), Fn("p", (Var("R"), Var("Q")))), ())
    assert normalize(a) == normalize(b)


def test_ground_membership_is_evaluated():
    s = normalize(ChrState((Fn("p", ("a",)),), (member("a", frozenset({"a", "b"})), Fn("true"))))
    assert s.builtins == ()


def test_equivalence_examples():
    a = ChrState((Fn("delta", (D,)),), (eq(D, frozenset({"x"})),))
    b = ChrState((Fn("delta", (E,)),), (eq(E, frozenset({"x"})),))
    assert states_equivalent(a, a)
    assert states_equivalent(a, b)
    s0 = ChrState((gamma("goal", "c", 0),), ())
    s1 = ChrState((gamma("goal", "c", 1),), ())
    assert not states_equivalent(s0, s1)
    assert not witness_renaming(normalize(s0), normalize(s1))


def test_failed_states_are_equivalent_only_to_failed():
    assert states_equivalent(FAILED, ChrState((Fn("p", ()),), (eq("a", "b"),)))
    assert not states_equivalent(FAILED, ChrState((), ()))


def test_globals_matter():
    a = ChrState((Fn("p", (X,)),), (), frozenset({X}))
    b = ChrState((Fn("p", (Y,)),), (), frozenset({Y}))
    assert not states_equivalent(a, b)
    assert states_equivalent(ChrState(a.goal, ()), ChrState(b.goal, ()))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_equivalence_agrees_with_witness_search(data):
    a = data.draw(chr_states(max_goal=3, max_builtins=0))
    b = data.draw(st.one_of(variants(a), chr_states(max_goal=3, max_builtins=0)))
    na, nb = normalize(a), normalize(b)
    if na.failed or nb.failed or len(na.local_vars()) > 5:
        return
    assert states_equivalent(a, b) == witness_renaming(na, nb)


def test_entails_examples():
    x = Var("x")
    assert entails([eq(x, 1)], [eq(x, 1)])
    store = frozenset({Fn("chunk", ("c1", "g", frozenset({("current", "one")})))})
    q = member(Fn("chunk", (C, "g", frozenset({("current", X)}))), D)
    (s,) = list(entailments([eq(D, store)], [q]))
    assert s[C] == "c1" and s[X] == "one"
    assert not entails([], [eq("c1", "c2")])


def test_entails_facts_and_unsupported():
    from actr_confluence.chr import Theory
    th = Theory({("busy", 1)})
    assert entails([Fn("busy", ("motor",))], [Fn("busy", (X,))], theory=th)
    assert not entails([Fn("busy", ("motor",))], [Fn("busy", ("vision",))], theory=th)
    with pytest.raises(TheoryError, match="outside restricted theory"):
        entails([], [Fn("lt", (1, 2))])


def test_entailment_does_not_bind_state_variables():
    # X occurs in the built-ins: it is universally quantified, so X = a is not entailed
    assert not entails([member(X, Var("S"))], [eq(X, "a")])


def test_counting_match(det_model):
    prog = translate_model(det_model)
    th = theory_for(det_model)
    s = translate_state(det_model.initial)
    assert len(match_rule(s, prog[0], th)) == 1
    assert match_rule(ChrState(), prog[0], th) == []
    delayed = ChrState(tuple(gamma("retrieval", "a", 1) if c.functor == "gamma" and c.args[0] == "retrieval" else c
                             for c in s.goal), ())
    assert match_rule(delayed, prog[0], th) == []


HEAD_SHAPES = [
    (Fn("p", (X,)),),
    (Fn("p", (X,)), Fn("p", (Y,))),
    (Fn("p", (X,)), Fn("q", (X, Y))),
    (Fn("q", (X, X)),),
    (Fn("p", ("a",)), Fn("q", (Y, X))),
]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, len(HEAD_SHAPES) - 1),
       st.lists(st.one_of(st.builds(lambda a: Fn("p", (a,)), st.sampled_from(["a", "b"])),
                          st.builds(lambda a, b: Fn("q", (a, b)), st.sampled_from(["a", "b"]), st.sampled_from(["a", "b"]))),
                max_size=6))
def test_match_rule_agrees_with_brute_force(h, goal):
    rule = ChrRule("r", HEAD_SHAPES[h], (), (Fn("done", ()),))
    state = ChrState(tuple(goal), ())
    expected = all_head_injections(rule.head, state.goal)
    assert len(match_rule(state, rule)) == len(expected)


def test_match_rule_guard_and_body():
    rule = ChrRule("r", (Fn("p", (X,)),), (member(X, frozenset({"a", "b"})),), (Fn("q", (X,)),), (eq(Y, X),))
    out = match_rule(ChrState((Fn("p", ("a",)), Fn("p", ("c",))), ()), rule)
    assert [format_state(s) for _, s in out] == ["p(c), q(a) ; true ; {}"]


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_transition_respects_equivalence(data):
    a = data.draw(chr_states(max_goal=3, max_builtins=2))
    b = data.draw(variants(a))
    rule = ChrRule("r", (Fn("p", (X,)),), (), (Fn("q", (X, "z")),))
    for _, a1 in match_rule(a, rule):
        assert any(states_equivalent(a1, b1) for _, b1 in match_rule(b, rule))


@settings(max_examples=150, deadline=None)
@given(chr_states())
def test_normalize_idempotent(s):
    n = normalize(s)
    assert normalize(n) == n
