from fractions import Fraction

from actr_confluence.terms import (
    Fn, Var, apply, format_term, is_ground, lst, rename, sort_terms, term_key, term_vars, unify,
)

X, Y, Z = Var("X"), Var("Y"), Var("Z")


def all_unifiers(a, b, **kw):
    return list(unify(a, b, **kw))


def test_unify_binds_variable():
    (s,) = all_unifiers(Fn("f", (X, "b")), Fn("f", ("a", Y)))
    assert apply(X, s) == "a" and apply(Y, s) == "b"


def test_clash_and_occurs_check():
    assert all_unifiers(Fn("f", ("a",)), Fn("f", ("b",))) == []
    assert all_unifiers(X, Fn("f", (X,))) == []
    assert all_unifiers(Fn("f", ("a",)), Fn("g", ("a",))) == []


def test_rigid_variables_do_not_bind():
    assert all_unifiers(X, "a", rigid=frozenset({X})) == []
    (s,) = all_unifiers(Y, X, rigid=frozenset({X}))
    assert apply(Y, s) == X


def test_keep_prefers_binding_other_side():
    (s,) = all_unifiers(X, Y, keep=frozenset({X}))
    assert Y in s and X not in s


def test_numbers_unify_across_representations():
    assert all_unifiers(0, Fraction(0)) == [{}]
    assert all_unifiers(1, Fraction(1, 2)) == []


def test_set_unification_enumerates_matchings():
    a = frozenset({("first", X), ("second", Y)})
    b = frozenset({("first", "1"), ("second", "2")})
    (s,) = all_unifiers(a, b)
    assert apply(X, s) == "1" and apply(Y, s) == "2"
    ss = all_unifiers(frozenset({X}), frozenset({"a", "b"}))
    assert ss == []
    ss = all_unifiers(frozenset({X, Y}), frozenset({"a", "b"}))
    assert sorted((apply(X, s), apply(Y, s)) for s in ss) == [("a", "b"), ("b", "a")]


def test_set_unification_may_collapse_elements():
    ss = all_unifiers(frozenset({X, Y}), frozenset({"a"}))
    assert [(apply(X, s), apply(Y, s)) for s in ss] == [("a", "a")]


def test_rename_is_simultaneous():
    t = Fn("f", (X, Y))
    assert rename(t, {X: Y, Y: X}) == Fn("f", (Y, X))


def test_term_order_and_helpers():
    ts = [Fn("f", ()), frozenset(), (1,), X, "a", 1]
    assert sort_terms(ts) == (1, "a", X, (1,), frozenset(), Fn("f", ()))
    assert term_key(frozenset({"b", "a"})) == term_key(frozenset({"a", "b"}))
    assert term_vars(Fn("f", (X, frozenset({(Y, "a")})))) == {X, Y}
    assert is_ground(Fn("f", ("a", frozenset({1})))) and not is_ground((X,))


def test_format():
    assert format_term(Fn("=", (X, "a"))) == "X = a"
    assert format_term(Fn("in", (X, frozenset({"b", "a"})))) == "X in {a, b}"
    assert format_term(lst(X, Y)) == "[X, Y]"
    assert format_term(Fn("f", (("s", 1),))) == "f((s, 1))"
