"""A small CHR engine for simplification rules over equivalence classes of states.

The built-in theory is restricted to syntactic equality, set membership
(``in``), ``true``/``false`` and uninterpreted ground facts. Richer built-ins
(the ACT-R ``action``/``merge``/``map`` constraints) are plugged in by
subclassing :class:`Theory`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .terms import (
    Fn, Term, Var, apply, format_term, is_ground, rename, sort_terms, term_key, term_vars, unify,
)

TRUE = Fn("true")
FALSE = Fn("false")


def eq(a: Term, b: Term) -> Fn:
    return Fn("=", (a, b))


def member(x: Term, s: Term) -> Fn:
    return Fn("in", (x, s))


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class ChrState:
    goal: tuple = ()
    builtins: tuple = ()
    globals: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "goal", sort_terms(self.goal))
        object.__setattr__(self, "builtins", sort_terms(self.builtins))
        object.__setattr__(self, "globals", frozenset(self.globals))

    @property
    def failed(self) -> bool:
        return FALSE in self.builtins

    @cached_property
    def _vars(self) -> frozenset:
        out: set = set()
        term_vars(self.goal, out)
        term_vars(self.builtins, out)
        return frozenset(out)

    def variables(self) -> set:
        return set(self._vars)

    def local_vars(self) -> set:
        return self.variables() - self.globals

    def is_ground(self) -> bool:
        return not self._vars

    def __str__(self) -> str:
        return format_state(self)


FAILED = ChrState((), (FALSE,), frozenset())


@dataclass(frozen=True)
class ChrRule:
    name: str
    head: tuple
    guard: tuple = ()
    body_chr: tuple = ()
    body_builtin: tuple = ()

    def __post_init__(self):
        if not self.head:
            raise ValueError(f"rule {self.name}: empty head")

    def variables(self) -> set:
        out: set = set()
        for part in (self.head, self.guard, self.body_chr, self.body_builtin):
            term_vars(part, out)
        return out

    def head_guard_vars(self) -> set:
        out: set = set()
        term_vars(self.head, out)
        term_vars(self.guard, out)
        return out

    def renamed(self, suffix: str) -> "ChrRule":
        m = {v: Var(f"{v.name}{suffix}") for v in self.variables()}
        r = lambda xs: tuple(rename(x, m) for x in xs)  # noqa: E731
        return ChrRule(self.name, r(self.head), r(self.guard), r(self.body_chr), r(self.body_builtin))

    def __str__(self) -> str:
        return format_rule(self)


def format_state(state: ChrState) -> str:
    goal = ", ".join(format_term(c) for c in state.goal) or "{}"
    builtins = " & ".join(format_term(c) for c in state.builtins) or "true"
    glob = ", ".join(v.name for v in sorted(state.globals, key=lambda v: v.name)) or "{}"
    return f"{goal} ; {builtins} ; {glob}"


def format_rule(rule: ChrRule) -> str:
    head = ", ".join(format_term(c) for c in rule.head)
    guard = " & ".join(format_term(c) for c in rule.guard) or "true"
    body = [format_term(c) for c in rule.body_chr] + [format_term(c) for c in rule.body_builtin]
    return f"{rule.name} @ {head} <=> {guard} | {', '.join(body) or 'true'}"


# --------------------------------------------------------------------------
# built-in theory


class Theory:
    """Restricted constraint theory: ``=``, ``in``, ``true``, ``false`` and opaque facts."""

    core = frozenset({("=", 2), ("in", 2), ("true", 0), ("false", 0)})

    def __init__(self, facts: Iterable[tuple[str, int]] = ()):
        self.facts = frozenset(facts)

    def supports(self, c: Fn) -> bool:
        return (c.functor, len(c.args)) in self.core or (c.functor, len(c.args)) in self.facts

    def evaluate(self, c: Fn) -> bool | None:
        """Truth value of a (substituted) built-in when decidable in isolation, else None."""
        if c == TRUE:
            return True
        if c == FALSE:
            return False
        if c.functor == "in" and len(c.args) == 2:
            x, s = c.args
            if isinstance(s, frozenset):
                if is_ground(x) and is_ground(s):
                    return x in s
                if not any(True for e in s for _ in unify(x, e)):
                    return False
            return None
        return None

    def solve(self, constraints: Sequence[Fn], s: dict) -> Iterator[tuple[dict, list]]:
        """Execute executable built-ins; yields (extended substitution, residual constraints)."""
        yield s, list(constraints)

    def entail_special(self, c: Fn, builtins: Sequence[Fn], s: dict, rigid) -> Iterator[dict]:
        raise TheoryError(f"outside restricted theory: {format_term(c)}")


DEFAULT_THEORY = Theory()


# --------------------------------------------------------------------------
# normalization and equivalence


def _solve_equations(builtins, keep) -> tuple[dict, list] | None:
    s: dict = {}
    rest = []
    for c in builtins:
        if c.functor == "=" and len(c.args) == 2:
            us = list(itertools.islice(unify(c.args[0], c.args[1], s, keep=keep), 2))
            if not us:
                return None
            if len(us) == 1:
                s = us[0]
            else:
                rest.append(c)
        else:
            rest.append(c)
    return s, rest


def _abstract(t: Term, loc: frozenset) -> tuple:
    return term_key(rename(t, {v: Var("_") for v in loc})) if loc else term_key(t)


def _var_order(t: Term, loc: frozenset, out: list):
    if isinstance(t, Var):
        if t in loc and t not in out:
            out.append(t)
    elif isinstance(t, Fn):
        for a in t.args:
            _var_order(a, loc, out)
    elif isinstance(t, tuple):
        for a in t:
            _var_order(a, loc, out)
    elif isinstance(t, frozenset):
        for a in sorted(t, key=lambda e: (_abstract(e, loc), term_key(e))):
            _var_order(a, loc, out)


def _canonical_locals(goal: tuple, builtins: tuple, glob: frozenset) -> tuple[tuple, tuple]:
    loc = frozenset((term_vars(goal) | term_vars(builtins)) - glob)
    goal, builtins = sort_terms(goal), sort_terms(builtins)
    if not loc:
        return goal, builtins
    seen: list = []
    for _ in range(12):
        order: list = []
        for part in (goal, builtins):
            for c in sorted(part, key=lambda c: (_abstract(c, loc), term_key(c))):
                _var_order(c, loc, order)
        m = {v: Var(f"_L{i}") for i, v in enumerate(order)}
        ng = sort_terms(rename(c, m) for c in goal)
        nb = sort_terms(rename(c, m) for c in builtins)
        if (ng, nb) == (goal, builtins):
            return goal, builtins
        if (ng, nb) in seen:
            cycle = seen[seen.index((ng, nb)):]
            return min(cycle, key=lambda gb: (tuple(map(term_key, gb[0])), tuple(map(term_key, gb[1]))))
        seen.append((ng, nb))
        goal, builtins = ng, nb
        loc = frozenset(m.values())
    return goal, builtins


def normalize(state: ChrState, theory: Theory = DEFAULT_THEORY) -> ChrState:
    """Canonical representative of the equivalence class of ``state``.

    Equalities are solved and applied (bindings of global variables are kept
    as equations), decidable built-ins are evaluated, the conjunction is
    deduplicated and sorted, and local variables are renamed canonically.
    """
    if state.failed:
        return FAILED
    glob = state.globals
    solved = _solve_equations(state.builtins, keep=glob)
    if solved is None:
        return FAILED
    s, rest = solved
    goal = tuple(apply(c, s) for c in state.goal)
    builtins = []
    for c in rest:
        c = apply(c, s)
        v = theory.evaluate(c)
        if v is False:
            return FAILED
        if v is None:
            builtins.append(c)
    for g in sorted(glob, key=lambda v: v.name):
        t = apply(g, s)
        if t != g:
            builtins.append(eq(g, t))
    builtins = list(dict.fromkeys(builtins))
    present = term_vars(tuple(goal)) | term_vars(tuple(builtins))
    glob = frozenset(glob & present)
    goal, builtins = _canonical_locals(tuple(goal), tuple(builtins), glob)
    return ChrState(goal, builtins, glob)


def _rename_match(a: Term, b: Term, loc_a: frozenset, loc_b: frozenset, ren: dict, inv: dict) -> Iterator[tuple[dict, dict]]:
    if isinstance(a, Var) and a in loc_a:
        if a in ren:
            if ren[a] == b:
                yield ren, inv
            return
        if isinstance(b, Var) and b in loc_b and b not in inv:
            yield {**ren, a: b}, {**inv, b: a}
        return
    if isinstance(a, Fn):
        if isinstance(b, Fn) and a.functor == b.functor and len(a.args) == len(b.args):
            yield from _rename_seq(a.args, b.args, loc_a, loc_b, ren, inv)
        return
    if isinstance(a, tuple):
        if isinstance(b, tuple) and len(a) == len(b):
            yield from _rename_seq(a, b, loc_a, loc_b, ren, inv)
        return
    if isinstance(a, frozenset):
        if isinstance(b, frozenset) and len(a) == len(b):
            yield from _rename_bag(sort_terms(a), list(b), loc_a, loc_b, ren, inv)
        return
    if type(a) is type(b) and a == b or (a == b and not isinstance(b, (Var, Fn, tuple, frozenset))):
        yield ren, inv


def _rename_seq(xs, ys, loc_a, loc_b, ren, inv):
    if not xs:
        yield ren, inv
        return
    for r1, i1 in _rename_match(xs[0], ys[0], loc_a, loc_b, ren, inv):
        yield from _rename_seq(xs[1:], ys[1:], loc_a, loc_b, r1, i1)


def _rename_bag(xs, ys, loc_a, loc_b, ren, inv):
    """Bijective matching of the elements of xs onto ys."""
    if not xs:
        yield ren, inv
        return
    x, rest = xs[0], xs[1:]
    kx = _abstract(x, loc_a)
    for j, y in enumerate(ys):
        if _abstract(y, loc_b) != kx:
            continue
        for r1, i1 in _rename_match(x, y, loc_a, loc_b, ren, inv):
            yield from _rename_bag(rest, ys[:j] + ys[j + 1:], loc_a, loc_b, r1, i1)


def states_equivalent(a: ChrState, b: ChrState, theory: Theory = DEFAULT_THEORY) -> bool:
    """Equivalence of CHR states: equal normal forms up to a bijective renaming of locals."""
    na, nb = normalize(a, theory), normalize(b, theory)
    if na.failed or nb.failed:
        return na.failed and nb.failed
    if na == nb:
        return True
    if na.globals != nb.globals or len(na.goal) != len(nb.goal) or len(na.builtins) != len(nb.builtins):
        return False
    la, lb = frozenset(na.local_vars()), frozenset(nb.local_vars())
    if len(la) != len(lb):
        return False
    xs = list(na.goal) + [Fn("$builtin", (c,)) for c in na.builtins]
    ys = list(nb.goal) + [Fn("$builtin", (c,)) for c in nb.builtins]
    return next(_rename_bag(xs, ys, la, lb, {}, {}), None) is not None


def state_key(state: ChrState) -> tuple:
    """Hashable key; equal keys imply equivalence (exact for ground states)."""
    return (state.goal, state.builtins, state.globals)


# --------------------------------------------------------------------------
# entailment and matching


def _equation_subst(builtins: Sequence[Fn]) -> tuple[dict, list] | None:
    return _solve_equations(builtins, keep=frozenset())


def entailments(builtins: Sequence[Fn], query: Sequence[Fn], s: dict | None = None, *,
                rigid: frozenset | None = None, theory: Theory = DEFAULT_THEORY) -> Iterator[dict]:
    """Yield substitutions of query-local variables under which ``builtins`` entail ``query``.

    Variables of ``builtins`` are universally quantified (rigid); all other
    variables of the query are existential and get bound.
    """
    solved = _equation_subst(builtins)
    if solved is None:
        yield dict(s or {})
        return
    esub, store = solved
    store = [apply(c, esub) for c in store]
    if rigid is None:
        rigid = frozenset(term_vars(tuple(builtins)))
    rigid = frozenset(rigid)
    base = dict(s or {})
    query = [apply(apply(c, base), esub) for c in query]
    yield from _entail_seq(query, store, base, rigid, theory)


def _entail_seq(query, store, s, rigid, theory):
    if not query:
        yield s
        return
    c, rest = query[0], query[1:]
    for s1 in _entail_atom(c, store, s, rigid, theory):
        yield from _entail_seq(rest, store, s1, rigid, theory)


def _entail_atom(c: Fn, store, s, rigid, theory: Theory) -> Iterator[dict]:
    c = apply(c, s)
    if c == TRUE:
        yield s
        return
    if c.functor == "=" and len(c.args) == 2:
        yield from unify(c.args[0], c.args[1], s, rigid=rigid)
        return
    if c.functor == "in" and len(c.args) == 2:
        x, st = c.args
        if isinstance(st, frozenset):
            for e in sort_terms(st):
                yield from unify(x, e, s, rigid=rigid)
        else:
            for b in store:
                if b.functor == "in" and len(b.args) == 2 and b.args[1] == st:
                    yield from unify(x, b.args[0], s, rigid=rigid)
        return
    if (c.functor, len(c.args)) in theory.facts:
        for b in store:
            if b.functor == c.functor and len(b.args) == len(c.args):
                yield from unify(c, b, s, rigid=rigid)
        return
    yield from theory.entail_special(c, store, s, rigid)


def entails(builtins: Sequence[Fn], query: Sequence[Fn], theory: Theory = DEFAULT_THEORY) -> bool:
    """Decide CT |= forall(builtins -> exists locals. query) in the restricted theory."""
    return next(entailments(builtins, query, theory=theory), None) is not None


_variant_counter = itertools.count()


def fresh_variant(rule: ChrRule) -> ChrRule:
    return rule.renamed(f"~{next(_variant_counter)}")


def match_heads(head: Sequence[Fn], goal: Sequence[Fn], s: dict, rigid: frozenset) -> Iterator[tuple[dict, tuple[int, ...]]]:
    """Injective matchings of head constraints into goal positions."""
    def go(i, s, used):
        if i == len(head):
            yield s, tuple(used)
            return
        h = head[i]
        for j, g in enumerate(goal):
            if j in used or g.functor != h.functor or len(g.args) != len(h.args):
                continue
            for s1 in unify(h, g, s, rigid=rigid):
                yield from go(i + 1, s1, used + [j])
    yield from go(0, dict(s), [])


def match_rule(state: ChrState, rule: ChrRule, theory: Theory = DEFAULT_THEORY) -> list[tuple[dict, ChrState]]:
    """One entry per head matching, guard solution and built-in outcome.

    The returned state is the normalized post-transition state
    ``<B_c + rest ; G & B_b & C ; V>``.
    """
    state = normalize(state, theory)
    if state.failed or not state.goal:
        return []
    variant = fresh_variant(rule)
    rigid = frozenset(state.variables())
    rule_vars = variant.variables()
    out = []
    for s, used in match_heads(variant.head, state.goal, {}, rigid):
        for s1 in entailments(state.builtins, variant.guard, s, rigid=rigid, theory=theory):
            rest = tuple(g for j, g in enumerate(state.goal) if j not in used)
            goal = rest + tuple(variant.body_chr)
            pending = list(state.builtins) + list(variant.guard) + list(variant.body_builtin)
            for s2, residual in theory.solve(pending, s1):
                post = ChrState(tuple(apply(c, s2) for c in goal), tuple(apply(c, s2) for c in residual), state.globals)
                nxt = normalize(post, theory)
                if nxt.failed:
                    continue
                theta = {v: apply(v, s2) for v in rule_vars if v in s2}
                out.append((theta, nxt))
    return out


def successors(state: ChrState, program: Iterable[ChrRule], theory: Theory = DEFAULT_THEORY) -> list[tuple[str, ChrState]]:
    out = []
    for rule in program:
        for _, nxt in match_rule(state, rule, theory):
            out.append((rule.name, nxt))
    return out
