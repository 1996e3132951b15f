"""Translation of ACT-R states and rules into CHR, and the action built-ins.

Chunk terms are ``chunk(id, type, {(slot, value), ...})``. A store is a
``frozenset`` of chunk terms. Inside the action built-ins a modified chunk is
wrapped as ``upd(chunk(...))``; the merge uses the wrapper to overwrite the
original chunk in place instead of renaming it. The wrapper never survives
into a ``delta`` constraint of a well-formed state.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

from .actr import (
    NIL_ID, NIL_TYPE, ActrModel, ActrRule, ActrState, Chunk, fresh_id, to_set_normal_form,
)
from .chr import ChrRule, ChrState, Theory, eq, member
from .terms import Fn, Term, Var, apply, is_ground, lst, sort_terms, unify

ZERO = Fraction(0)
BLOCK = {("action", 6), ("merge", 2), ("map", 4)}


# --------------------------------------------------------------------------
# chunk terms


def chunk_term(cid: Term, ctype: Term, svp: Iterable[tuple[Term, Term]]) -> Fn:
    return Fn("chunk", (cid, ctype, frozenset(tuple(p) for p in svp)))


def from_chunk(c: Chunk) -> Fn:
    return chunk_term(c.id, c.ctype, c.values)


def to_chunk(t: Fn) -> Chunk:
    cid, ctype, svp = t.args
    return Chunk(cid, ctype, tuple(svp))


def is_chunk_term(t: Term) -> bool:
    return (isinstance(t, Fn) and t.functor == "chunk" and len(t.args) == 3
            and isinstance(t.args[2], frozenset) and all(isinstance(p, tuple) and len(p) == 2 for p in t.args[2]))


def upd(t: Fn) -> Fn:
    return Fn("upd", (t,))


def unwrap(t: Fn) -> tuple[Fn, bool]:
    if isinstance(t, Fn) and t.functor == "upd" and len(t.args) == 1:
        return t.args[0], True
    return t, False


def store_ids(store: Iterable[Fn]) -> set:
    return {unwrap(t)[0].args[0] for t in store}


def _elem_key(t: Fn):
    c, flag = unwrap(t)
    cid, ctype, svp = c.args
    return (cid, ctype, tuple(sorted(svp)), flag)


# --------------------------------------------------------------------------
# states


def translate_state(state: ActrState) -> ChrState:
    delta = Fn("delta", (frozenset(from_chunk(c) for c in state.store),))
    gammas = tuple(Fn("gamma", (b, c, Fraction(d))) for b, c, d in state.gamma)
    return ChrState((delta, *gammas), tuple(state.upsilon), frozenset())


# --------------------------------------------------------------------------
# rules


def _internal_names(buffers: Sequence[str]) -> set[str]:
    names = {"D", "D'", "D*"}
    for b in buffers:
        names |= {f"C_{b}", f"E_{b}", f"D_{b}*", f"C_{b}*", f"E_{b}*", f"C_{b}**"}
    return names


def _avoid_clashes(rule: ActrRule, reserved: set[str]) -> ActrRule:
    used = {v.name for v in rule.variables()}
    mapping = {}
    for v in sorted(rule.variables(), key=lambda v: v.name):
        if v.name in reserved:
            n = 1
            while f"{v.name}_{n}" in used | reserved:
                n += 1
            mapping[v] = Var(f"{v.name}_{n}")
            used.add(f"{v.name}_{n}")
    if not mapping:
        return rule
    sub = lambda svp: tuple((s, mapping.get(v, v)) for s, v in svp)  # noqa: E731
    from .actr import Action, BufferTest
    return ActrRule(rule.name,
                    tuple(BufferTest(t.buffer, t.ctype, sub(t.svp)) for t in rule.lhs),
                    tuple(Action(a.kind, a.buffer, a.ctype, sub(a.svp)) for a in rule.rhs))


def action_term(kind: str, buffer: str, ctype: str, svp) -> Fn:
    return Fn(kind, (buffer, ctype, frozenset(tuple(p) for p in svp)))


def translate_rule(rule: ActrRule, buffers: Sequence[str], types=None) -> ChrRule:
    """CHR simplification rule for an ACT-R rule (normalized first when ``types`` is given)."""
    if types is not None:
        rule = to_set_normal_form(rule, types)
    buffers = sorted(buffers)
    rule = _avoid_clashes(rule, _internal_names(buffers))
    D, D1, D2 = Var("D"), Var("D'"), Var("D*")
    C = {b: Var(f"C_{b}") for b in buffers}
    E = {b: Var(f"E_{b}") for b in buffers}
    head = (Fn("delta", (D,)),) + tuple(Fn("gamma", (b, C[b], E[b])) for b in buffers)
    guard = []
    for t in sorted(rule.lhs, key=lambda t: t.buffer):
        guard.append(member(chunk_term(C[t.buffer], t.ctype, t.svp), D))
        guard.append(eq(E[t.buffer], 0))
    cog = frozenset((b, C[b]) for b in buffers)
    actions = sorted(rule.rhs, key=lambda a: a.buffer)
    acted = {a.buffer for a in actions}
    body_builtin = []
    for a in actions:
        b = a.buffer
        alpha = action_term(a.kind, b, a.ctype, a.svp)
        body_builtin.append(Fn("action", (alpha, D, cog, Var(f"D_{b}*"), Var(f"C_{b}*"), Var(f"E_{b}*"))))
    body_builtin.append(Fn("merge", (lst(*(Var(f"D_{a.buffer}*") for a in actions)), D1)))
    body_builtin.append(Fn("merge", (lst(D, D1), D2)))
    for a in actions:
        b = a.buffer
        body_builtin.append(Fn("map", (D, D1, Var(f"C_{b}*"), Var(f"C_{b}**"))))
    body_chr = [Fn("delta", (D2,))]
    for b in buffers:
        if b in acted:
            body_chr.append(Fn("gamma", (b, Var(f"C_{b}**"), Var(f"E_{b}*"))))
        else:
            body_chr.append(Fn("gamma", (b, C[b], E[b])))
    return ChrRule(rule.name, head, tuple(guard), tuple(body_chr), tuple(body_builtin))


def translate_model(model: ActrModel) -> list[ChrRule]:
    return [translate_rule(r, model.buffers) for r in model.normalized_rules]


# --------------------------------------------------------------------------
# action semantics


def _find(store: Iterable[Fn], cid) -> Fn | None:
    hits = sorted((t for t in store if is_chunk_term(t) and t.args[0] == cid), key=_elem_key)
    return hits[0] if hits else None


def exec_action(alpha: Fn, store: frozenset, cog: Iterable[tuple], *, clear_to_dm: bool = False
                ) -> list[tuple[frozenset, Term, Fraction]]:
    """All outcomes ``(store_b, result_id, delay)`` of a ground action."""
    kind = alpha.functor
    buffer, ctype, svp = alpha.args
    holds = dict(cog)
    taken = store_ids(store)
    nil_id = NIL_ID if NIL_ID not in taken else fresh_id(NIL_ID, taken)
    nil = chunk_term(nil_id, NIL_TYPE, ())
    if kind == "modify":
        old = _find(store, holds.get(buffer))
        if old is None:
            return []
        values = dict(old.args[2])
        values.update(dict(svp))
        return [(frozenset({upd(chunk_term(old.args[0], old.args[1], values.items()))}), old.args[0], ZERO)]
    if kind == "clear":
        out = {nil}
        if clear_to_dm:
            old = _find(store, holds.get(buffer))
            if old is not None:
                out.add(chunk_term(fresh_id(old.args[0], taken), old.args[1], old.args[2]))
        return [(frozenset(out), nil_id, ZERO)]
    if kind != "request":
        raise ValueError(f"unknown action {kind!r}")
    want = set(svp)
    hits = sorted((t for t in store if is_chunk_term(t) and t.args[1] == ctype and want <= t.args[2]), key=_elem_key)
    if not hits:
        return [(frozenset({nil}), nil_id, ZERO)]
    out = []
    for t in hits:
        new = fresh_id(t.args[0], taken)
        out.append((frozenset({chunk_term(new, t.args[1], t.args[2])}), new, ZERO))
    return out


def merge_stores(stores: Sequence[Iterable[Fn]]) -> tuple[frozenset, list[dict]]:
    """Union of chunk stores with deterministic renaming of colliding identifiers.

    Elements of the first store keep their identifiers. An ``upd`` element of a
    later store replaces the untouched plain chunk with its identifier from the
    first store. Any other collision renames the later element to
    ``<id>_<n>``; the returned per-store maps record those renamings.
    """
    stores = [list(s) for s in stores]
    taken = {unwrap(t)[0].args[0] for s in stores for t in s}
    placed: dict = {}
    order: list = []
    idmaps: list[dict] = []
    for i, st in enumerate(stores):
        ren: dict = {}
        for t in sorted(st, key=_elem_key):
            c, flag = unwrap(t)
            cid = c.args[0]
            cur = placed.get(cid)
            if cur is None:
                placed[cid] = [t, flag, i, False]
                order.append(cid)
            elif i > 0 and flag and cur[2] == 0 and not cur[1] and not cur[3]:
                placed[cid] = [c, False, 0, True]
            else:
                new = fresh_id(cid, taken | placed.keys())
                placed[new] = [chunk_term(new, c.args[1], c.args[2]), False, i, False]
                order.append(new)
                ren[cid] = new
        idmaps.append(ren)
    return frozenset(placed[k][0] for k in order), idmaps


def map_id(idmap: dict, c: Term) -> Term:
    return idmap.get(c, c)


# --------------------------------------------------------------------------
# theory


class ActrTheory(Theory):
    """Restricted theory extended with the executable action/merge/map block."""

    def __init__(self, facts=(), *, clear_to_dm: bool = False):
        super().__init__(facts)
        self.clear_to_dm = clear_to_dm

    def supports(self, c: Fn) -> bool:
        return super().supports(c) or (c.functor, len(c.args)) in BLOCK

    def solve(self, constraints, s):
        block = [c for c in constraints if (c.functor, len(c.args)) in BLOCK]
        rest = [c for c in constraints if (c.functor, len(c.args)) not in BLOCK]
        if not block:
            yield s, rest
            return
        actions = [c for c in block if c.functor == "action"]
        if not all(is_ground(apply(c.args[:3], s)) for c in actions):
            yield s, list(constraints)
            return
        per_action = []
        for c in actions:
            alpha, store, cog = (apply(a, s) for a in c.args[:3])
            per_action.append(exec_action(alpha, store, cog, clear_to_dm=self.clear_to_dm))
        for combo in itertools.product(*per_action):
            s1 = s
            for c, (st, rid, delay) in zip(actions, combo):
                s1 = next(unify((c.args[3], c.args[4], c.args[5]), (st, rid, delay), s1), None)
                if s1 is None:
                    break
            if s1 is None:
                continue
            done = _run_merges_and_maps(block, actions, s1)
            if done is None:
                yield s, list(constraints)
                return
            if done is not False:
                yield done, rest


def _run_merges_and_maps(block, actions, s):
    """Execute merge and map constraints; None when blocked, False on failure."""
    merges = [c for c in block if c.functor == "merge"]
    maps = [c for c in block if c.functor == "map"]
    idmap_of: dict = {}   # raw list item -> (idmap, raw output)
    pending = list(merges)
    while pending:
        for c in pending:
            items = c.args[0].args if isinstance(c.args[0], Fn) and c.args[0].functor == "list" else None
            if items is None:
                return None
            vals = [apply(x, s) for x in items]
            if all(is_ground(v) and isinstance(v, frozenset) for v in vals):
                merged, maps_ = merge_stores(vals)
                s = next(unify(c.args[1], merged, s), None)
                if s is None:
                    return False
                for x, m in zip(items, maps_):
                    idmap_of[x] = (m, c.args[1])
                pending.remove(c)
                break
        else:
            return None
    for c in maps:
        _, d1, cs, css = c.args
        source = next((a.args[3] for a in actions if a.args[4] == cs), None)
        first = idmap_of.get(source)
        second = idmap_of.get(d1)
        if first is None or second is None:
            return None
        cid = apply(cs, s)
        s = next(unify(css, map_id(second[0], map_id(first[0], cid)), s), None)
        if s is None:
            return False
    return s


def theory_for(model: ActrModel, *, clear_to_dm: bool = False) -> ActrTheory:
    return ActrTheory(model.facts, clear_to_dm=clear_to_dm)


def sorted_chunks(store: frozenset) -> tuple:
    return sort_terms(store)
