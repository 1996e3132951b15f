"""Random small models and states for property tests and experiment scripts."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .actr import (
    NIL_ID, NIL_TYPE, Action, ActrModel, ActrRule, ActrState, BufferTest, Chunk, ChunkStore, ChunkType,
    ModelError, actr_step, check_rule, check_store,
)
from .terms import Fn, Var


@dataclass(frozen=True)
class GenConfig:
    max_types: int = 3
    max_slots: int = 2
    max_chunks: int = 6
    max_rules: int = 3
    buffers: tuple[str, ...] = ("goal", "retrieval")
    var_names: tuple[str, ...] = ("X", "Y", "Z")
    p_constant: float = 0.25
    p_facts: float = 0.3


def _types(rng: random.Random, cfg: GenConfig) -> tuple[ChunkType, ...]:
    n = rng.randint(1, cfg.max_types)
    slots = ("s0", "s1", "s2")[: cfg.max_slots]
    return tuple(ChunkType(f"t{i}", tuple(sorted(rng.sample(slots, rng.randint(0, len(slots)))))) for i in range(n))


def random_store(rng: random.Random, types, n: int, prefix: str = "c") -> ChunkStore:
    ids = [f"{prefix}{i}" for i in range(n)]
    chunks = []
    for cid in ids:
        t = rng.choice(types)
        chunks.append(Chunk(cid, t.name, tuple((s, rng.choice(ids)) for s in t.slots)))
    return ChunkStore(tuple(chunks))


def _svp(rng, slots, values, k=None):
    slots = list(slots)
    k = rng.randint(0, len(slots)) if k is None else k
    return tuple((s, rng.choice(values)) for s in sorted(rng.sample(slots, min(k, len(slots)))))


def random_rule(rng: random.Random, name: str, types, buffers, constants, cfg: GenConfig) -> ActrRule:
    by_name = {t.name: t for t in types}
    tested = sorted(rng.sample(list(buffers), rng.randint(1, len(buffers))))
    lhs = []
    values = list(cfg.var_names)
    for b in tested:
        t = rng.choice(types)
        pool = [Var(v) for v in values] + ([rng.choice(constants)] if rng.random() < cfg.p_constant else [])
        lhs.append(BufferTest(b, t.name, _svp(rng, t.slots, pool)))
    bound = sorted({v for t in lhs for _, v in t.svp if isinstance(v, Var)}, key=lambda v: v.name)
    rhs_pool = bound + ([rng.choice(constants)] if constants and rng.random() < cfg.p_constant else [])
    rhs = []
    for b in buffers:
        kinds = ["none", "request", "clear"] + (["modify", "modify"] if b in tested else [])
        kind = rng.choice(kinds)
        if kind == "none":
            continue
        if kind == "clear":
            rhs.append(Action("clear", b))
            continue
        if kind == "modify":
            t = by_name[next(x.ctype for x in lhs if x.buffer == b)]
        else:
            t = rng.choice(types)
        svp = _svp(rng, t.slots, rhs_pool) if rhs_pool else ()
        rhs.append(Action(kind, b, t.name, svp))
    return ActrRule(name, tuple(lhs), tuple(rhs))


def random_model(rng: random.Random, cfg: GenConfig = GenConfig()) -> ActrModel:
    """A validated model with at most ``cfg.max_types`` types, chunks and rules."""
    while True:
        types = _types(rng, cfg)
        buffers = tuple(sorted(rng.sample(list(cfg.buffers), rng.randint(1, len(cfg.buffers)))))
        store = random_store(rng, types, rng.randint(1, cfg.max_chunks))
        ids = sorted(store.ids())
        rules = tuple(random_rule(rng, f"r{i}", types, buffers, ids, cfg) for i in range(rng.randint(1, cfg.max_rules)))
        tmap = {NIL_TYPE: frozenset(), **{t.name: frozenset(t.slots) for t in types}}
        try:
            for r in rules:
                check_rule(r, tmap, buffers)
            check_store(store, tmap)
        except ModelError:
            continue
        gamma = tuple((b, rng.choice(ids), Fraction(0)) for b in buffers)
        facts = frozenset({("busy", 1)}) if rng.random() < cfg.p_facts else frozenset()
        upsilon = (Fn("busy", (rng.choice(buffers),)),) if facts else ()
        return ActrModel(types, buffers, rules, ActrState(store, gamma, upsilon), facts)


def random_state(rng: random.Random, model: ActrModel, *, max_chunks: int = 6, delays: bool = True) -> ActrState:
    """A valid state of ``model`` over a fresh random store (mixed with the declared one)."""
    types = [t for t in model.types] or [ChunkType(NIL_TYPE)]
    store = model.initial.store
    if rng.random() < 0.5:
        extra = random_store(rng, types, rng.randint(1, max_chunks), prefix="k")
        ids = sorted(store.ids() | extra.ids())
        extra = [Chunk(c.id, c.ctype, tuple((s, rng.choice(ids)) for s, _ in c.values)) for c in extra]
        store = ChunkStore(store.chunks + tuple(extra))
        if rng.random() < 0.3 and NIL_ID not in store:
            store = ChunkStore(store.chunks + (Chunk(NIL_ID, NIL_TYPE),))
    ids = sorted(store.ids())
    choices = [Fraction(0), Fraction(0), Fraction(0), Fraction(1, 2), Fraction(1)] if delays else [Fraction(0)]
    gamma = tuple((b, rng.choice(ids), rng.choice(choices)) for b in model.buffers)
    upsilon = tuple(Fn("busy", (rng.choice(model.buffers),)) for _ in range(rng.randint(0, 1))) if model.facts else ()
    return ActrState(store, gamma, upsilon)


def reachable(model: ActrModel, roots, *, max_depth: int, max_states: int, clear_to_dm: bool = False):
    """Breadth-first reachable states: returns (states, edges, complete)."""
    seen = {}
    frontier = []
    for r in roots:
        if r not in seen:
            seen[r] = 0
            frontier.append(r)
    edges: dict = {}
    complete = True
    depth = 0
    while frontier:
        nxt = []
        for s in frontier:
            succ = actr_step(s, model, clear_to_dm=clear_to_dm)
            edges[s] = succ
            if depth >= max_depth:
                if succ:
                    complete = False
                continue
            for _, t in succ:
                if t not in seen:
                    if len(seen) >= max_states:
                        complete = False
                        continue
                    seen[t] = depth + 1
                    nxt.append(t)
        frontier = nxt
        depth += 1
    return list(seen), edges, complete


def is_terminating(model: ActrModel, roots, *, max_depth: int = 12, max_states: int = 400) -> bool:
    """Empirical termination: the reachable graph is finite within bounds and acyclic."""
    states, edges, complete = reachable(model, roots, max_depth=max_depth, max_states=max_states)
    if not complete:
        return False
    color: dict = {}

    def dfs(s) -> bool:
        color[s] = 1
        for _, t in edges.get(s, ()):
            c = color.get(t, 0)
            if c == 1 or (c == 0 and not dfs(t)):
                return False
        color[s] = 2
        return True

    return all(color.get(s) == 2 or dfs(s) for s in states)
