"""ACT-R abstract syntax, set normal form and a reference interpreter.

The interpreter works directly on chunk stores and buffer maps. It follows
the same action semantics as the CHR translation (in-place modification,
requests answered with fresh copies, failures and clears installing a nil
chunk, deterministic renaming on identifier collisions) so the two can be
checked against each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .terms import Fn, Term, Var, is_ground, term_vars

NIL_TYPE = "nil"
NIL_ID = "nil0"
ACTION_KINDS = ("modify", "request", "clear")


class ModelError(ValueError):
    """Invalid model source or abstract syntax; carries a source location when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        loc = f"{line}:{col}: " if line is not None else ""
        super().__init__(loc + message)


@dataclass(frozen=True)
class ChunkType:
    name: str
    slots: tuple[str, ...] = ()


@dataclass(frozen=True)
class Chunk:
    id: str
    ctype: str
    values: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(sorted(self.values)))

    def value(self, slot: str) -> str:
        return dict(self.values)[slot]


@dataclass(frozen=True)
class ChunkStore:
    chunks: tuple[Chunk, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "chunks", tuple(sorted(self.chunks, key=lambda c: (c.id, c.ctype, c.values))))

    @cached_property
    def by_id(self) -> dict[str, Chunk]:
        return {c.id: c for c in self.chunks}

    def ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.chunks)

    def __iter__(self):
        return iter(self.chunks)

    def __len__(self):
        return len(self.chunks)

    def __getitem__(self, cid: str) -> Chunk:
        return self.by_id[cid]

    def __contains__(self, cid: str) -> bool:
        return cid in self.by_id


@dataclass(frozen=True)
class BufferTest:
    buffer: str
    ctype: str
    svp: tuple[tuple[str, Term], ...] = ()


@dataclass(frozen=True)
class Action:
    kind: str
    buffer: str
    ctype: str = NIL_TYPE
    svp: tuple[tuple[str, Term], ...] = ()


@dataclass(frozen=True)
class ActrRule:
    name: str
    lhs: tuple[BufferTest, ...] = ()
    rhs: tuple[Action, ...] = ()

    def variables(self) -> set[Var]:
        out: set[Var] = set()
        for t in self.lhs:
            term_vars(t.svp, out)
        for a in self.rhs:
            term_vars(a.svp, out)
        return out


@dataclass(frozen=True)
class ActrState:
    store: ChunkStore
    gamma: tuple[tuple[str, str, Fraction], ...]
    upsilon: tuple[Fn, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(sorted(self.gamma)))
        object.__setattr__(self, "upsilon", tuple(sorted(self.upsilon, key=repr)))

    @cached_property
    def buffers(self) -> dict[str, tuple[str, Fraction]]:
        return {b: (c, d) for b, c, d in self.gamma}


@dataclass(frozen=True)
class Signature:
    """What the invariant checks need to know about a model."""

    types: Mapping[str, frozenset[str]]
    buffers: tuple[str, ...]
    facts: frozenset[tuple[str, int]] = frozenset()


@dataclass(frozen=True)
class ActrModel:
    types: tuple[ChunkType, ...]
    buffers: tuple[str, ...]
    rules: tuple[ActrRule, ...]
    initial: ActrState
    facts: frozenset[tuple[str, int]] = field(default_factory=frozenset)

    @cached_property
    def type_slots(self) -> dict[str, frozenset[str]]:
        out = {NIL_TYPE: frozenset()}
        out.update({t.name: frozenset(t.slots) for t in self.types})
        return out

    @cached_property
    def signature(self) -> Signature:
        return Signature(self.type_slots, tuple(sorted(self.buffers)), self.facts)

    @cached_property
    def normalized_rules(self) -> tuple[ActrRule, ...]:
        return tuple(to_set_normal_form(r, self.types) for r in self.rules)

    def rule_constants(self) -> set[str]:
        out = set()
        for r in self.rules:
            for part in (*r.lhs, *r.rhs):
                out.update(v for _, v in part.svp if isinstance(v, str))
        return out

    def constants(self) -> set[str]:
        """Every constant the model mentions (chunk ids, slot values, rule constants)."""
        out = set(self.initial.store.ids())
        for c in self.initial.store:
            out.update(v for _, v in c.values)
        for r in self.rules:
            for part in (*r.lhs, *r.rhs):
                out.update(v for _, v in part.svp if isinstance(v, str))
        return out


# --------------------------------------------------------------------------
# validation and set normal form


def check_store(store: ChunkStore, types: Mapping[str, frozenset[str]]) -> None:
    seen: set[str] = set()
    for c in store:
        if c.id in seen:
            raise ModelError(f"duplicate chunk identifier {c.id!r}")
        seen.add(c.id)
    for c in store:
        if c.ctype not in types:
            raise ModelError(f"chunk {c.id!r}: undeclared type {c.ctype!r}")
        slots = [s for s, _ in c.values]
        if len(set(slots)) != len(slots):
            raise ModelError(f"chunk {c.id!r}: slot given twice")
        if set(slots) != types[c.ctype]:
            missing = sorted(types[c.ctype] - set(slots))
            extra = sorted(set(slots) - types[c.ctype])
            raise ModelError(f"chunk {c.id!r}: slots do not match type {c.ctype!r}"
                             f" (missing {missing}, unknown {extra})")
        for s, v in c.values:
            if v not in seen:
                raise ModelError(f"chunk {c.id!r}: slot {s!r} refers to undeclared chunk {v!r}")


def check_rule(rule: ActrRule, types: Mapping[str, frozenset[str]], buffers: Iterable[str]) -> None:
    buffers = set(buffers)
    tested: dict[str, str] = {}
    for t in rule.lhs:
        if t.buffer not in buffers:
            raise ModelError(f"rule {rule.name}: undeclared buffer {t.buffer!r}")
        if t.buffer in tested:
            raise ModelError(f"rule {rule.name}: duplicate test on buffer {t.buffer!r}")
        if t.ctype not in types:
            raise ModelError(f"rule {rule.name}: undeclared type {t.ctype!r}")
        for s, _ in t.svp:
            if s not in types[t.ctype]:
                raise ModelError(f"rule {rule.name}: slot {s!r} not in type {t.ctype!r}")
        tested[t.buffer] = t.ctype
    acted: set[str] = set()
    bound = set()
    for t in rule.lhs:
        term_vars(t.svp, bound)
    for a in rule.rhs:
        if a.kind not in ACTION_KINDS:
            raise ModelError(f"rule {rule.name}: unknown action {a.kind!r}")
        if a.buffer not in buffers:
            raise ModelError(f"rule {rule.name}: undeclared buffer {a.buffer!r}")
        if a.buffer in acted:
            raise ModelError(f"rule {rule.name}: duplicate action on buffer {a.buffer!r}")
        acted.add(a.buffer)
        if a.ctype not in types:
            raise ModelError(f"rule {rule.name}: undeclared type {a.ctype!r}")
        slots = [s for s, _ in a.svp]
        if len(set(slots)) != len(slots):
            raise ModelError(f"rule {rule.name}: slot given twice in action on {a.buffer!r}")
        for s in slots:
            if s not in types[a.ctype]:
                raise ModelError(f"rule {rule.name}: slot {s!r} not in type {a.ctype!r}")
        if a.kind == "modify" and tested.get(a.buffer) != a.ctype:
            raise ModelError(f"rule {rule.name}: modification of {a.buffer!r} needs a test of"
                             f" type {a.ctype!r} on that buffer")
        unbound = term_vars(a.svp) - bound
        if unbound:
            names = ", ".join(sorted(v.name for v in unbound))
            raise ModelError(f"rule {rule.name}: unbound variable(s) {names} on the right-hand side")


def _fresh_vars(used: set[Var]) -> Iterable[Var]:
    for n in itertools.count(1):
        v = Var(f"V{n}")
        if v not in used:
            yield v


def to_set_normal_form(rule: ActrRule, types: Iterable[ChunkType] | Mapping[str, frozenset[str]]) -> ActrRule:
    """Make every buffer test mention each slot of its type exactly once."""
    if not isinstance(types, Mapping):
        types = {t.name: frozenset(t.slots) for t in types}
    types = {NIL_TYPE: frozenset(), **types}
    fresh = _fresh_vars(rule.variables())
    tests = []
    for t in rule.lhs:
        if t.ctype not in types:
            raise ModelError(f"rule {rule.name}: undeclared type {t.ctype!r}")
        svp: dict[str, Term] = {}
        for s, v in t.svp:
            if s not in types[t.ctype]:
                raise ModelError(f"rule {rule.name}: slot {s!r} not in type {t.ctype!r}")
            if s in svp and svp[s] != v:
                raise ModelError(f"rule {rule.name}: inconsistent duplicate slot test on {s!r}")
            svp[s] = v
        for s in sorted(types[t.ctype] - svp.keys()):
            svp[s] = next(fresh)
        tests.append(BufferTest(t.buffer, t.ctype, tuple(sorted(svp.items()))))
    tests.sort(key=lambda t: t.buffer)
    actions = sorted(rule.rhs, key=lambda a: a.buffer)
    actions = [Action(a.kind, a.buffer, a.ctype, tuple(sorted(a.svp))) for a in actions]
    return ActrRule(rule.name, tuple(tests), tuple(actions))


# --------------------------------------------------------------------------
# reference interpreter


def fresh_id(base: str, taken) -> str:
    n = 1
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


def _match_tests(rule: ActrRule, state: ActrState) -> dict | None:
    binding: dict[Var, str] = {}
    for t in rule.lhs:
        cid, delay = state.buffers[t.buffer]
        if delay != 0:
            return None
        chunk = state.store[cid]
        if chunk.ctype != t.ctype:
            return None
        values = dict(chunk.values)
        for s, v in t.svp:
            actual = values[s]
            if isinstance(v, Var):
                if binding.setdefault(v, actual) != actual:
                    return None
            elif v != actual:
                return None
    return binding


def _subst(svp, binding) -> dict[str, str]:
    return {s: binding.get(v, v) if isinstance(v, Var) else v for s, v in svp}


def _action_outcomes(a: Action, binding, state: ActrState, clear_to_dm: bool):
    """List of (chunks, result_id) with chunks a list of (Chunk, is_update)."""
    store = state.store
    taken = store.ids()
    if a.kind == "modify":
        cid = state.buffers[a.buffer][0]
        old = store[cid]
        values = dict(old.values)
        values.update(_subst(a.svp, binding))
        return [([(Chunk(cid, old.ctype, tuple(values.items())), True)], cid)]
    nil = Chunk(NIL_ID if NIL_ID not in taken else fresh_id(NIL_ID, taken), NIL_TYPE)
    if a.kind == "clear":
        chunks = [(nil, False)]
        if clear_to_dm:
            old = store[state.buffers[a.buffer][0]]
            chunks.append((Chunk(fresh_id(old.id, taken), old.ctype, old.values), False))
        return [(chunks, nil.id)]
    want = _subst(a.svp, binding)
    hits = [c for c in store if c.ctype == a.ctype and all(c.value(s) == v for s, v in want.items())]
    if not hits:
        return [([(nil, False)], nil.id)]
    out = []
    for c in hits:
        copy = Chunk(fresh_id(c.id, taken), c.ctype, c.values)
        out.append(([(copy, False)], copy.id))
    return out


def _merge(stores: list[list[tuple[Chunk, bool]]]):
    """Merge lists of (chunk, is_update); returns (placed list, per-store renames)."""
    taken = {c.id for st in stores for c, _ in st}
    placed: dict[str, list] = {}
    order: list[str] = []
    renames: list[dict[str, str]] = []
    for i, st in enumerate(stores):
        ren: dict[str, str] = {}
        for chunk, upd in sorted(st, key=lambda cu: (cu[0].id, cu[0].ctype, cu[0].values, cu[1])):
            cur = placed.get(chunk.id)
            if cur is None:
                placed[chunk.id] = [chunk, upd, i, False]
                order.append(chunk.id)
            elif i > 0 and upd and cur[2] == 0 and not cur[1] and not cur[3]:
                placed[chunk.id] = [chunk, False, 0, True]
            else:
                new = fresh_id(chunk.id, taken | placed.keys())
                placed[new] = [Chunk(new, chunk.ctype, chunk.values), False, i, False]
                order.append(new)
                ren[chunk.id] = new
        renames.append(ren)
    return [(placed[k][0], placed[k][1]) for k in order], renames


def fire(rule: ActrRule, binding: dict, state: ActrState, clear_to_dm: bool = False) -> list[ActrState]:
    """All successor states of firing an already matched rule."""
    actions = sorted(rule.rhs, key=lambda a: a.buffer)
    per_action = [_action_outcomes(a, binding, state, clear_to_dm) for a in actions]
    base = [(c, False) for c in state.store]
    out = []
    for combo in itertools.product(*per_action):
        merged1, ren1 = _merge([chunks for chunks, _ in combo])
        merged2, ren2 = _merge([base, merged1])
        gamma = dict(state.buffers)
        for i, (a, (_, rid)) in enumerate(zip(actions, combo)):
            rid = ren1[i].get(rid, rid)
            gamma[a.buffer] = (ren2[1].get(rid, rid), Fraction(0))
        store = ChunkStore(tuple(c for c, _ in merged2))
        out.append(ActrState(store, tuple((b, c, d) for b, (c, d) in gamma.items()), state.upsilon))
    return out


def actr_step(state: ActrState, model: ActrModel, *, clear_to_dm: bool = False) -> set[tuple[str, ActrState]]:
    """Every (rule name, successor) pair reachable by one rule firing."""
    out = set()
    for rule in model.normalized_rules:
        binding = _match_tests(rule, state)
        if binding is None:
            continue
        for nxt in fire(rule, binding, state, clear_to_dm):
            out.add((rule.name, nxt))
    return out


def check_state(state: ActrState, model: ActrModel) -> None:
    """Raise ModelError unless ``state`` satisfies the ActrState invariants for ``model``."""
    check_store(state.store, model.type_slots)
    names = [b for b, _, _ in state.gamma]
    if sorted(names) != sorted(model.buffers) or len(set(names)) != len(names):
        raise ModelError(f"cognitive state must map every buffer exactly once, got {names}")
    for b, c, d in state.gamma:
        if c not in state.store:
            raise ModelError(f"buffer {b!r} holds unknown chunk {c!r}")
        if d < 0:
            raise ModelError(f"buffer {b!r} has negative delay {d}")
    missing = sorted(model.rule_constants() - state.store.ids())
    if missing:
        raise ModelError(f"rule constants {missing} are not chunk identifiers of the store")
    for f in state.upsilon:
        if not is_ground(f) or (f.functor, len(f.args)) not in model.facts:
            raise ModelError(f"undeclared or non-ground fact {f!r}")
