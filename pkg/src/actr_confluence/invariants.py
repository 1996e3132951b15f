"""The ACT-R invariant on CHR states, split into five decidable checks.

A1  exactly one ground ``delta`` holding well-formed, total chunk terms whose
    values are identifiers of the store
A2  exactly one ``gamma(b, c, e)`` per declared buffer, ``c`` an identifier of
    the store and ``e`` a non-negative number
A3  chunk identifiers are unique within a store
A4  slot-value pairs are functional
A5  only ``delta/1`` and ``gamma/3`` in the goal, only ``=`` and declared facts
    among the built-ins, and the state is ground
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .actr import NIL_TYPE, ActrState, Chunk, ChunkStore, Signature
from .chr import DEFAULT_THEORY, ChrState, Theory, normalize
from .terms import Fn, Var, apply, format_term, is_ground, is_number, term_key, unify
from .translation import is_chunk_term, translate_state

IDS = ("A1", "A2", "A3", "A4", "A5")


@dataclass(frozen=True)
class InvariantVerdict:
    violations: tuple[tuple[str, str], ...] = ()

    @property
    def holds(self) -> bool:
        return not self.violations

    @property
    def fired(self) -> frozenset[str]:
        return frozenset(i for i, _ in self.violations)

    def __add__(self, other: "InvariantVerdict") -> "InvariantVerdict":
        return InvariantVerdict(self.violations + other.violations)

    def to_json(self) -> list:
        return [list(v) for v in self.violations]


class InvariantError(ValueError):
    def __init__(self, verdict: InvariantVerdict):
        self.verdict = verdict
        super().__init__("; ".join(f"{i}: {m}" for i, m in verdict.violations))


def _verdict(tag: str, msgs: Iterable[str]) -> InvariantVerdict:
    return InvariantVerdict(tuple((tag, m) for m in msgs))


def _deltas(state: ChrState) -> list[Fn]:
    return [c for c in state.goal if c.functor == "delta" and len(c.args) == 1]


def _gammas(state: ChrState) -> list[Fn]:
    return [c for c in state.goal if c.functor == "gamma" and len(c.args) == 3]


def _store_elems(state: ChrState) -> list:
    out = []
    for d in _deltas(state):
        if isinstance(d.args[0], frozenset):
            out.extend(d.args[0])
    return out


def _ids(state: ChrState) -> set:
    return {t.args[0] for t in _store_elems(state) if isinstance(t, Fn) and t.functor == "chunk" and t.args}


def check_A1(state: ChrState, sig: Signature) -> InvariantVerdict:
    deltas = _deltas(state)
    msgs = []
    if len(deltas) != 1:
        msgs.append(f"expected exactly one delta constraint, found {len(deltas)}")
    for d in deltas:
        store = d.args[0]
        if not isinstance(store, frozenset) or not is_ground(store):
            msgs.append(f"delta argument is not a ground set: {format_term(store)}")
            continue
        ids = {t.args[0] for t in store if is_chunk_term(t)}
        for t in sorted(store, key=term_key):
            if not is_chunk_term(t):
                msgs.append(f"malformed chunk term {format_term(t)}")
                continue
            cid, ctype, svp = t.args
            if ctype not in sig.types:
                msgs.append(f"chunk {format_term(cid)} has undeclared type {format_term(ctype)}")
                continue
            slots = {s for s, _ in svp}
            if slots != set(sig.types[ctype]):
                msgs.append(f"chunk {format_term(cid)}: slots {sorted(map(str, slots))} do not match"
                            f" type {ctype} {sorted(sig.types[ctype])}")
            for s, v in sorted(svp, key=term_key):
                if v not in ids:
                    msgs.append(f"chunk {format_term(cid)}: value {format_term(v)} of slot {s} is not a chunk identifier")
    return _verdict("A1", msgs)


def check_A2(state: ChrState, sig: Signature) -> InvariantVerdict:
    ids = _ids(state)
    per = defaultdict(list)
    msgs = []
    for g in _gammas(state):
        b, c, e = g.args
        per[b].append(g)
        if b not in sig.buffers and is_ground(b):
            msgs.append(f"gamma for undeclared buffer {format_term(b)}")
        if is_ground(c) and c not in ids:
            msgs.append(f"buffer {format_term(b)} holds {format_term(c)}, which is not in the chunk store")
        if is_ground(e) and not (is_number(e) and e >= 0):
            msgs.append(f"buffer {format_term(b)} has invalid delay {format_term(e)}")
    for b in sig.buffers:
        n = len(per.get(b, []))
        if n != 1:
            msgs.append(f"buffer {b} has {n} gamma constraints")
    return _verdict("A2", msgs)


def check_A3(state: ChrState, sig: Signature | None = None) -> InvariantVerdict:
    msgs = []
    for d in _deltas(state):
        if not isinstance(d.args[0], frozenset):
            continue
        count = Counter(t.args[0] for t in d.args[0] if isinstance(t, Fn) and t.functor == "chunk" and t.args)
        for cid, n in sorted(count.items(), key=lambda kv: term_key(kv[0])):
            if n > 1:
                msgs.append(f"identifier {format_term(cid)} names {n} different chunks")
    return _verdict("A3", msgs)


def check_A4(state: ChrState, sig: Signature | None = None) -> InvariantVerdict:
    msgs = []
    for t in sorted(_store_elems(state), key=term_key):
        if not is_chunk_term(t):
            continue
        slots = Counter(s for s, _ in t.args[2])
        for s, n in sorted(slots.items(), key=lambda kv: term_key(kv[0])):
            if n > 1:
                msgs.append(f"chunk {format_term(t.args[0])} has {n} values for slot {format_term(s)}")
    return _verdict("A4", msgs)


def check_A5(state: ChrState, sig: Signature) -> InvariantVerdict:
    msgs = []
    for c in state.goal:
        if (c.functor, len(c.args)) not in {("delta", 1), ("gamma", 3)}:
            msgs.append(f"foreign goal constraint {format_term(c)}")
    for c in state.builtins:
        key = (c.functor, len(c.args))
        if key != ("=", 2) and key not in sig.facts:
            msgs.append(f"built-in {format_term(c)} is neither an equation nor a declared fact")
    if not state.is_ground():
        names = ", ".join(sorted(v.name for v in state.variables()))
        msgs.append(f"state is not ground (variables {names})")
    return _verdict("A5", msgs)


CHECKS = (check_A1, check_A2, check_A3, check_A4, check_A5)


def check_A(state: ChrState, sig: Signature, theory: Theory = DEFAULT_THEORY) -> InvariantVerdict:
    state = normalize(state, theory)
    if state.failed:
        return InvariantVerdict((("A5", "failed state"),))
    out = InvariantVerdict()
    for check in CHECKS:
        out = out + check(state, sig)
    return out


def reconstruct_actr(state: ChrState, sig: Signature, theory: Theory = DEFAULT_THEORY) -> ActrState:
    """Build the ACT-R state whose translation is equivalent to ``state``."""
    verdict = check_A(state, sig, theory)
    if not verdict.holds:
        raise InvariantError(verdict)
    state = normalize(state, theory)
    (delta,) = _deltas(state)
    store = ChunkStore(tuple(Chunk(t.args[0], t.args[1], tuple(t.args[2])) for t in delta.args[0]))
    gamma = tuple((b, c, Fraction(e)) for b, c, e in (g.args for g in _gammas(state)))
    facts = tuple(c for c in state.builtins if c.functor != "=")
    return ActrState(store, gamma, facts)


# --------------------------------------------------------------------------
# non-ground states


def structural_violations(state: ChrState, sig: Signature) -> InvariantVerdict:
    """Violations that no grounding of ``state`` can repair."""
    msgs: list[tuple[str, str]] = []
    deltas = _deltas(state)
    if len(deltas) != 1:
        msgs.append(("A1", f"{len(deltas)} delta constraints"))
    per = Counter()
    for g in _gammas(state):
        b = g.args[0]
        if is_ground(b):
            if b not in sig.buffers:
                msgs.append(("A2", f"gamma for undeclared buffer {format_term(b)}"))
            per[b] += 1
    for b in sig.buffers:
        nonground = sum(1 for g in _gammas(state) if not is_ground(g.args[0]))
        if per[b] > 1:
            msgs.append(("A2", f"{per[b]} gamma constraints for buffer {b}"))
        elif per[b] == 0 and nonground == 0:
            msgs.append(("A2", f"no gamma constraint for buffer {b}"))
    for c in state.goal:
        if (c.functor, len(c.args)) not in {("delta", 1), ("gamma", 3)}:
            msgs.append(("A5", f"foreign goal constraint {format_term(c)}"))
    for c in state.builtins:
        key = (c.functor, len(c.args))
        if key not in {("=", 2), ("in", 2)} and key not in sig.facts:
            msgs.append(("A5", f"built-in {format_term(c)} is not allowed"))
    return InvariantVerdict(tuple(msgs))


def fresh_constants(taken: Iterable[str], n: int, prefix: str = "u") -> list[str]:
    taken = set(taken)
    out = []
    for i in itertools.count(1):
        if len(out) == n:
            return out
        if f"{prefix}{i}" not in taken:
            out.append(f"{prefix}{i}")
    return out


def _constants(t, acc: set) -> set:
    if isinstance(t, Fn):
        for a in t.args:
            _constants(a, acc)
    elif isinstance(t, (tuple, frozenset)):
        for a in t:
            _constants(a, acc)
    elif isinstance(t, str):
        acc.add(t)
    return acc


def _ground_candidate(state: ChrState, s: dict, sig: Signature, theory: Theory) -> ChrState | None:
    """Apply ``s`` and materialize the delta set variable from the ``in`` atoms."""
    goal = [apply(c, s) for c in state.goal]
    builtins = [apply(c, s) for c in state.builtins]
    deltas = [c for c in goal if c.functor == "delta" and len(c.args) == 1]
    if len(deltas) != 1:
        return None
    dvar = deltas[0].args[0]
    elems = set()
    rest = []
    for c in builtins:
        if c.functor == "in" and len(c.args) == 2 and c.args[1] == dvar and isinstance(dvar, Var):
            elems.add(c.args[0])
        else:
            rest.append(c)
    if isinstance(dvar, Var):
        store = frozenset(elems)
    else:
        store = dvar
        rest = builtins
    if not is_ground(store):
        return None
    ids = {t.args[0] for t in store if is_chunk_term(t)}
    refs = set()
    for t in store:
        if is_chunk_term(t):
            refs.update(v for _, v in t.args[2])
    for g in goal:
        if g.functor == "gamma" and len(g.args) == 3:
            refs.add(g.args[1])
    filler = {Fn("chunk", (r, NIL_TYPE, frozenset())) for r in refs - ids if isinstance(r, str)}
    store = store | filler
    goal = [Fn("delta", (store,)) if c is deltas[0] else c for c in goal]
    goal = [apply(c, {dvar: store}) if isinstance(dvar, Var) else c for c in goal]
    rest = [apply(c, {dvar: store}) if isinstance(dvar, Var) else c for c in rest]
    return normalize(ChrState(tuple(goal), tuple(rest), frozenset()), theory)


def _delay_vars(state: ChrState) -> set:
    out = set()
    for g in _gammas(state):
        if isinstance(g.args[2], Var):
            out.add(g.args[2])
    return out


def _merge_same_ids(atoms: list, s: dict):
    """Unify chunk atoms that share an identifier term (A3); yields substitutions."""
    atoms = [apply(a, s) for a in atoms]
    groups = defaultdict(list)
    for a in atoms:
        if isinstance(a, Fn) and a.functor == "chunk" and len(a.args) == 3:
            groups[a.args[0]].append(a)
    pairs = [(g[0], x) for g in groups.values() for x in g[1:]]

    def go(i, s):
        if i == len(pairs):
            yield s
            return
        for s1 in unify(pairs[i][0], pairs[i][1], s):
            yield from go(i + 1, s1)
    yield from go(0, s)


def satisfiable_A(state: ChrState, universe: Iterable[str], sig: Signature,
                  theory: Theory = DEFAULT_THEORY, *, search_limit: int = 5_000) -> bool:
    """Does some grounding over ``universe`` satisfy the invariant?"""
    return find_A_grounding(state, universe, sig, theory, search_limit=search_limit) is not None


def find_A_grounding(state: ChrState, universe: Iterable[str], sig: Signature,
                     theory: Theory = DEFAULT_THEORY, *, search_limit: int = 5_000) -> ChrState | None:
    """A ground state satisfying the invariant that instantiates ``state``, if any."""
    # globals do not matter for satisfiability; solving all equations simplifies the search
    state = normalize(ChrState(state.goal, state.builtins, frozenset()), theory)
    if state.failed or not structural_violations(state, sig).holds:
        return None
    if state.is_ground():
        return state if check_A(state, sig, theory).holds else None
    universe = sorted(set(universe), key=term_key)
    deltas = _deltas(state)
    dvar = deltas[0].args[0]
    atoms = [c.args[0] for c in state.builtins if c.functor == "in" and len(c.args) == 2 and c.args[1] == dvar]
    delays = _delay_vars(state)
    base = {e: Fraction(0) for e in delays}
    for s0 in _merge_same_ids(atoms, base):
        # fast path: remaining variables become pairwise distinct fresh constants
        rest = sorted(state.variables() - {dvar} - set(s0), key=lambda v: v.name)
        rest = [v for v in rest if isinstance(apply(v, s0), Var)]
        used = _constants((state.goal, state.builtins), set())
        extra = fresh_constants(used | set(universe), len(rest), prefix="w")
        s1 = dict(s0)
        for v, k in zip(rest, extra):
            if isinstance(apply(v, s1), Var):
                s1[apply(v, s1)] = k
        cand = _ground_candidate(state, s1, sig, theory)
        if cand is not None and not cand.failed and check_A(cand, sig, theory).holds:
            return cand
    # exhaustive search over the universe with symmetry breaking
    variables = sorted(state.variables() - {dvar} - delays, key=lambda v: v.name)
    budget = [search_limit]
    used0 = _constants((state.goal, state.builtins), set())

    def go(i, s, used):
        if budget[0] <= 0:
            return None
        if i == len(variables):
            budget[0] -= 1
            cand = _ground_candidate(state, s, sig, theory)
            if cand is not None and not cand.failed and check_A(cand, sig, theory).holds:
                return cand
            return None
        v = variables[i]
        known = sorted(used & set(universe), key=term_key)
        fresh = [k for k in universe if k not in used][:1]
        for k in known + fresh:
            hit = go(i + 1, {**s, v: k}, used | {k})
            if hit is not None:
                return hit
        return None

    return go(0, dict(base), set(used0))


def explain(state: ChrState, sig: Signature, theory: Theory = DEFAULT_THEORY) -> InvariantVerdict:
    """Why an overlap is unsatisfiable: structural violations, else a generic note."""
    state = normalize(state, theory)
    if state.failed:
        return InvariantVerdict((("A5", "built-ins are inconsistent"),))
    v = structural_violations(state, sig)
    if v.violations:
        return v
    return InvariantVerdict((("A", "no grounding over the universe satisfies the invariant"),))


def roundtrip_ok(state: ChrState, sig: Signature, theory: Theory = DEFAULT_THEORY) -> bool:
    from .chr import states_equivalent
    return states_equivalent(translate_state(reconstruct_actr(state, sig, theory)), state, theory)
