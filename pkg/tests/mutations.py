"""Targeted single-invariant mutations of a translated state."""

from actr_confluence.chr import ChrState
from actr_confluence.terms import Fn


def _delta(s):
    return next(c for c in s.goal if c.functor == "delta")


def duplicate_delta(s: ChrState) -> ChrState:
    return ChrState(s.goal + (_delta(s),), s.builtins, s.globals)


def missing_gamma(s: ChrState) -> ChrState:
    g = next(c for c in s.goal if c.functor == "gamma")
    return ChrState(tuple(c for c in s.goal if c != g), s.builtins, s.globals)


def duplicate_chunk_id(s: ChrState) -> ChrState:
    d = _delta(s)
    c = min(d.args[0], key=repr)
    clone = Fn("chunk", (c.args[0], "nil", frozenset())) if c.args[1] != "nil" else \
        Fn("chunk", (c.args[0], "nil", frozenset({("x", c.args[0])})))
    return _replace_delta(s, d.args[0] | {clone})


def duplicate_slot_pair(s: ChrState) -> ChrState:
    d = _delta(s)
    slotted = [t for t in d.args[0] if t.args[2]]
    if not slotted:
        return None
    c = min(slotted, key=repr)
    slot, val = min(c.args[2], key=repr)
    other = next(t.args[0] for t in sorted(d.args[0], key=repr) if t.args[0] != val) if len(d.args[0]) > 1 else None
    if other is None:
        return None
    bad = Fn("chunk", (c.args[0], c.args[1], c.args[2] | {(slot, other)}))
    return _replace_delta(s, (d.args[0] - {c}) | {bad})


def foreign_constraint(s: ChrState) -> ChrState:
    return ChrState(s.goal + (Fn("foo", ("x",)),), s.builtins, s.globals)


def _replace_delta(s, store):
    d = _delta(s)
    return ChrState(tuple(Fn("delta", (store,)) if c == d else c for c in s.goal), s.builtins, s.globals)


MUTATIONS = [
    ("duplicate delta", duplicate_delta, "A1"),
    ("missing gamma", missing_gamma, "A2"),
    ("duplicate chunk id", duplicate_chunk_id, "A3"),
    ("duplicate slot pair", duplicate_slot_pair, "A4"),
    ("foreign constraint", foreign_constraint, "A5"),
]
