"""Independent oracles used by the test suite.

They share no code with the CHR path: they run on the reference ACT-R
interpreter or on explicit brute-force enumeration.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from actr_confluence.actr import ActrModel, ActrState, actr_step
from actr_confluence.chr import ChrState
from actr_confluence.terms import rename, unify


def universe_seeds(model: ActrModel) -> list[ActrState]:
    """Declared store, every buffer assignment to a chunk of a type tested on that buffer."""
    store = model.initial.store
    wanted = {b: {t.ctype for r in model.rules for t in r.lhs if t.buffer == b} for b in model.buffers}
    choices = []
    for b in sorted(model.buffers):
        ids = {model.initial.buffers[b][0]} | {c.id for c in store if c.ctype in wanted[b]}
        choices.append(sorted(ids))
    seeds = {model.initial}
    for combo in itertools.product(*choices):
        gamma = tuple((b, c, Fraction(0)) for b, c in zip(sorted(model.buffers), combo))
        seeds.add(ActrState(store, gamma, model.initial.upsilon))
    return sorted(seeds, key=repr)


def normal_forms(model: ActrModel, roots, *, cap: int = 20000, clear_to_dm: bool = False):
    """Map each reachable state to its set of terminal states; None when the cap is hit."""
    succ: dict = {}
    stack = list(roots)
    while stack:
        s = stack.pop()
        if s in succ:
            continue
        succ[s] = [t for _, t in actr_step(s, model, clear_to_dm=clear_to_dm)]
        if len(succ) > cap:
            return None
        stack.extend(t for t in succ[s] if t not in succ)
    nf: dict = {}

    def visit(s, active):
        if s in nf:
            return nf[s]
        if s in active:
            raise RecursionError("cycle")
        active.add(s)
        out = frozenset([s]) if not succ[s] else frozenset().union(*(visit(t, active) for t in succ[s]))
        active.discard(s)
        nf[s] = out
        return out

    for s in list(succ):
        visit(s, set())
    return nf


def brute_force_confluent(model: ActrModel, **kw) -> bool | None:
    nf = normal_forms(model, universe_seeds(model), **kw)
    if nf is None:
        return None
    return all(len(v) == 1 for v in nf.values())


def all_head_injections(head, goal):
    """Every injective assignment of head positions to goal positions that unifies."""
    out = []
    for perm in itertools.permutations(range(len(goal)), len(head)):
        s = {}
        ok = True
        for h, j in zip(head, perm):
            s = next(unify(h, goal[j], s), None)
            if s is None:
                ok = False
                break
        if ok:
            out.append(perm)
    return out


def witness_renaming(a: ChrState, b: ChrState) -> bool:
    """Explicit search for a bijective renaming of local variables making ``a`` equal to ``b``."""
    la = sorted(a.local_vars(), key=lambda v: v.name)
    lb = sorted(b.local_vars(), key=lambda v: v.name)
    if len(la) != len(lb) or a.globals != b.globals:
        return False
    for perm in itertools.permutations(lb):
        m = dict(zip(la, perm))
        goal = tuple(sorted((rename(c, m) for c in a.goal), key=repr))
        bi = frozenset(rename(c, m) for c in a.builtins)
        if goal == tuple(sorted(b.goal, key=repr)) and bi == frozenset(b.builtins):
            return True
    return False


def same_up_to_equivalence(xs, ys, theory) -> bool:
    """Set equality of two state lists modulo ``states_equivalent``.

    Canonical keys settle ground states cheaply; anything left over is
    compared with the full equivalence check.
    """
    from actr_confluence.chr import normalize, state_key, states_equivalent
    nx = {state_key(normalize(x, theory)): x for x in xs}
    ny = {state_key(normalize(y, theory)): y for y in ys}
    left = [x for k, x in nx.items() if k not in ny]
    right = [y for k, y in ny.items() if k not in nx]
    return (all(any(states_equivalent(a, b, theory) for b in ys) for a in left)
            and all(any(states_equivalent(a, b, theory) for b in xs) for a in right))
