"""Critical-pair confluence analysis of translated ACT-R programs.

Overlaps are built symbolically from pairs of rule heads. Overlaps that no
grounding can turn into the translation of an ACT-R state are pruned. The
remaining ones are instantiated on every ground state of the model's state
universe in which they embed, and each instantiated critical pair is tested for
joinability by bounded breadth-first search from both sides.

The state universe is the set of states reachable from seed states: the
declared chunk store with every assignment of declared chunks to the buffers
that some rule tests for their type.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .actr import ActrModel, ActrState
from .chr import (
    ChrRule, ChrState, Theory, entailments, format_state, match_heads, match_rule, normalize, state_key,
    states_equivalent,
)
from .invariants import InvariantVerdict, explain, fresh_constants, satisfiable_A
from .terms import Fn, apply, format_term, unify
from .translation import theory_for, translate_model, translate_state


@dataclass(frozen=True)
class CheckOptions:
    max_steps: int = 1000
    universe_padding: int = 2
    clear_to_dm: bool = False
    show_all: bool = False
    max_states: int = 100_000

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.universe_padding < 0:
            raise ValueError("universe_padding must be non-negative")


@dataclass(frozen=True)
class Overlap:
    rule_a: str
    rule_b: str
    O: tuple[int, ...]
    O_prime: tuple[int, ...]
    state: ChrState
    unifier: tuple
    variant_a: ChrRule
    variant_b: ChrRule
    trivial: bool = False

    @property
    def raw_goal(self) -> tuple:
        ha, hb = self.variant_a.head, self.variant_b.head
        rest_a = tuple(c for i, c in enumerate(ha) if i not in self.O)
        rest_b = tuple(c for i, c in enumerate(hb) if i not in self.O_prime)
        return rest_a, rest_b, tuple(ha[i] for i in self.O)

    @property
    def raw_builtins(self) -> tuple:
        ha, hb = self.variant_a.head, self.variant_b.head
        eqs = tuple(Fn("=", (ha[i], hb[j])) for i, j in zip(self.O, self.O_prime))
        return eqs + tuple(self.variant_a.guard) + tuple(self.variant_b.guard)

    @property
    def globals(self) -> frozenset:
        return frozenset(self.variant_a.head_guard_vars() | self.variant_b.head_guard_vars())


@dataclass(frozen=True)
class CriticalPair:
    left: ChrState
    right: ChrState


@dataclass
class JoinVerdict:
    status: str
    meeting_state: ChrState | None = None
    witness: dict | None = None
    steps_used: int = 0


@dataclass
class OverlapResult:
    overlap: Overlap
    pruned: bool
    violations: InvariantVerdict
    universe: tuple
    instances: int = 0
    pairs: int = 0
    join: JoinVerdict | None = None

    @property
    def status(self) -> str:
        if self.pruned:
            return "pruned"
        return self.join.status if self.join else "joinable"


@dataclass
class ConfluenceReport:
    verdict: str
    results: list[OverlapResult]
    termination_note: str
    config: dict
    universe_states: int = 0
    universe_complete: bool = True


# --------------------------------------------------------------------------
# overlaps


def _injections(O: Sequence[int], head_a, head_b) -> Iterable[tuple[int, ...]]:
    def go(i, used):
        if i == len(O):
            yield tuple(used)
            return
        c = head_a[O[i]]
        for j, d in enumerate(head_b):
            if j not in used and d.functor == c.functor and len(d.args) == len(c.args):
                yield from go(i + 1, used + [j])
    yield from go(0, [])


def overlaps_of_pair(ra: ChrRule, rb: ChrRule, theory: Theory) -> list[Overlap]:
    va, vb = ra.renamed("#1"), rb.renamed("#2")
    ha, hb = va.head, vb.head
    out = []
    for k in range(1, len(ha) + 1):
        for O in itertools.combinations(range(len(ha)), k):
            for Op in _injections(O, ha, hb):
                lhs = tuple(ha[i] for i in O)
                rhs = tuple(hb[j] for j in Op)
                if next(unify(lhs, rhs), None) is None:
                    continue
                proto = Overlap(ra.name, rb.name, O, Op, ChrState(), (), va, vb)
                rest_a, rest_b, o = proto.raw_goal
                state = normalize(ChrState(rest_a + rest_b + o, proto.raw_builtins, proto.globals), theory)
                if state.failed:
                    continue
                unifier = tuple(sorted(((v.name, format_term(t)) for v, t in next(unify(lhs, rhs)).items())))
                trivial = ra.name == rb.name and len(O) == len(ha) and O == Op
                out.append(Overlap(ra.name, rb.name, O, Op, state, unifier, va, vb, trivial))
    return out


def compute_overlaps(program: Sequence[ChrRule], theory: Theory, *, dedupe: bool = True) -> list[Overlap]:
    """All overlaps of all rule pairs (i <= j), optionally deduplicated up to equivalence.

    Deduplication only merges overlaps of the same rule pair: the globals tie
    the overlap to the bodies of exactly those two rules.
    """
    found = []
    for i, ra in enumerate(program):
        for rb in program[i:]:
            found.extend(overlaps_of_pair(ra, rb, theory))
    if not dedupe:
        return found
    out: list[Overlap] = []
    keys: set = set()
    for o in found:
        k = (o.rule_a, o.rule_b, state_key(o.state))
        if k in keys:
            continue
        if any((p.rule_a, p.rule_b) == (o.rule_a, o.rule_b) and len(p.state.goal) == len(o.state.goal)
               and states_equivalent(p.state, o.state, theory) for p in out):
            continue
        keys.add(k)
        out.append(o)
    return out


def critical_pair_of(o: Overlap, theory: Theory) -> CriticalPair:
    """The symbolic critical pair; action built-ins stay symbolic unless ground."""
    rest_a, rest_b, _ = o.raw_goal
    left = _fire_side(rest_b, o.variant_a, o.raw_builtins, {}, o.globals, theory)
    right = _fire_side(rest_a, o.variant_b, o.raw_builtins, {}, o.globals, theory)
    return CriticalPair(left[0] if left else normalize(ChrState((), (Fn("false"),))),
                        right[0] if right else normalize(ChrState((), (Fn("false"),))))


def _fire_side(rest, rule: ChrRule, builtins, s, glob, theory: Theory) -> list[ChrState]:
    goal = tuple(rest) + tuple(rule.body_chr)
    pending = list(builtins) + list(rule.body_builtin)
    out = []
    for s2, residual in theory.solve(pending, s):
        st = normalize(ChrState(tuple(apply(c, s2) for c in goal), tuple(apply(c, s2) for c in residual), glob), theory)
        if not st.failed:
            out.append(st)
    return out


def instantiate(o: Overlap, rho: ChrState, theory: Theory) -> list[tuple[list[ChrState], list[ChrState], dict]]:
    """Ground critical pairs of ``o`` embedded in the ground state ``rho``.

    Returns one (left outcomes, right outcomes, matching) triple per embedding.
    """
    out = []
    seen = set()
    rest_a, rest_b, _ = o.raw_goal
    for s, _used in match_heads(o.state.goal, rho.goal, {}, frozenset()):
        if len(_used) != len(rho.goal):
            continue
        for th in entailments(rho.builtins, o.state.builtins, s, rigid=frozenset(), theory=theory):
            key = tuple(sorted((v.name, format_term(apply(v, th))) for v in o.state.variables()))
            if key in seen:
                continue
            seen.add(key)
            # transfer the matching to the raw variables of both variants
            raw = {}
            for v in o.globals:
                raw[v] = apply(apply(v, _state_subst(o)), th)
            left = [normalize(x.__class__(x.goal, x.builtins, frozenset()), theory)
                    for x in _fire_side(rest_b, o.variant_a, o.raw_builtins, raw, frozenset(), theory)]
            right = [normalize(x.__class__(x.goal, x.builtins, frozenset()), theory)
                     for x in _fire_side(rest_a, o.variant_b, o.raw_builtins, raw, frozenset(), theory)]
            out.append((left, right, raw))
    return out


def _state_subst(o: Overlap) -> dict:
    """Equations ``X = t`` retained for globals in the normalized overlap state."""
    s = {}
    for c in o.state.builtins:
        if c.functor == "=" and len(c.args) == 2 and hasattr(c.args[0], "name") and c.args[0] in o.globals:
            s[c.args[0]] = c.args[1]
    return s


# --------------------------------------------------------------------------
# exploration


class Explorer:
    """Successor function with a cache keyed by canonical ground states."""

    def __init__(self, program: Sequence[ChrRule], theory: Theory):
        self.program = list(program)
        self.theory = theory
        self.cache: dict = {}

    def successors(self, state: ChrState) -> list[tuple[str, ChrState]]:
        k = state_key(state)
        hit = self.cache.get(k)
        if hit is None:
            hit = []
            seen = set()
            for rule in self.program:
                for _, nxt in match_rule(state, rule, self.theory):
                    kk = (rule.name, state_key(nxt))
                    if kk not in seen:
                        seen.add(kk)
                        hit.append((rule.name, nxt))
            hit.sort(key=lambda rn: (rn[0], format_state(rn[1])))
            self.cache[k] = hit
        return hit


def state_universe(model: ActrModel, explorer: Explorer, *, max_steps: int, max_states: int
                   ) -> tuple[list[ChrState], bool]:
    """Ground states reachable from the seed states; flag is False when truncated."""
    seeds = []
    for st in seed_states(model):
        seeds.append(normalize(translate_state(st), explorer.theory))
    seen = {}
    queue = deque()
    for s in seeds:
        if state_key(s) not in seen:
            seen[state_key(s)] = s
            queue.append((s, 0))
    complete = True
    while queue:
        s, d = queue.popleft()
        if d >= max_steps:
            if explorer.successors(s):
                complete = False
            continue
        for _, nxt in explorer.successors(s):
            k = state_key(nxt)
            if k not in seen:
                if len(seen) >= max_states:
                    complete = False
                    continue
                seen[k] = nxt
                queue.append((nxt, d + 1))
    states = sorted(seen.values(), key=format_state)
    return states, complete


def seed_states(model: ActrModel) -> list[ActrState]:
    store = model.initial.store
    tested: dict[str, set[str]] = {b: set() for b in model.buffers}
    for r in model.rules:
        for t in r.lhs:
            tested[t.buffer].add(t.ctype)
    options = []
    for b in sorted(model.buffers):
        init = model.initial.buffers[b][0]
        ids = {init} | {c.id for c in store if c.ctype in tested[b]}
        options.append([(b, cid) for cid in sorted(ids)])
    out = [model.initial]
    for combo in itertools.product(*options):
        gamma = tuple((b, cid, Fraction(0)) for b, cid in combo)
        st = ActrState(store, gamma, model.initial.upsilon)
        if st != model.initial:
            out.append(st)
    return out


def joinable(pair: CriticalPair, explorer: Explorer, max_steps: int, max_states: int = 100_000) -> JoinVerdict:
    left, right = pair.left, pair.right
    kl, kr = state_key(left), state_key(right)
    if kl == kr or (not left.is_ground() and states_equivalent(left, right, explorer.theory)):
        return JoinVerdict("joinable", left, None, 0)
    seen = [{kl: (None, None, left)}, {kr: (None, None, right)}]
    fronts = [[left], [right]]
    steps = 0
    while steps < max_steps and (fronts[0] or fronts[1]):
        steps += 1
        for side in (0, 1):
            new = []
            for st in fronts[side]:
                for rule, nxt in explorer.successors(st):
                    k = state_key(nxt)
                    if k in seen[side]:
                        continue
                    seen[side][k] = (state_key(st), rule, nxt)
                    if k in seen[1 - side]:
                        return JoinVerdict("joinable", nxt, None, steps)
                    new.append(nxt)
                    if len(seen[side]) > max_states:
                        return JoinVerdict("unknown", None, None, steps)
            fronts[side] = new
    if fronts[0] or fronts[1]:
        return JoinVerdict("unknown", None, None, steps)
    return JoinVerdict("not_joinable", None, _witness(seen, explorer), steps)


def _path(seen: dict, k) -> list[tuple[str | None, ChrState]]:
    out = []
    while k is not None:
        parent, rule, st = seen[k]
        out.append((rule, st))
        k = parent
    return out[::-1]


def _witness(seen: list[dict], explorer: Explorer) -> dict:
    wit = {}
    for name, table in zip(("left", "right"), seen):
        finals = [k for k, (_, _, st) in table.items() if not explorer.successors(st)]
        if finals:
            k = min(finals, key=lambda k: format_state(table[k][2]))
        else:
            k = min(table, key=lambda k: format_state(table[k][2]))
        wit[name] = _path(table, k)
    return wit


# --------------------------------------------------------------------------
# driver


def check_confluence(model: ActrModel, opts: CheckOptions = CheckOptions()) -> ConfluenceReport:
    theory = theory_for(model, clear_to_dm=opts.clear_to_dm)
    program = translate_model(model)
    sig = model.signature
    constants = model.constants()
    universe = tuple(sorted(constants) + fresh_constants(constants, opts.universe_padding))
    overlaps = compute_overlaps(program, theory, dedupe=not opts.show_all)
    explorer = Explorer(program, theory)
    results: list[OverlapResult] = []
    live = []
    for o in overlaps:
        if satisfiable_A(o.state, universe, sig, theory):
            r = OverlapResult(o, False, InvariantVerdict(), universe)
            live.append(r)
        else:
            r = OverlapResult(o, True, explain(o.state, sig, theory), universe)
        results.append(r)
    states, complete = ([], True)
    if live:
        states, complete = state_universe(model, explorer, max_steps=opts.max_steps, max_states=opts.max_states)
    cache: dict = {}
    for r in live:
        worst = None
        for rho in states:
            for lefts, rights, _ in instantiate(r.overlap, rho, theory):
                r.instances += 1
                for a, b in itertools.product(lefts, rights):
                    key = frozenset((state_key(a), state_key(b)))
                    jv = cache.get(key)
                    if jv is None:
                        jv = joinable(CriticalPair(a, b), explorer, opts.max_steps, opts.max_states)
                        if jv.witness is not None:
                            jv.witness["overlap_instance"] = rho
                        cache[key] = jv
                    r.pairs += 1
                    if worst is None or _rank(jv.status) > _rank(worst.status):
                        worst = jv
                if worst is not None and worst.status == "not_joinable":
                    break
            if worst is not None and worst.status == "not_joinable":
                break
        r.join = worst or JoinVerdict("joinable", None, None, 0)
    statuses = [r.status for r in results]
    if "not_joinable" in statuses:
        verdict = "not_confluent"
    elif "unknown" in statuses or not complete:
        verdict = "unknown"
    else:
        verdict = "confluent"
    note = (f"The verdict assumes that the model terminates; termination is not checked. "
            f"Joinability search is bounded at {opts.max_steps} steps per side. "
            f"Critical pairs were instantiated on {len(states)} reachable states"
            + ("" if complete else " (state universe truncated)") + ".")
    config = {"max_steps": opts.max_steps, "universe_padding": opts.universe_padding,
              "clear_to_dm": opts.clear_to_dm, "show_all_overlaps": opts.show_all,
              "max_states": opts.max_states}
    return ConfluenceReport(verdict, results, note, config, len(states), complete)


def _rank(status: str) -> int:
    return {"joinable": 0, "unknown": 1, "not_joinable": 2}[status]


# --------------------------------------------------------------------------
# serialization


def _path_json(path) -> list:
    return [{"rule": rule, "state": format_state(st)} for rule, st in path]


def result_to_json(r: OverlapResult) -> dict:
    o = r.overlap
    out = {
        "rules": [o.rule_a, o.rule_b],
        "O": [format_term(o.variant_a.head[i]) for i in o.O],
        "O_prime": [format_term(o.variant_b.head[j]) for j in o.O_prime],
        "state": format_state(o.state),
        "status": r.status,
        "pruned": r.pruned,
        "trivial": o.trivial,
        "violations": r.violations.to_json(),
    }
    if r.pruned:
        out["universe"] = list(r.universe)
    else:
        out["instances"] = r.instances
        out["pairs"] = r.pairs
        jv = r.join
        out["join"] = {"status": jv.status, "steps_used": jv.steps_used,
                       "meeting_state": format_state(jv.meeting_state) if jv.meeting_state else None}
        if jv.witness:
            w = jv.witness
            out["join"]["witness"] = {
                "overlap_instance": format_state(w["overlap_instance"]) if "overlap_instance" in w else None,
                "left": _path_json(w["left"]), "right": _path_json(w["right"]),
            }
    return out


def report_to_json(report: ConfluenceReport) -> dict:
    return {
        "verdict": report.verdict,
        "overlaps": [result_to_json(r) for r in report.results],
        "termination_note": report.termination_note,
        "config": report.config,
    }


def format_report(report: ConfluenceReport) -> str:
    lines = [f"verdict: {report.verdict}", ""]
    n_pruned = sum(r.pruned for r in report.results)
    lines.append(f"overlaps: {len(report.results)} ({n_pruned} pruned by the invariant,"
                 f" {len(report.results) - n_pruned} tested)")
    for i, r in enumerate(report.results, 1):
        o = r.overlap
        head = ", ".join(format_term(o.variant_a.head[k]) for k in o.O)
        tag = " [trivial]" if o.trivial else ""
        lines.append(f"  #{i} {o.rule_a} x {o.rule_b} on {{{head}}}: {r.status}{tag}")
        if r.pruned:
            for sub, msg in r.violations.violations:
                lines.append(f"      {sub}: {msg}")
        else:
            lines.append(f"      {r.instances} instances, {r.pairs} critical pairs")
            w = r.join.witness if r.join else None
            if w:
                if "overlap_instance" in w:
                    lines.append(f"      from: {format_state(w['overlap_instance'])}")
                for side in ("left", "right"):
                    lines.append(f"      {side} derivation:")
                    for rule, st in w[side]:
                        lines.append(f"        {'start' if rule is None else rule + ' ->'} {format_state(st)}")
    lines.append("")
    lines.append(report.termination_note)
    return "\n".join(lines) + "\n"
