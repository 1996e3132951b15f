"""First-order terms shared by the ACT-R and CHR layers.

A term is one of

* a constant: ``str`` for symbols, ``int``/``Fraction`` for numbers,
* a :class:`Var`,
* a compound :class:`Fn` (functor plus argument tuple),
* a ``tuple`` (ordered pair or n-tuple, e.g. slot-value pairs),
* a ``frozenset`` of terms (set terms such as chunk stores).

Lists, used only as arguments of ``merge``, are written ``Fn("list", items)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterable, Iterator, Mapping, Union

Term = Any
Subst = Mapping["Var", Term]


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Fn:
    functor: str
    args: tuple = ()

    def __repr__(self) -> str:
        return format_term(self)

    @property
    def arity(self) -> int:
        return len(self.args)


Number = Union[int, Fraction]


def is_number(t: Term) -> bool:
    return isinstance(t, (int, Fraction)) and not isinstance(t, bool)


def is_constant(t: Term) -> bool:
    return isinstance(t, str) or is_number(t)


def lst(*items: Term) -> Fn:
    return Fn("list", tuple(items))


def walk(t: Term, s: Subst) -> Term:
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def apply(t: Term, s: Subst) -> Term:
    """Apply ``s`` to ``t`` until no bound variable remains."""
    if not s:
        return t
    if isinstance(t, Var):
        u = walk(t, s)
        return u if isinstance(u, Var) else apply(u, s)
    if isinstance(t, Fn):
        if not t.args:
            return t
        return Fn(t.functor, tuple(apply(a, s) for a in t.args))
    if isinstance(t, tuple):
        return tuple(apply(a, s) for a in t)
    if isinstance(t, frozenset):
        if _ground_set(t):
            return t
        return frozenset(apply(a, s) for a in t)
    return t


def term_vars(t: Term, acc: set | None = None) -> set:
    if acc is None:
        acc = set()
    if isinstance(t, Var):
        acc.add(t)
    elif isinstance(t, Fn):
        for a in t.args:
            term_vars(a, acc)
    elif isinstance(t, tuple) or isinstance(t, frozenset) and not _ground_set(t):
        for a in t:
            term_vars(a, acc)
    return acc


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Fn):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, frozenset):
        return _ground_set(t)
    if isinstance(t, tuple):
        return all(is_ground(a) for a in t)
    return True


@lru_cache(maxsize=1 << 16)
def _ground_set(t: frozenset) -> bool:
    # set terms are large and reused (chunk stores); frozenset caches its hash
    return all(is_ground(a) for a in t)


def occurs(v: Var, t: Term, s: Subst) -> bool:
    t = walk(t, s)
    if t == v:
        return True
    if isinstance(t, Fn):
        return any(occurs(v, a, s) for a in t.args)
    if isinstance(t, frozenset) and _ground_set(t):
        return False
    if isinstance(t, (tuple, frozenset)):
        return any(occurs(v, a, s) for a in t)
    return False


def _bind(v: Var, t: Term, s: dict) -> dict | None:
    if occurs(v, t, s):
        return None
    out = dict(s)
    out[v] = t
    return out


def unify(a: Term, b: Term, s: Subst | None = None, *,
          rigid: frozenset = frozenset(), keep: frozenset = frozenset()) -> Iterator[dict]:
    """Yield the most general unifiers of ``a`` and ``b`` extending ``s``.

    Set terms may have several incomparable unifiers, hence the generator.
    Variables in ``rigid`` behave like constants (one-way matching).
    Variables in ``keep`` are bound last: on a var/var equation the other
    side is bound to them.
    """
    s = dict(s) if s else {}
    a = walk(a, s)
    b = walk(b, s)
    if a is b or (type(a) is type(b) and a == b):
        yield s
        return
    av = isinstance(a, Var) and a not in rigid
    bv = isinstance(b, Var) and b not in rigid
    if av and bv:
        if a in keep and b not in keep:
            a, b = b, a
        elif (a in keep) == (b in keep) and b.name > a.name:
            a, b = b, a
        out = _bind(a, b, s)
        if out is not None:
            yield out
        return
    if av:
        out = _bind(a, b, s)
        if out is not None:
            yield out
        return
    if bv:
        out = _bind(b, a, s)
        if out is not None:
            yield out
        return
    if isinstance(a, Fn) and isinstance(b, Fn):
        if a.functor == b.functor and len(a.args) == len(b.args):
            yield from _unify_seq(a.args, b.args, s, rigid, keep)
        return
    if isinstance(a, tuple) and isinstance(b, tuple):
        if len(a) == len(b):
            yield from _unify_seq(a, b, s, rigid, keep)
        return
    if isinstance(a, frozenset) and isinstance(b, frozenset):
        yield from _unify_sets(a, b, s, rigid, keep)
        return
    if is_number(a) and is_number(b) and a == b:
        yield s


def _unify_seq(xs, ys, s, rigid, keep):
    if not xs:
        yield s
        return
    for s1 in unify(xs[0], ys[0], s, rigid=rigid, keep=keep):
        yield from _unify_seq(xs[1:], ys[1:], s1, rigid, keep)


def _unify_sets(a: frozenset, b: frozenset, s, rigid, keep):
    if is_ground(a) and is_ground(b):
        if a == b:
            yield s
        return
    xs = sorted(a, key=term_key)
    ys = sorted(b, key=term_key)
    seen: set = set()
    # every element of a equals some element of b, and every element of b is covered
    for s1, covered in _cover(xs, ys, s, frozenset(), rigid, keep):
        missing = [y for i, y in enumerate(ys) if i not in covered]
        for s2 in _cover_back(missing, xs, s1, rigid, keep):
            key = tuple(sorted(((k, apply(v, s2)) for k, v in s2.items()), key=lambda kv: kv[0].name))
            if key not in seen:
                seen.add(key)
                yield s2


def _cover(xs, ys, s, covered, rigid, keep):
    if not xs:
        yield s, covered
        return
    for j, y in enumerate(ys):
        for s1 in unify(xs[0], y, s, rigid=rigid, keep=keep):
            yield from _cover(xs[1:], ys, s1, covered | {j}, rigid, keep)


def _cover_back(missing, xs, s, rigid, keep):
    if not missing:
        yield s
        return
    for x in xs:
        for s1 in unify(missing[0], x, s, rigid=rigid, keep=keep):
            yield from _cover_back(missing[1:], xs, s1, rigid, keep)


def first_unifier(a: Term, b: Term, s: Subst | None = None, **kw) -> dict | None:
    return next(unify(a, b, s, **kw), None)


def rename(t: Term, mapping: Mapping[Var, Term]) -> Term:
    """Simultaneous one-step replacement of variables (no chain following)."""
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, Fn):
        return Fn(t.functor, tuple(rename(a, mapping) for a in t.args)) if t.args else t
    if isinstance(t, tuple):
        return tuple(rename(a, mapping) for a in t)
    if isinstance(t, frozenset):
        return frozenset(rename(a, mapping) for a in t)
    return t


@lru_cache(maxsize=1 << 16)
def term_key(t: Term) -> tuple:
    """Total order on terms: constants < variables < tuples < sets < compounds."""
    if isinstance(t, str):
        return (0, 1, t)
    if is_number(t):
        return (0, 0, t)
    if isinstance(t, Var):
        return (1, t.name)
    if isinstance(t, tuple):
        return (2, len(t), tuple(term_key(a) for a in t))
    if isinstance(t, frozenset):
        return (3, len(t), tuple(sorted(term_key(a) for a in t)))
    if isinstance(t, Fn):
        return (4, t.functor, len(t.args), tuple(term_key(a) for a in t.args))
    raise TypeError(f"not a term: {t!r}")


def sort_terms(ts: Iterable[Term]) -> tuple:
    return tuple(sorted(ts, key=term_key))


_INFIX = {"=", "in"}


def format_term(t: Term) -> str:
    if isinstance(t, str):
        return t
    if is_number(t):
        return str(t)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, tuple):
        return "(" + ", ".join(format_term(a) for a in t) + ")"
    if isinstance(t, frozenset):
        return "{" + ", ".join(format_term(a) for a in sort_terms(t)) + "}"
    if isinstance(t, Fn):
        if t.functor == "list":
            return "[" + ", ".join(format_term(a) for a in t.args) + "]"
        if t.functor in _INFIX and len(t.args) == 2:
            return f"{format_term(t.args[0])} {t.functor} {format_term(t.args[1])}"
        if not t.args:
            return t.functor
        return f"{t.functor}(" + ", ".join(format_term(a) for a in t.args) + ")"
    raise TypeError(f"not a term: {t!r}")
