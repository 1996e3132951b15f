"""Reader and writer for the line-oriented model file format.

    buffers goal, retrieval.
    type order(first, second).
    chunk a : order(first: 1, second: 2).
    buffer goal = b0.                 # optional: delay 1/2
    facts busy/1.                     # allowed additional-information predicates
    fact busy(motor).
    rule count { goal: g(current: X); retrieval: order(first: X, second: Y)
                 ==> modify goal g(current: Y); request retrieval order(first: Y) }

Identifiers starting with an uppercase letter are variables; identifiers
starting with a lowercase letter or digit are constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .actr import (
    NIL_ID, NIL_TYPE, Action, ActrModel, ActrRule, ActrState, BufferTest, Chunk, ChunkStore,
    ChunkType, ModelError, check_rule, check_store,
)
from .terms import Fn, Var

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<arrow>==>)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?(?![A-Za-z_\-]))
  | (?P<name>[A-Za-z0-9_][A-Za-z0-9_\-]*)
  | (?P<punct>[(){}:;,.=/])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ModelError(f"unexpected character {source[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            out.append(Token("name" if kind == "num" else kind, text, line, m.start() - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.buffers: list[str] = []
        self.types: dict[str, ChunkType] = {}
        self.chunks: list[tuple[Chunk, Token]] = []
        self.initial: dict[str, tuple[str, Fraction, Token]] = {}
        self.facts: set[tuple[str, int]] = set()
        self.fact_atoms: list[tuple[Fn, Token]] = []
        self.rules: list[tuple[ActrRule, Token]] = []

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ModelError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def name(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "name":
            self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        if t.text.startswith("_"):
            self.error(f"identifiers may not start with '_': {t.text!r}")
        self.i += 1
        return t.text

    def constant(self, what: str) -> str:
        t = self.tok
        text = self.name(what)
        if text[0].isupper():
            self.error(f"expected a constant for {what}, found variable {text!r}", t)
        return text

    def value(self):
        text = self.name("slot value")
        return Var(text) if text[0].isupper() else text

    def slot_values(self, allow_vars: bool) -> tuple:
        pairs = []
        if not self.accept("("):
            return ()
        if self.accept(")"):
            return ()
        while True:
            slot = self.constant("slot name")
            self.expect(":")
            t = self.tok
            v = self.value()
            if isinstance(v, Var) and not allow_vars:
                self.error(f"variables are not allowed here: {v.name}", t)
            pairs.append((slot, v))
            if self.accept(")"):
                return tuple(pairs)
            self.expect(",")

    # -- statements
    def parse(self) -> ActrModel:
        while self.tok.kind != "eof":
            kw = self.tok
            handler = getattr(self, f"st_{kw.text}", None)
            if kw.kind != "name" or handler is None:
                self.error(f"unknown statement {kw.text!r}")
            self.next()
            handler(kw)
        return self.build()

    def st_buffers(self, kw):
        while True:
            b = self.constant("buffer name")
            if b in self.buffers:
                self.error(f"buffer {b!r} declared twice", kw)
            self.buffers.append(b)
            if not self.accept(","):
                break
        self.expect(".")

    def st_type(self, kw):
        name = self.constant("type name")
        if name == NIL_TYPE:
            self.error("type name 'nil' is reserved", kw)
        if name in self.types:
            self.error(f"type {name!r} declared twice", kw)
        slots = []
        if self.accept("(") and not self.accept(")"):
            while True:
                slots.append(self.constant("slot name"))
                if self.accept(")"):
                    break
                self.expect(",")
        if len(set(slots)) != len(slots):
            self.error(f"type {name!r}: duplicate slot name", kw)
        self.expect(".")
        self.types[name] = ChunkType(name, tuple(slots))

    def st_chunk(self, kw):
        cid = self.constant("chunk identifier")
        if cid == NIL_ID:
            self.error(f"chunk identifier {NIL_ID!r} is reserved", kw)
        self.expect(":")
        ctype = self.constant("chunk type")
        svp = self.slot_values(allow_vars=False)
        self.expect(".")
        self.chunks.append((Chunk(cid, ctype, svp), kw))

    def st_buffer(self, kw):
        b = self.constant("buffer name")
        self.expect("=")
        cid = self.constant("chunk identifier")
        delay = Fraction(0)
        if self.accept("delay"):
            t = self.tok
            try:
                delay = Fraction(self.name("delay"))
            except ValueError:
                self.error("delay must be a non-negative number", t)
        self.expect(".")
        if b in self.initial:
            self.error(f"initial content of buffer {b!r} given twice", kw)
        self.initial[b] = (cid, delay, kw)

    def st_facts(self, kw):
        while True:
            name = self.constant("predicate name")
            self.expect("/")
            t = self.tok
            arity = self.name("arity")
            if not arity.isdigit():
                self.error("arity must be a number", t)
            self.facts.add((name, int(arity)))
            if not self.accept(","):
                break
        self.expect(".")

    def st_fact(self, kw):
        name = self.constant("predicate name")
        args = []
        if self.accept("(") and not self.accept(")"):
            while True:
                args.append(self.constant("fact argument"))
                if self.accept(")"):
                    break
                self.expect(",")
        self.expect(".")
        self.fact_atoms.append((Fn(name, tuple(args)), kw))

    def st_rule(self, kw):
        name = self.name("rule name")
        self.expect("{")
        tests = []
        if self.tok.text != "==>":
            while True:
                buf = self.constant("buffer name")
                self.expect(":")
                ctype = self.constant("chunk type")
                tests.append(BufferTest(buf, ctype, self.slot_values(allow_vars=True)))
                if not self.accept(";"):
                    break
        self.expect("==>")
        actions = []
        if self.tok.text != "}":
            while True:
                t = self.tok
                kind = self.name("action")
                if kind not in ("modify", "request", "clear"):
                    self.error(f"unknown action {kind!r}", t)
                buf = self.constant("buffer name")
                if kind == "clear":
                    actions.append(Action("clear", buf))
                else:
                    ctype = self.constant("chunk type")
                    actions.append(Action(kind, buf, ctype, self.slot_values(allow_vars=True)))
                if not self.accept(";"):
                    break
        self.expect("}")
        if any(r.name == name for r, _ in self.rules):
            self.error(f"rule {name!r} defined twice", kw)
        self.rules.append((ActrRule(name, tuple(tests), tuple(actions)), kw))

    # -- assembly and validation
    def build(self) -> ActrModel:
        types = {NIL_TYPE: frozenset(), **{t.name: frozenset(t.slots) for t in self.types.values()}}
        chunks = [c for c, _ in self.chunks]
        for b, (cid, _, tok) in self.initial.items():
            if b not in self.buffers:
                self.error(f"undeclared buffer {b!r}", tok)
        if NIL_ID in {cid for cid, _, _ in self.initial.values()} or set(self.buffers) - self.initial.keys():
            chunks.append(Chunk(NIL_ID, NIL_TYPE))
        store = ChunkStore(tuple(chunks))
        try:
            check_store(store, types)
        except ModelError as e:
            tok = next((t for c, t in self.chunks if repr(c.id) in e.message), None)
            raise ModelError(e.message, *(tok.line, tok.col) if tok else (None, None)) from None
        for b, (cid, delay, tok) in self.initial.items():
            if cid not in store:
                self.error(f"buffer {b!r} holds undeclared chunk {cid!r}", tok)
        for atom, tok in self.fact_atoms:
            if (atom.functor, len(atom.args)) not in self.facts:
                self.error(f"fact {atom!r} does not match a declared predicate", tok)
        for rule, tok in self.rules:
            try:
                check_rule(rule, types, self.buffers)
            except ModelError as e:
                raise ModelError(e.message, tok.line, tok.col) from None
            for part in (*rule.lhs, *rule.rhs):
                for _, v in part.svp:
                    if isinstance(v, str) and v not in store:
                        self.error(f"rule {rule.name}: constant {v!r} is not a declared chunk", tok)
        gamma = tuple((b, *self.initial.get(b, (NIL_ID, Fraction(0), None))[:2]) for b in self.buffers)
        initial = ActrState(store, gamma, tuple(a for a, _ in self.fact_atoms))
        return ActrModel(tuple(self.types.values()), tuple(self.buffers),
                         tuple(r for r, _ in self.rules), initial, frozenset(self.facts))


def parse_model(source: str) -> ActrModel:
    """Parse and validate a model file; raises ModelError with line/column."""
    return _Parser(source).parse()


def load_model(path) -> ActrModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _svp(pairs) -> str:
    if not pairs:
        return ""
    return "(" + ", ".join(f"{s}: {v.name if isinstance(v, Var) else v}" for s, v in pairs) + ")"


def format_model(model: ActrModel) -> str:
    lines = []
    if model.buffers:
        lines.append("buffers " + ", ".join(model.buffers) + ".")
    for t in model.types:
        lines.append(f"type {t.name}" + (f"({', '.join(t.slots)})" if t.slots else "") + ".")
    for c in model.initial.store:
        if c.id == NIL_ID and c.ctype == NIL_TYPE:
            continue
        lines.append(f"chunk {c.id} : {c.ctype}{_svp(c.values)}.")
    for b in model.buffers:
        cid, delay = model.initial.buffers[b]
        lines.append(f"buffer {b} = {cid}" + (f" delay {delay}" if delay else "") + ".")
    if model.facts:
        lines.append("facts " + ", ".join(f"{n}/{a}" for n, a in sorted(model.facts)) + ".")
    for f in model.initial.upsilon:
        lines.append(f"fact {f.functor}" + (f"({', '.join(f.args)})" if f.args else "") + ".")
    for r in model.rules:
        tests = "; ".join(f"{t.buffer}: {t.ctype}{_svp(t.svp)}" for t in r.lhs)
        acts = "; ".join(f"clear {a.buffer}" if a.kind == "clear" else f"{a.kind} {a.buffer} {a.ctype}{_svp(a.svp)}"
                         for a in r.rhs)
        lines.append(f"rule {r.name} {{ {tests} ==> {acts} }}".replace("{  ==>", "{ ==>").replace("==>  }", "==> }"))
    return "\n".join(lines) + "\n"
