"""Concrete syntax: a recursive-descent parser and a renderer that round-trips.

Grammar, lowest precedence first::

    formula := disj ['->' formula]
    disj    := conj {'|' conj}
    conj    := unary {'&' unary}
    unary   := '!' unary | '~' atom | bundle | primary
    bundle  := ('exists'|'forall') var ('box'|'dia') formula
             | ('box'|'dia') ('exists'|'forall') var [var] formula
    primary := 'top' | 'bot' | atom | '(' formula ')'
    atom    := PRED ['(' [var {',' var}] ')']

Bundles extend as far to the right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (
    BOT,
    TOP,
    And,
    Atom,
    Bot,
    Bundle,
    Formula,
    Kind,
    NegAtom,
    Not,
    Or,
    Top,
)

KEYWORDS = {"exists", "forall", "box", "dia", "top", "bot"}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<punct>[()~!&|,])|(?P<pred>[A-Z_][A-Za-z0-9_']*)"
    r"|(?P<ident>[a-z][a-zA-Z0-9_']*))"
)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass
class Token:
    kind: str  # 'op', 'pred', 'ident', 'kw', 'eof'
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        value = m.group(m.lastgroup)
        if m.lastgroup in ("arrow", "punct"):
            tokens.append(Token("op", value, start))
        elif m.lastgroup == "pred":
            tokens.append(Token("pred", value, start))
        else:
            tokens.append(Token("kw" if value in KEYWORDS else "ident", value, start))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, arities: dict[str, int] | None):
        self.toks = tokenize(text)
        self.i = 0
        self.arities = {} if arities is None else arities

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            got = self.tok.text or "end of input"
            raise ParseError(f"expected {want!r}, got {got!r}", self.tok.pos)
        return self.take()

    def formula(self) -> Formula:
        left = self.disj()
        if self.at("op", "->"):
            self.take()
            return Or(Not(left), self.formula())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.at("op", "|"):
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.at("op", "&"):
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "op" and t.text == "!":
            self.take()
            return Not(self.unary())
        if t.kind == "op" and t.text == "~":
            self.take()
            pred, args = self.atom()
            return NegAtom(pred, args)
        if t.kind == "kw" and t.text in ("exists", "forall"):
            self.take()
            var = self.expect("ident").text
            if self.at("ident"):
                raise ParseError("two binders only allowed after the modality", self.tok.pos)
            mod = self.tok
            if not (mod.kind == "kw" and mod.text in ("box", "dia")):
                raise ParseError(f"expected 'box' or 'dia', got {mod.text!r}", mod.pos)
            self.take()
            kind = Kind.of(t.text, mod.text, True)
            return Bundle(kind, (var,), self.formula())
        if t.kind == "kw" and t.text in ("box", "dia"):
            self.take()
            q = self.tok
            if not (q.kind == "kw" and q.text in ("exists", "forall")):
                raise ParseError(f"expected 'exists' or 'forall', got {q.text!r}", q.pos)
            self.take()
            binders = [self.expect("ident").text]
            if self.at("ident"):
                binders.append(self.take().text)
            kind = Kind.of(q.text, t.text, False)
            return Bundle(kind, tuple(binders), self.formula())
        return self.primary()

    def primary(self) -> Formula:
        t = self.tok
        if t.kind == "kw" and t.text == "top":
            self.take()
            return TOP
        if t.kind == "kw" and t.text == "bot":
            self.take()
            return BOT
        if t.kind == "op" and t.text == "(":
            self.take()
            f = self.formula()
            self.expect("op", ")")
            return f
        if t.kind == "pred":
            pred, args = self.atom()
            return Atom(pred, args)
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)

    def atom(self) -> tuple[str, tuple[str, ...]]:
        t = self.expect("pred")
        args: list[str] = []
        if self.at("op", "("):
            self.take()
            if not self.at("op", ")"):
                args.append(self.expect("ident").text)
                while self.at("op", ","):
                    self.take()
                    args.append(self.expect("ident").text)
            self.expect("op", ")")
        known = self.arities.setdefault(t.text, len(args))
        if known != len(args):
            raise ParseError(
                f"predicate {t.text} used with arity {len(args)}, earlier {known}", t.pos
            )
        return t.text, tuple(args)


def parse(text: str, arities: dict[str, int] | None = None) -> Formula:
    """Parse ``text``; ``arities`` (updated in place) pins predicate arities."""
    p = _Parser(text, arities)
    f = p.formula()
    if not p.at("eof"):
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.pos)
    return f


def _atom_text(pred: str, args: tuple[str, ...]) -> str:
    return f"{pred}({','.join(args)})" if args else pred


def render(f: Formula) -> str:
    return _render(f, top=True)


def _render(f: Formula, top: bool = False) -> str:
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Atom):
        return _atom_text(f.pred, f.args)
    if isinstance(f, NegAtom):
        return "~" + _atom_text(f.pred, f.args)
    if isinstance(f, Not):
        return "!" + _operand(f.body)
    if isinstance(f, (And, Or)):
        op = " & " if isinstance(f, And) else " | "
        text = _operand(f.left) + op + _operand(f.right)
        return text if top else f"({text})"
    if isinstance(f, Bundle):
        if f.kind.quantifier_first:
            head = f"{f.kind.quantifier} {' '.join(f.binders)} {f.kind.modality}"
        else:
            head = f"{f.kind.modality} {f.kind.quantifier} {' '.join(f.binders)}"
        return f"{head} {_render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _operand(f: Formula) -> str:
    # bundles extend right, so they are wrapped whenever they are not the whole text
    if isinstance(f, Bundle):
        return f"({_render(f)})"
    return _render(f)
