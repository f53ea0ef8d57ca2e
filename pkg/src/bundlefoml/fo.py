"""Prenex first-order sentences over one binary relation, their finite
semantics, and the encodings into the forall-box and two-binder box-exists
bundled fragments."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from typing import Iterable, Union

from .formula import (
    TOP,
    And,
    Atom,
    Bundle,
    Formula,
    Kind,
    Not,
    Or,
    conj,
    fresh_name,
    implies,
    to_pnf,
)


class FOParseError(ValueError):
    pass


@dataclass(frozen=True)
class Rel:
    x: str
    y: str


@dataclass(frozen=True)
class FNot:
    body: "Matrix"


@dataclass(frozen=True)
class FAnd:
    left: "Matrix"
    right: "Matrix"


@dataclass(frozen=True)
class FOr:
    left: "Matrix"
    right: "Matrix"


Matrix = Union[Rel, FNot, FAnd, FOr]


@dataclass(frozen=True)
class FOSentence:
    prefix: tuple[tuple[str, str], ...]  # ("A" | "E", variable)
    matrix: Matrix
    relation: str = "R"

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(x for _, x in self.prefix)

    def __str__(self) -> str:
        head = " ".join(f"{q} {x}." for q, x in self.prefix)
        return f"{head} {render_matrix(self.matrix, self.relation)}".strip()


@dataclass(frozen=True)
class FOStructure:
    universe: tuple[str, ...]
    rel: frozenset[tuple[str, str]]

    def __post_init__(self):
        if not self.universe:
            raise ValueError("universe must be non-empty")
        stray = {e for pair in self.rel for e in pair} - set(self.universe)
        if stray:
            raise ValueError(f"relation mentions elements outside the universe: {sorted(stray)}")

    @classmethod
    def from_json(cls, data) -> "FOStructure":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(data["universe"]), frozenset((a, b) for a, b in data["rel"]))


def render_matrix(m: Matrix, relation: str = "R") -> str:
    if isinstance(m, Rel):
        return f"{relation}({m.x},{m.y})"
    if isinstance(m, FNot):
        return "~" + render_matrix(m.body, relation)
    op = " & " if isinstance(m, FAnd) else " | "
    return f"({render_matrix(m.left, relation)}{op}{render_matrix(m.right, relation)})"


_FO_TOKEN = re.compile(r"\s*(?:([()~!&|,.])|(->)|([A-Za-z_][A-Za-z0-9_']*))")


def _fo_tokens(text: str) -> list[tuple[str, int]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _FO_TOKEN.match(text, pos)
        if not m:
            raise FOParseError(f"unexpected character {text[pos]!r} at position {pos}")
        tok = m.group(1) or m.group(2) or m.group(3)
        out.append((tok, m.start(m.lastindex)))
        pos = m.end()
    out.append(("", len(text)))
    return out


def parse_fo(text: str) -> FOSentence:
    """Parse ``A x. E y. (R(x,y) & ~R(y,x))``-style prenex sentences."""
    toks = _fo_tokens(text)
    i = 0
    relation: list[str] = []

    def peek(k=0):
        return toks[min(i + k, len(toks) - 1)][0]

    def take(expected=None):
        nonlocal i
        tok, pos = toks[i]
        if expected is not None and tok != expected:
            raise FOParseError(f"expected {expected!r}, got {tok or 'end of input'!r} at position {pos}")
        i += 1
        return tok

    def is_quantifier():
        return peek() in ("A", "E") and peek(2) == "." and re.fullmatch(r"[a-z][A-Za-z0-9_']*", peek(1) or "")

    prefix = []
    while is_quantifier():
        q = take()
        x = take()
        take(".")
        if x in (v for _, v in prefix):
            raise FOParseError(f"variable {x} quantified twice")
        prefix.append((q, x))

    def disj():
        out = conj_()
        while peek() == "|":
            take()
            out = FOr(out, conj_())
        return out

    def impl():
        left = disj()
        if peek() == "->":
            take()
            return FOr(FNot(left), impl())
        return left

    def conj_():
        out = unary()
        while peek() == "&":
            take()
            out = FAnd(out, unary())
        return out

    def unary():
        if peek() in ("~", "!"):
            take()
            return FNot(unary())
        if peek() == "(":
            take()
            m = impl()
            take(")")
            return m
        if is_quantifier():
            raise FOParseError(f"quantifier inside the matrix at position {toks[i][1]}: not prenex")
        tok, pos = toks[i]
        if not tok or not tok[0].isupper():
            raise FOParseError(f"expected an atom, got {tok or 'end of input'!r} at position {pos}")
        take()
        if relation and relation[0] != tok:
            raise FOParseError(f"second relation symbol {tok} at position {pos}; only one is allowed")
        relation.append(tok)
        take("(")
        x = take()
        take(",")
        y = take()
        take(")")
        return Rel(x, y)

    matrix = impl()
    if peek() != "":
        raise FOParseError(f"trailing input {peek()!r} at position {toks[i][1]}")
    bound = {x for _, x in prefix}
    for v in sorted(_matrix_vars(matrix)):
        if v not in bound:
            raise FOParseError(f"variable {v} is unbound")
    return FOSentence(tuple(prefix), matrix, relation[0] if relation else "R")


def _matrix_vars(m: Matrix) -> set[str]:
    if isinstance(m, Rel):
        return {m.x, m.y}
    if isinstance(m, FNot):
        return _matrix_vars(m.body)
    return _matrix_vars(m.left) | _matrix_vars(m.right)


def _holds(m: Matrix, s: FOStructure, env: dict[str, str]) -> bool:
    if isinstance(m, Rel):
        return (env[m.x], env[m.y]) in s.rel
    if isinstance(m, FNot):
        return not _holds(m.body, s, env)
    if isinstance(m, FAnd):
        return _holds(m.left, s, env) and _holds(m.right, s, env)
    return _holds(m.left, s, env) or _holds(m.right, s, env)


def fo_eval(s: FOStructure, alpha: FOSentence) -> bool:
    def go(k: int, env: dict[str, str]) -> bool:
        if k == len(alpha.prefix):
            return _holds(alpha.matrix, s, env)
        q, x = alpha.prefix[k]
        results = (go(k + 1, {**env, x: d}) for d in s.universe)
        return any(results) if q == "E" else all(results)

    return go(0, {})


def fo_satisfiable_up_to(alpha: FOSentence, max_size: int) -> FOStructure | None:
    """Smallest structure (by size, then relation mask) satisfying ``alpha``."""
    for n in range(1, max_size + 1):
        universe = tuple(f"a{i}" for i in range(n))
        pairs = list(itertools.product(universe, repeat=2))
        for mask in range(1 << len(pairs)):
            s = FOStructure(universe, frozenset(p for b, p in enumerate(pairs) if mask >> b & 1))
            if fo_eval(s, alpha):
                return s
    return None


FORALL_BOX = "forall-box"
BOX_EXISTS2 = "box-exists2"
TARGETS = (FORALL_BOX, BOX_EXISTS2)


class Names:
    """Fresh variable supply: ``base`` first, then ``base_1``, ``base_2``..."""

    def __init__(self, avoid: Iterable[str] = ()):
        self.used = set(avoid)

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.used)
        self.used.add(name)
        return name


def marker_predicates(relation: str = "R") -> tuple[str, str]:
    if relation in ("P", "Q"):
        return "__P", "__Q"
    return "P", "Q"


def _check_target(target: str) -> None:
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


def tr_matrix(
    beta: Matrix,
    target: str = FORALL_BOX,
    names: Names | None = None,
    markers: tuple[str, str] = ("P", "Q"),
) -> Formula:
    """Translate a quantifier-free matrix atom by atom, then push negations in."""
    _check_target(target)
    names = names or Names(_matrix_vars(beta))
    p, q = markers

    def go(m: Matrix) -> Formula:
        if isinstance(m, Rel):
            pair = And(Atom(p, (m.x,)), Atom(q, (m.y,)))
            if target == FORALL_BOX:
                return Bundle(Kind.EXISTS_DIA, (names.fresh("z"),), pair)
            return Bundle(Kind.DIA_FORALL, (names.fresh("z"), names.fresh("z'")), pair)
        if isinstance(m, FNot):
            return Not(go(m.body))
        if isinstance(m, FAnd):
            return And(go(m.left), go(m.right))
        return Or(go(m.left), go(m.right))

    return to_pnf(go(beta))


def build_psi(alpha: FOSentence, target: str = FORALL_BOX, names: Names | None = None) -> Formula:
    _check_target(target)
    names = names or Names(alpha.variables)
    markers = marker_predicates(alpha.relation)
    # fresh names are drawn outside-in so that they read left to right
    dummies = {x: names.fresh(x + "'") for _, x in alpha.prefix} if target == BOX_EXISTS2 else {}
    body = tr_matrix(alpha.matrix, target, names, markers)
    for q, x in reversed(alpha.prefix):
        if target == FORALL_BOX:
            kind = Kind.EXISTS_DIA if q == "E" else Kind.FORALL_BOX
            body = Bundle(kind, (x,), body)
        else:
            kind = Kind.DIA_EXISTS if q == "E" else Kind.BOX_FORALL
            body = Bundle(kind, (x, dummies[x]), body)
    return body


def build_lambda(n: int, target: str = FORALL_BOX, names: Names | None = None) -> Formula:
    """Conjunction over j=0..n forcing a successor at every depth up to n."""
    _check_target(target)
    names = names or Names()
    parts = []
    for j in range(n + 1):
        if target == FORALL_BOX:
            heads = [(Kind.FORALL_BOX, (names.fresh("z"),)) for _ in range(j)]
            heads.append((Kind.EXISTS_DIA, (names.fresh("z"),)))
        else:
            heads = [(Kind.BOX_EXISTS, (names.fresh("z"), names.fresh("z'"))) for _ in range(j)]
            heads.append((Kind.DIA_FORALL, (names.fresh("z"), names.fresh("z'"))))
        f: Formula = TOP
        for kind, binders in reversed(heads):
            f = Bundle(kind, binders, f)
        parts.append(f)
    return conj(*parts)


def build_gamma(
    n: int,
    target: str = FORALL_BOX,
    names: Names | None = None,
    markers: tuple[str, str] = ("P", "Q"),
) -> Formula:
    """Formula making the marker test behave the same at every tail state."""
    _check_target(target)
    names = names or Names()
    p, q = markers
    z1, z2 = names.fresh("z1"), names.fresh("z2")
    pair = And(Atom(p, (z1,)), Atom(q, (z2,)))

    if target == FORALL_BOX:
        core_kind, ante_kind, cons_kind = Kind.EXISTS_DIA, Kind.EXISTS_DIA, Kind.FORALL_BOX
    else:
        core_kind, ante_kind, cons_kind = Kind.DIA_FORALL, Kind.DIA_FORALL, Kind.BOX_EXISTS

    def chain(kind: Kind) -> Formula:
        heads = [names.fresh("z") for _ in range(n)]
        f: Formula = Bundle(core_kind, (names.fresh("z"),), pair)
        for z in reversed(heads):
            f = Bundle(kind, (z,), f)
        return f

    antecedent = chain(ante_kind)
    consequent = chain(cons_kind)
    body = implies(antecedent, consequent)
    if target == FORALL_BOX:
        f = Bundle(Kind.FORALL_BOX, (z1,), Bundle(Kind.FORALL_BOX, (z2,), body))
    else:
        f = Bundle(Kind.BOX_FORALL, (z1, z2), body)
    return to_pnf(f)


def translate_forall_box(alpha: FOSentence) -> Formula:
    """Encoding of ``alpha`` into the forall-box fragment; satisfiable over
    constant-domain models exactly when ``alpha`` has a model."""
    names = Names(alpha.variables)
    n = len(alpha.prefix)
    markers = marker_predicates(alpha.relation)
    outer = [names.fresh("z"), names.fresh("z")]
    psi = build_psi(alpha, FORALL_BOX, names)
    for z in reversed(outer):
        psi = Bundle(Kind.FORALL_BOX, (z,), psi)
    return conj(psi, build_lambda(n + 2, FORALL_BOX, names), build_gamma(n, FORALL_BOX, names, markers))


def translate_box_exists2(alpha: FOSentence) -> Formula:
    """Encoding of ``alpha`` into the two-binder box-exists fragment."""
    names = Names(alpha.variables)
    n = len(alpha.prefix)
    markers = marker_predicates(alpha.relation)
    z, z2 = names.fresh("z"), names.fresh("z'")
    psi = Bundle(Kind.BOX_EXISTS, (z, z2), build_psi(alpha, BOX_EXISTS2, names))
    return conj(psi, build_lambda(n + 1, BOX_EXISTS2, names), build_gamma(n, BOX_EXISTS2, names, markers))


def translate(alpha: FOSentence, target: str = FORALL_BOX) -> Formula:
    _check_target(target)
    return translate_forall_box(alpha) if target == FORALL_BOX else translate_box_exists2(alpha)
