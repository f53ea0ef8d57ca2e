"""Abstract syntax for bundled first-order modal formulas and the purely
syntactic operations on it: free variables, substitution, positive normal
form, cleaning, fragment classification and modal depth."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

VARIABLE_RE = re.compile(r"[a-z][a-zA-Z0-9_']*\Z")


class CaptureError(ValueError):
    """Raised when a substitution would bind the substituted variable."""


class Kind(enum.Enum):
    EXISTS_BOX = ("exists", "box", True)
    EXISTS_DIA = ("exists", "dia", True)
    FORALL_BOX = ("forall", "box", True)
    FORALL_DIA = ("forall", "dia", True)
    BOX_EXISTS = ("exists", "box", False)
    BOX_FORALL = ("forall", "box", False)
    DIA_EXISTS = ("exists", "dia", False)
    DIA_FORALL = ("forall", "dia", False)

    def __init__(self, quantifier: str, modality: str, quantifier_first: bool):
        self.quantifier = quantifier
        self.modality = modality
        self.quantifier_first = quantifier_first

    @classmethod
    def of(cls, quantifier: str, modality: str, quantifier_first: bool) -> "Kind":
        return cls((quantifier, modality, quantifier_first))

    @property
    def dual(self) -> "Kind":
        return Kind.of(
            "forall" if self.quantifier == "exists" else "exists",
            "dia" if self.modality == "box" else "box",
            self.quantifier_first,
        )


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class NegAtom:
    pred: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Bundle:
    kind: Kind
    binders: tuple[str, ...]
    body: "Formula"

    def __post_init__(self):
        if len(self.binders) not in (1, 2):
            raise ValueError(f"bundle binds 1 or 2 variables, got {self.binders!r}")


Formula = Union[Top, Bot, Atom, NegAtom, Not, And, Or, Bundle]
TOP = Top()
BOT = Bot()

LITERAL_TYPES = (Top, Bot, Atom, NegAtom)


def conj(*parts: Formula) -> Formula:
    """Left-nested conjunction; ``conj()`` is Top."""
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def bundles(f: Formula) -> Iterator[Bundle]:
    """Yield every Bundle node of ``f`` in pre-order."""
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Bundle):
            yield g
            stack.append(g.body)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.append(g.right)
            stack.append(g.left)


def predicates(f: Formula) -> dict[str, int]:
    """Map each predicate name occurring in ``f`` to its arity."""
    out: dict[str, int] = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Atom, NegAtom)):
            out.setdefault(g.pred, len(g.args))
        elif isinstance(g, (Not, Bundle)):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend((g.left, g.right))
    return out


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Atom, NegAtom)):
        return frozenset(f.args)
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Bundle):
        return free_vars(f.body) - frozenset(f.binders)
    return frozenset()


def bound_vars(f: Formula) -> frozenset[str]:
    return frozenset(v for b in bundles(f) for v in b.binders)


def all_vars(f: Formula) -> frozenset[str]:
    out = set(bound_vars(f))
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Atom, NegAtom)):
            out.update(g.args)
        elif isinstance(g, (Not, Bundle)):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend((g.left, g.right))
    return frozenset(out)


def substitute(f: Formula, x: str, y: str) -> Formula:
    """Replace the free occurrences of ``x`` in ``f`` by ``y``.

    Raises CaptureError if some free occurrence of ``x`` sits under a binder
    of ``y``.
    """
    if x == y:
        return f
    return _subst(f, x, y)


def _subst(f: Formula, x: str, y: str) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(y if a == x else a for a in f.args))
    if isinstance(f, NegAtom):
        return NegAtom(f.pred, tuple(y if a == x else a for a in f.args))
    if isinstance(f, Not):
        return Not(_subst(f.body, x, y))
    if isinstance(f, And):
        return And(_subst(f.left, x, y), _subst(f.right, x, y))
    if isinstance(f, Or):
        return Or(_subst(f.left, x, y), _subst(f.right, x, y))
    if isinstance(f, Bundle):
        if x in f.binders or x not in free_vars(f.body):
            return f
        if y in f.binders:
            raise CaptureError(f"substituting {y} for {x} is captured by binder {y}")
        return Bundle(f.kind, f.binders, _subst(f.body, x, y))
    return f


def is_pnf(f: Formula) -> bool:
    if isinstance(f, Not):
        return False
    if isinstance(f, (And, Or)):
        return is_pnf(f.left) and is_pnf(f.right)
    if isinstance(f, Bundle):
        return is_pnf(f.body)
    return True


def is_clean(f: Formula) -> bool:
    binders = [v for b in bundles(f) for v in b.binders]
    if len(binders) != len(set(binders)):
        return False
    return not (set(binders) & free_vars(f))


def to_pnf(f: Formula) -> Formula:
    """Push negations onto atoms using De Morgan and the bundle dualities."""
    return _pnf(f, False)


def _pnf(f: Formula, neg: bool) -> Formula:
    if isinstance(f, Not):
        return _pnf(f.body, not neg)
    if isinstance(f, Top):
        return BOT if neg else TOP
    if isinstance(f, Bot):
        return TOP if neg else BOT
    if isinstance(f, Atom):
        return NegAtom(f.pred, f.args) if neg else f
    if isinstance(f, NegAtom):
        return Atom(f.pred, f.args) if neg else f
    if isinstance(f, And):
        cls = Or if neg else And
        return cls(_pnf(f.left, neg), _pnf(f.right, neg))
    if isinstance(f, Or):
        cls = And if neg else Or
        return cls(_pnf(f.left, neg), _pnf(f.right, neg))
    if isinstance(f, Bundle):
        kind = f.kind.dual if neg else f.kind
        return Bundle(kind, f.binders, _pnf(f.body, neg))
    raise TypeError(f"not a formula: {f!r}")


def fresh_name(base: str, taken: Iterable[str]) -> str:
    """``base`` if free, else ``base_k`` for the least k >= 1 not in ``taken``."""
    taken = set(taken)
    if base not in taken:
        return base
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def make_clean(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """Alpha-rename binders so that ``f`` becomes clean.

    A binder keeps its name unless it is reserved, free in ``f``, or already
    used by an earlier binder (pre-order, left to right); otherwise it gets
    the least ``name_k`` suffix not occurring anywhere.
    """
    reserved = frozenset(reserved)
    avoid = set(reserved) | set(free_vars(f))
    taken = set(avoid) | set(all_vars(f))

    def walk(g: Formula, env: dict[str, str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(env.get(a, a) for a in g.args))
        if isinstance(g, NegAtom):
            return NegAtom(g.pred, tuple(env.get(a, a) for a in g.args))
        if isinstance(g, Not):
            return Not(walk(g.body, env))
        if isinstance(g, And):
            return And(walk(g.left, env), walk(g.right, env))
        if isinstance(g, Or):
            return Or(walk(g.left, env), walk(g.right, env))
        if isinstance(g, Bundle):
            inner = dict(env)
            names = []
            for v in g.binders:
                if v in avoid:
                    new = fresh_name(v, taken)
                    taken.add(new)
                else:
                    new = v
                avoid.add(new)
                inner[v] = new
                names.append(new)
            return Bundle(g.kind, tuple(names), walk(g.body, inner))
        return g

    return walk(f, {})


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    """Structural equality up to consistent renaming of bound variables."""

    def walk(a: Formula, b: Formula, ea: dict, eb: dict, depth: int) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, (Atom, NegAtom)):
            if a.pred != b.pred or len(a.args) != len(b.args):
                return False
            return all(ea.get(x, x) == eb.get(y, y) for x, y in zip(a.args, b.args))
        if isinstance(a, Not):
            return walk(a.body, b.body, ea, eb, depth)
        if isinstance(a, (And, Or)):
            return walk(a.left, b.left, ea, eb, depth) and walk(a.right, b.right, ea, eb, depth)
        if isinstance(a, Bundle):
            if a.kind is not b.kind or len(a.binders) != len(b.binders):
                return False
            ea, eb = dict(ea), dict(eb)
            for i, (x, y) in enumerate(zip(a.binders, b.binders)):
                ea[x] = eb[y] = (depth, i)
            return walk(a.body, b.body, ea, eb, depth + 1)
        return True

    return walk(f, g, {}, {}, 0)


def modal_depth(f: Formula) -> int:
    if isinstance(f, Bundle):
        return 1 + modal_depth(f.body)
    if isinstance(f, Not):
        return modal_depth(f.body)
    if isinstance(f, (And, Or)):
        return max(modal_depth(f.left), modal_depth(f.right))
    return 0


def size(f: Formula) -> int:
    if isinstance(f, (Not, Bundle)):
        return 1 + size(f.body)
    if isinstance(f, (And, Or)):
        return 1 + size(f.left) + size(f.right)
    return 1


class Fragment(enum.Enum):
    EXISTS_BOX = "ExistsBox"
    FORALL_BOX = "ForallBox"
    BOX_EXISTS = "BoxExists"
    BOX_FORALL = "BoxForall"
    EXISTS_BOX_FORALL_BOX = "ExistsBoxForallBox"
    BOX_EXISTS_BOX_FORALL = "BoxExistsBoxForall"
    BOX_EXISTS2 = "BoxExists2"
    MIXED = "Mixed"

    def __str__(self) -> str:
        return self.value


def _ops(kinds: Iterable[Kind], arities: Iterable[int] = (1,)) -> frozenset:
    return frozenset((k, n) for k in kinds for n in arities)


_QF = [k for k in Kind if k.quantifier_first]
_MF = [k for k in Kind if not k.quantifier_first]

# Operator sets per fragment. Each single family keeps the quantifier and
# ordering and admits both modalities.
FRAGMENT_OPS: dict[Fragment, frozenset] = {
    Fragment.EXISTS_BOX: _ops([Kind.EXISTS_BOX, Kind.EXISTS_DIA]),
    Fragment.FORALL_BOX: _ops([Kind.FORALL_BOX, Kind.FORALL_DIA]),
    Fragment.BOX_EXISTS: _ops([Kind.BOX_EXISTS, Kind.DIA_EXISTS]),
    Fragment.BOX_FORALL: _ops([Kind.BOX_FORALL, Kind.DIA_FORALL]),
    Fragment.EXISTS_BOX_FORALL_BOX: _ops(_QF),
    Fragment.BOX_EXISTS_BOX_FORALL: _ops(_MF),
    Fragment.BOX_EXISTS2: _ops(_MF, (1, 2)),
    Fragment.MIXED: _ops(Kind, (1, 2)),
}


def operators(f: Formula) -> frozenset:
    return frozenset((b.kind, len(b.binders)) for b in bundles(f))


def classify(f: Formula) -> Fragment:
    used = operators(f)
    if not used:
        # bundle-free formulas lie in every fragment; report the tableau's one
        return Fragment.BOX_EXISTS
    fits = [fr for fr, ops in FRAGMENT_OPS.items() if used <= ops]
    return min(fits, key=lambda fr: len(FRAGMENT_OPS[fr]))


def fragment_leq(a: Fragment, b: Fragment) -> bool:
    return FRAGMENT_OPS[a] <= FRAGMENT_OPS[b]


def in_tableau_fragment(f: Formula) -> bool:
    """True when every bundle is modality-first with a single binder."""
    return all(not k.quantifier_first and n == 1 for k, n in operators(f))
