"""Tableau decision procedure for the modality-first fragment (box-exists and
box-forall with their diamond duals) over increasing-domain models.

Labels ``(w : Gamma, sigma)`` are saturated with the boolean rules, then
either expanded with (BR), one child world per diamond formula, or closed off
with (END) when only box formulas remain.  An open tableau is turned into a
model whose local domains are the sigma sets and whose worlds are the tree
paths.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .formula import (
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
    all_vars,
    bound_vars,
    conj,
    fresh_name,
    free_vars,
    in_tableau_fragment,
    is_clean,
    make_clean,
    modal_depth,
    substitute,
    to_pnf,
)
from .kripke import DomainPolicy, KripkeModel, evaluate, validate
from .syntax import render

ROOT = "r"
FRESH_ROOT_ELEMENT = "z0"


class FragmentError(ValueError):
    """The formula uses bundles the tableau does not handle."""


class TableauError(RuntimeError):
    """An internal invariant of the calculus was broken."""


class Rule(enum.Enum):
    AND = "AND"
    OR = "OR"
    BR = "BR"
    END = "END"
    LEAF = "LEAF"


@dataclass(frozen=True)
class Label:
    world: str
    formulas: tuple[Formula, ...]
    sigma: tuple[str, ...]

    def __str__(self) -> str:
        gamma = ", ".join(render(f) for f in self.formulas)
        return f"({self.world}: {{{gamma}}}, {{{', '.join(self.sigma)}}})"


@dataclass
class TableauNode:
    label: Label
    rule: Rule
    children: list["TableauNode"] = field(default_factory=list)

    def walk(self) -> Iterator["TableauNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class SatResult:
    satisfiable: bool
    model: KripkeModel | None = None
    root: str | None = None
    valuation: dict[str, str] | None = None
    tableau: TableauNode | None = None
    formula: Formula | None = None

    def __bool__(self) -> bool:
        return self.satisfiable


def _dedup(formulas) -> tuple[Formula, ...]:
    return tuple(dict.fromkeys(formulas))


def check_fragment(theta: Formula) -> None:
    if not in_tableau_fragment(theta):
        raise FragmentError(
            "tableau handles only single-binder modality-first bundles "
            "(box/dia exists/forall); found a quantifier-first or two-binder bundle"
        )


def init_root(theta: Formula) -> Label:
    check_fragment(theta)
    z = fresh_name(FRESH_ROOT_ELEMENT, all_vars(theta))
    return Label(ROOT, (theta,), tuple(sorted(free_vars(theta))) + (z,))


def _alternatives(label: Label, reverse: bool = False) -> Iterator[Label]:
    def go(todo: tuple[Formula, ...], done: tuple[Formula, ...]):
        if not todo:
            yield Label(label.world, _dedup(done), label.sigma)
            return
        f, rest = todo[0], todo[1:]
        if isinstance(f, And):
            yield from go((f.left, f.right) + rest, done)
        elif isinstance(f, Or):
            first, second = (f.right, f.left) if reverse else (f.left, f.right)
            yield from go((first,) + rest, done)
            yield from go((second,) + rest, done)
        elif isinstance(f, Top):
            yield from go(rest, done)
        elif isinstance(f, Bot):
            return
        elif isinstance(f, Not):
            raise TableauError(f"label is not in positive normal form: {render(f)}")
        else:
            yield from go(rest, done + (f,))

    yield from go(label.formulas, ())


def saturate_boolean(label: Label, reverse: bool = False) -> list[Label]:
    """All ways of resolving the (and)/(or) rules; each label keeps only
    literals and bundles.  A branch meeting ``bot`` yields nothing."""
    return list(_alternatives(label, reverse))


def partition(label: Label):
    """Split a saturated label into (box-exists, box-forall, dia-forall,
    dia-exists, literals)."""
    box_exists, box_forall, dia_forall, dia_exists, lits = [], [], [], [], []
    for f in label.formulas:
        if isinstance(f, (Top, Bot, Atom, NegAtom)):
            lits.append(f)
        elif isinstance(f, Bundle) and not f.kind.quantifier_first and len(f.binders) == 1:
            {
                Kind.BOX_EXISTS: box_exists,
                Kind.BOX_FORALL: box_forall,
                Kind.DIA_FORALL: dia_forall,
                Kind.DIA_EXISTS: dia_exists,
            }[f.kind].append(f)
        else:
            raise ValueError(f"label is not boolean-saturated: {render(f)}")
    return box_exists, box_forall, dia_forall, dia_exists, lits


def is_closed(literals) -> bool:
    pos, neg = set(), set()
    for f in literals:
        if isinstance(f, Bot):
            return True
        if isinstance(f, Atom):
            pos.add((f.pred, f.args))
        elif isinstance(f, NegAtom):
            neg.add((f.pred, f.args))
    return not pos.isdisjoint(neg)


def _child_formulas(parts, sigma: tuple[str, ...]) -> tuple[Formula, ...]:
    """Collect child formulas, renaming the binders of repeated instances so
    that the conjunction stays clean and no binder names a sigma element."""
    out: list[Formula] = []
    used = set(sigma)
    for f in parts:
        if used & bound_vars(f):
            f = make_clean(f, used)
        used |= bound_vars(f)
        out.append(f)
    return _dedup(out)


def apply_br(label: Label) -> list[Label]:
    box_exists, box_forall, dia_forall, dia_exists, _ = partition(label)
    if not (dia_forall or dia_exists):
        raise ValueError("(BR) needs at least one diamond formula")
    sigma = list(label.sigma)
    for f in box_exists + dia_exists:
        if f.binders[0] not in sigma:
            sigma.append(f.binders[0])
    sigma = tuple(sigma)
    common = [f.body for f in box_exists]
    for f in box_forall:
        common.extend(substitute(f.body, f.binders[0], x) for x in sigma)
    children = []
    for f in dia_forall:
        own = [substitute(f.body, f.binders[0], y) for y in sigma]
        world = f"{label.world}.v_{f.binders[0]}"
        children.append(Label(world, _child_formulas(common + own, sigma), sigma))
    for f in dia_exists:
        world = f"{label.world}.v_{f.binders[0]}"
        children.append(Label(world, _child_formulas(common + [f.body], sigma), sigma))
    return children


def apply_end(label: Label) -> Label:
    box_exists, box_forall, dia_forall, dia_exists, lits = partition(label)
    if dia_forall or dia_exists:
        raise ValueError("(END) does not apply while diamond formulas remain")
    if not (box_exists or box_forall):
        raise ValueError("(END) needs at least one box formula")
    return Label(label.world, tuple(lits), label.sigma)


def _check_label(label: Label) -> None:
    body = conj(*label.formulas)
    if not is_clean(body):
        raise TableauError(f"label lost cleanliness: {label}")
    if not free_vars(body) <= set(label.sigma):
        raise TableauError(f"free variables escape sigma: {label}")
    if bound_vars(body) & set(label.sigma):
        raise TableauError(f"binder names a domain element: {label}")


class _Search:
    def __init__(self, limit: int, reverse: bool, trace: Callable[[str], None] | None):
        self.limit = limit
        self.reverse = reverse
        self.trace = trace
        self.max_br = 0

    def emit(self, rule: Rule, label: Label) -> None:
        if self.trace:
            self.trace(f"{rule.value} {label.world} {len(label.formulas)} {len(label.sigma)}")

    def expand(self, label: Label, br_count: int) -> TableauNode | None:
        boolean = _boolean_rule(label)
        if boolean is not None:
            self.emit(boolean, label)
        for alt in _alternatives(label, self.reverse):
            _check_label(alt)
            box_exists, box_forall, dia_forall, dia_exists, lits = partition(alt)
            if is_closed(lits):
                continue
            if dia_forall or dia_exists:
                if br_count + 1 > self.limit:
                    raise TableauError("(BR) applied more often than the modal depth allows")
                self.emit(Rule.BR, alt)
                kids = []
                for child in apply_br(alt):
                    _check_label(child)
                    node = self.expand(child, br_count + 1)
                    if node is None:
                        break
                    kids.append(node)
                else:
                    self.max_br = max(self.max_br, br_count + 1)
                    return self._wrap(label, boolean, TableauNode(alt, Rule.BR, kids))
                continue
            if box_exists or box_forall:
                self.emit(Rule.END, alt)
                leaf = apply_end(alt)
                done = TableauNode(alt, Rule.END, [TableauNode(leaf, Rule.LEAF)])
            else:
                self.emit(Rule.LEAF, alt)
                done = TableauNode(alt, Rule.LEAF)
            return self._wrap(label, boolean, done)
        return None

    def _wrap(self, label: Label, boolean: Rule | None, node: TableauNode) -> TableauNode:
        if boolean is None:
            return node
        return TableauNode(label, boolean, [node])


def _boolean_rule(label: Label) -> Rule | None:
    """OR if saturating ``label`` splits a disjunction, AND if it only
    decomposes conjunctions or drops constants, None if nothing to do."""
    rule = None
    todo = list(label.formulas)
    while todo:
        f = todo.pop()
        if isinstance(f, Or):
            return Rule.OR
        if isinstance(f, And):
            todo.extend((f.left, f.right))
            rule = Rule.AND
        elif isinstance(f, (Top, Bot)):
            rule = Rule.AND
    return rule


def br_depth(node: TableauNode) -> int:
    """Largest number of (BR) applications on a root-to-leaf path."""
    below = max((br_depth(c) for c in node.children), default=0)
    return below + (1 if node.rule is Rule.BR else 0)


def world_literals(tree: TableauNode) -> dict[str, list[Formula]]:
    """Per-world literal table of an open tableau, in discovery order."""
    table: dict[str, list[Formula]] = {}
    for node in tree.walk():
        if node.rule in (Rule.BR, Rule.END, Rule.LEAF):
            lits = partition(node.label)[4]
            bucket = table.setdefault(node.label.world, [])
            bucket.extend(f for f in lits if f not in bucket)
    return table


def extract_model(tree: TableauNode) -> tuple[KripkeModel, str, dict[str, str]]:
    worlds: list[str] = []
    delta: dict[str, frozenset[str]] = {}
    relation: set[tuple[str, str]] = set()

    def visit(node: TableauNode, parent_world: str | None) -> None:
        w = node.label.world
        if w not in delta:
            worlds.append(w)
            delta[w] = frozenset(node.label.sigma)
            if parent_world is not None:
                relation.add((parent_world, w))
        elif delta[w] != frozenset(node.label.sigma):
            raise TableauError(f"world {w} carries two different sigma sets")
        for c in node.children:
            visit(c, w)

    visit(tree, None)
    valuation: dict[str, dict[str, frozenset]] = {}
    for w, lits in world_literals(tree).items():
        if is_closed(lits):
            raise TableauError(f"inconsistent literals accumulated at {w}")
        ext: dict[str, set] = {}
        for f in lits:
            if isinstance(f, Atom):
                ext.setdefault(f.pred, set()).add(f.args)
        valuation[w] = {p: frozenset(ts) for p, ts in ext.items()}
    domain = tuple(sorted(set().union(*delta.values())))
    model = KripkeModel(
        worlds=tuple(worlds),
        relation=frozenset(relation),
        domain=domain,
        delta=delta,
        valuation=valuation,
        policy=DomainPolicy.INCREASING,
    )
    root = tree.label.world
    return model, root, {x: x for x in tree.label.sigma}


def solve(
    theta: Formula,
    reverse: bool = False,
    trace: Callable[[str], None] | None = None,
) -> SatResult:
    """Decide satisfiability of ``theta`` over increasing-domain models.

    ``reverse`` explores right disjuncts first; the verdict does not depend
    on it.  A Sat result carries a model that has been re-checked with the
    semantic evaluator.
    """
    check_fragment(theta)
    clean = make_clean(to_pnf(theta))
    root = init_root(clean)
    search = _Search(modal_depth(clean), reverse, trace)
    tree = search.expand(root, 0)
    if tree is None:
        return SatResult(False, formula=clean)
    model, world, sigma = extract_model(tree)
    problem = validate(model, DomainPolicy.INCREASING)
    if problem is not None:
        raise TableauError(f"extracted model is malformed: {problem}")
    if not evaluate(model, world, sigma, theta):
        raise TableauError("extracted model does not satisfy the input formula")
    return SatResult(True, model, world, sigma, tree, clean)
