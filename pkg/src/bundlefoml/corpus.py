"""Seeded random formulas for the tableau fragment."""

from __future__ import annotations

import random

from .formula import BOT, TOP, And, Atom, Bundle, Formula, Kind, NegAtom, Or, make_clean

SIGNATURE = {"P": 1, "Q": 1, "R": 2}
FREE_POOL = ("x",)
BINDER_POOL = ("u", "v", "w")
TABLEAU_KINDS = (Kind.BOX_EXISTS, Kind.BOX_FORALL, Kind.DIA_EXISTS, Kind.DIA_FORALL)


def random_formula(
    rng: random.Random,
    max_depth: int = 3,
    max_connectives: int = 10,
    signature=SIGNATURE,
    kinds=TABLEAU_KINDS,
    free_pool=FREE_POOL,
) -> Formula:
    """A clean PNF formula with at most ``max_connectives`` binary connectives
    and bundles together, and modal depth at most ``max_depth``."""
    # a small per-formula vocabulary makes clashes, and so unsatisfiable
    # instances, common enough to exercise both verdicts
    preds = rng.sample(sorted(signature), rng.randint(1, len(signature)))

    def literal(scope: list[str]) -> Formula:
        roll = rng.random()
        if roll < 0.04:
            return TOP
        if roll < 0.08:
            return BOT
        p = rng.choice(preds)
        args = tuple(rng.choice(scope) for _ in range(signature[p]))
        return (Atom if rng.random() < 0.5 else NegAtom)(p, args)

    def go(budget: int, depth: int, scope: list[str]) -> Formula:
        if budget == 0 or rng.random() < 0.15:
            return literal(scope)
        if depth > 0 and rng.random() < 0.45:
            x = rng.choice(BINDER_POOL)
            return Bundle(rng.choice(kinds), (x,), go(budget - 1, depth - 1, scope + [x]))
        left_budget = rng.randint(0, budget - 1)
        cls = And if rng.random() < 0.8 else Or
        return cls(
            go(left_budget, depth, scope),
            go(budget - 1 - left_budget, depth, scope),
        )

    return make_clean(go(rng.randint(1, max_connectives), max_depth, list(free_pool)))


def generate_corpus(seed: int = 0, count: int = 500, **kwargs) -> list[Formula]:
    rng = random.Random(seed)
    return [random_formula(rng, **kwargs) for _ in range(count)]
