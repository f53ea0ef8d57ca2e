"""Exhaustive semantic comparison over every small model.

For a fixed frame the truth value of a formula is computed for all
valuations at once: a numpy boolean vector indexed by the valuation mask of
:mod:`bundlefoml.oracle`.  This is what makes "all models with |W|<=2 and
|D|<=2" affordable for formulas over three predicates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .formula import And, Atom, Bot, Bundle, Formula, NegAtom, Not, Or, Top, free_vars, predicates
from .kripke import DomainPolicy, KripkeModel
from .oracle import Frame, atom_table, build_model, enumerate_frames

MAX_ATOM_BITS = 22


class FrameEvaluator:
    def __init__(self, frame: Frame, signature):
        self.frame = frame
        self.atoms = atom_table(frame.worlds, frame.domain, signature)
        if len(self.atoms) > MAX_ATOM_BITS:
            raise ValueError(f"{len(self.atoms)} valuation bits is too many to enumerate")
        self.index = {a: i for i, a in enumerate(self.atoms)}
        self.size = 1 << len(self.atoms)
        masks = np.arange(self.size, dtype=np.int64)
        self._bits = [((masks >> b) & 1).astype(bool) for b in range(len(self.atoms))]
        self._true = np.ones(self.size, dtype=bool)
        self._false = np.zeros(self.size, dtype=bool)
        self.delta = frame.delta
        self.succ = {w: [] for w in frame.worlds}
        for w, v in sorted(frame.relation):
            self.succ[w].append(v)
        self._memo: dict = {}
        self._fv: dict = {}

    def local(self, w: str) -> list[str]:
        return [d for d in self.frame.domain if d in self.delta[w]]

    def truth(self, f: Formula, w: str, env: dict[str, str]) -> np.ndarray:
        key = id(f)
        if key not in self._fv:
            self._fv[key] = (f, tuple(sorted(free_vars(f))))
        memo_key = (key, w, tuple(env[x] for x in self._fv[key][1]))
        hit = self._memo.get(memo_key)
        if hit is None:
            hit = self._memo[memo_key] = self._truth(f, w, env)
        return hit

    def _truth(self, f: Formula, w: str, env: dict[str, str]) -> np.ndarray:
        if isinstance(f, Top):
            return self._true
        if isinstance(f, Bot):
            return self._false
        if isinstance(f, Atom):
            return self._bits[self.index[(w, f.pred, tuple(env[a] for a in f.args))]]
        if isinstance(f, NegAtom):
            return ~self._bits[self.index[(w, f.pred, tuple(env[a] for a in f.args))]]
        if isinstance(f, Not):
            return ~self.truth(f.body, w, env)
        if isinstance(f, And):
            return self.truth(f.left, w, env) & self.truth(f.right, w, env)
        if isinstance(f, Or):
            return self.truth(f.left, w, env) | self.truth(f.right, w, env)
        if isinstance(f, Bundle):
            k = f.kind
            exists = k.quantifier == "exists"
            dia = k.modality == "dia"

            def combine(vectors, disjunctive):
                out = self._false if disjunctive else self._true
                for vec in vectors:
                    out = (out | vec) if disjunctive else (out & vec)
                return out

            def bindings(dom):
                for values in itertools.product(dom, repeat=len(f.binders)):
                    yield {**env, **dict(zip(f.binders, values))}

            if k.quantifier_first:
                return combine(
                    (combine((self.truth(f.body, v, b) for v in self.succ[w]), dia)
                     for b in bindings(self.local(w))),
                    exists,
                )
            return combine(
                (combine((self.truth(f.body, v, b) for b in bindings(self.local(v))), exists)
                 for v in self.succ[w]),
                dia,
            )
        raise TypeError(f"not a formula: {f!r}")

    def model(self, mask: int, policy: DomainPolicy) -> KripkeModel:
        return build_model(self.frame, self.atoms, mask, policy)


@dataclass
class Disagreement:
    model: KripkeModel
    world: str
    sigma: dict[str, str]
    left: bool
    right: bool


@dataclass
class Comparison:
    pointed_models: int
    disagreement: Disagreement | None = None

    @property
    def agree(self) -> bool:
        return self.disagreement is None


def compare(
    f: Formula,
    g: Formula,
    max_worlds: int = 2,
    max_domain: int = 2,
    policies=(DomainPolicy.INCREASING, DomainPolicy.CONSTANT),
) -> Comparison:
    """Check that ``f`` and ``g`` agree at every pointed model within bounds.

    Valuations range over the free variables of both formulas, into the
    local domain of the evaluation world.
    """
    signature = {**predicates(f), **predicates(g)}
    fv = sorted(free_vars(f) | free_vars(g))
    checked = 0
    for policy in policies:
        for frame in enumerate_frames(max_worlds, max_domain, policy):
            ev = FrameEvaluator(frame, signature)
            for w in frame.worlds:
                for values in itertools.product(ev.local(w), repeat=len(fv)):
                    env = dict(zip(fv, values))
                    a, b = ev.truth(f, w, env), ev.truth(g, w, env)
                    checked += ev.size
                    bad = np.flatnonzero(a != b)
                    if bad.size:
                        mask = int(bad[0])
                        return Comparison(
                            checked,
                            Disagreement(ev.model(mask, policy), w, env, bool(a[mask]), bool(b[mask])),
                        )
    return Comparison(checked)
