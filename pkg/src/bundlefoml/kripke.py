"""Kripke models with increasing or constant domains and the truth definition
for the eight bundled operators."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .formula import And, Atom, Bot, Bundle, Formula, NegAtom, Not, Or, Top, free_vars


class DomainPolicy(enum.Enum):
    INCREASING = "increasing"
    CONSTANT = "constant"

    def __str__(self) -> str:
        return self.value


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class KripkeModel:
    worlds: tuple[str, ...]
    relation: frozenset[tuple[str, str]]
    domain: tuple[str, ...]
    delta: Mapping[str, frozenset[str]]
    valuation: Mapping[str, Mapping[str, frozenset[tuple[str, ...]]]] = field(default_factory=dict)
    policy: DomainPolicy = DomainPolicy.INCREASING

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {w: [] for w in self.worlds}
        for w, v in sorted(self.relation):
            out.setdefault(w, []).append(v)
        return {w: tuple(vs) for w, vs in out.items()}

    def holds(self, world: str, pred: str, args: tuple[str, ...]) -> bool:
        return args in self.valuation.get(world, {}).get(pred, ())

    def to_json(self) -> dict:
        return {
            "worlds": sorted(self.worlds),
            "relation": sorted([w, v] for w, v in self.relation),
            "domain": sorted(self.domain),
            "delta": {w: sorted(self.delta.get(w, ())) for w in sorted(self.worlds)},
            "valuation": {
                w: {
                    p: sorted(list(t) for t in ext)
                    for p, ext in sorted(self.valuation.get(w, {}).items())
                }
                for w in sorted(self.worlds)
            },
            "policy": self.policy.value,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "KripkeModel":
        try:
            return cls(
                worlds=tuple(data["worlds"]),
                relation=frozenset((a, b) for a, b in data["relation"]),
                domain=tuple(data["domain"]),
                delta={w: frozenset(ds) for w, ds in data["delta"].items()},
                valuation={
                    w: {p: frozenset(tuple(t) for t in ext) for p, ext in preds.items()}
                    for w, preds in data.get("valuation", {}).items()
                },
                policy=DomainPolicy(data.get("policy", "increasing")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed model JSON: {exc}") from exc


@dataclass(frozen=True)
class Violation:
    constraint: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.constraint} violated at {self.where}: {self.message}"


def validate(model: KripkeModel, policy: DomainPolicy | None = None) -> Violation | None:
    """Return None if ``model`` is well formed under ``policy``, else the first
    violated constraint."""
    policy = model.policy if policy is None else policy
    worlds = set(model.worlds)
    domain = set(model.domain)
    if not worlds:
        return Violation("nonempty-worlds", "W", "no worlds")
    if not domain:
        return Violation("nonempty-domain", "D", "empty global domain")
    for w, v in sorted(model.relation):
        if w not in worlds or v not in worlds:
            return Violation("relation", f"({w},{v})", "edge mentions an unknown world")
    arities: dict[str, int] = {}
    for w in model.worlds:
        if w not in model.delta:
            return Violation("local-domain", w, "no local domain given")
        local = model.delta[w]
        if not local:
            return Violation("nonempty-local-domain", w, "empty local domain")
        if not local <= domain:
            extra = sorted(local - domain)
            return Violation("local-domain", w, f"elements {extra} not in D")
        if policy is DomainPolicy.CONSTANT and local != domain:
            return Violation("constant-domain", w, "local domain differs from D")
        for pred, ext in sorted(model.valuation.get(w, {}).items()):
            for t in sorted(ext):
                n = arities.setdefault(pred, len(t))
                if len(t) != n:
                    return Violation("arity", f"{w}:{pred}", f"tuple {list(t)} has arity {len(t)}, expected {n}")
                if not set(t) <= domain:
                    return Violation("valuation", f"{w}:{pred}", f"tuple {list(t)} leaves D")
    for w in model.valuation:
        if w not in worlds:
            return Violation("valuation", w, "valuation for an unknown world")
    if policy is DomainPolicy.INCREASING:
        for w, v in sorted(model.relation):
            if not model.delta[w] <= model.delta[v]:
                return Violation("increasing-domain", f"({w},{v})", "local domain shrinks along the edge")
    return None


def evaluate(model: KripkeModel, world: str, sigma: Mapping[str, str], f: Formula) -> bool:
    """Truth of ``f`` at ``world`` under the valuation ``sigma``.

    Every free variable of ``f`` must be mapped into the local domain of
    ``world``.
    """
    if world not in model.delta:
        raise EvaluationError(f"unknown world {world!r}")
    local = model.delta[world]
    for x in sorted(free_vars(f)):
        if x not in sigma:
            raise EvaluationError(f"free variable {x} is unbound")
        if sigma[x] not in local:
            raise EvaluationError(f"{x} is mapped to {sigma[x]!r}, outside the domain of {world}")
    return _eval(model, world, dict(sigma), f)


def _assignments(binders: tuple[str, ...], dom: frozenset[str]):
    if len(binders) == 1:
        for d in sorted(dom):
            yield ((binders[0], d),)
    else:
        for d in sorted(dom):
            for e in sorted(dom):
                yield ((binders[0], d), (binders[1], e))


def _eval(m: KripkeModel, w: str, env: dict[str, str], f: Formula) -> bool:
    if isinstance(f, Atom):
        return m.holds(w, f.pred, tuple(env[a] for a in f.args))
    if isinstance(f, NegAtom):
        return not m.holds(w, f.pred, tuple(env[a] for a in f.args))
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Not):
        return not _eval(m, w, env, f.body)
    if isinstance(f, And):
        return _eval(m, w, env, f.left) and _eval(m, w, env, f.right)
    if isinstance(f, Or):
        return _eval(m, w, env, f.left) or _eval(m, w, env, f.right)
    if isinstance(f, Bundle):
        k = f.kind
        some_q = any if k.quantifier == "exists" else all
        some_m = any if k.modality == "dia" else all
        succ = m.successors.get(w, ())

        def at(v, binding):
            return _eval(m, v, {**env, **dict(binding)}, f.body)

        if k.quantifier_first:
            return some_q(
                some_m(at(v, b) for v in succ)
                for b in _assignments(f.binders, m.delta[w])
            )
        return some_m(
            some_q(at(v, b) for b in _assignments(f.binders, m.delta[v]))
            for v in succ
        )
    raise TypeError(f"not a formula: {f!r}")
