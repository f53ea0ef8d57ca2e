"""Bounded model enumeration and a brute-force satisfiability oracle.

Models are named canonically (worlds ``w0..``, elements ``d0..``) and ordered
by ``(|W|, |D|, relation mask, delta mask, valuation mask)``.  Bit ``i*n+j``
of the relation mask is the edge ``(w_i, w_j)``; bit ``i*m+j`` of the delta
mask puts ``d_j`` into the local domain of ``w_i``; valuation bits follow
:func:`atom_table`.

:func:`bounded_sat` answers with the enumeration-order-least witness.  The
default ``method="sat"`` gets there through a propositional grounding and a
greedy lexicographic minimisation; ``method="enumerate"`` walks the models
one by one and is kept as the reference route.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from pysat.solvers import Solver

from .formula import And, Atom, Bot, Bundle, Formula, NegAtom, Not, Or, Top, free_vars, predicates
from .kripke import DomainPolicy, KripkeModel, evaluate

SAT_BACKEND = "cadical153"


def world_names(n: int) -> tuple[str, ...]:
    return tuple(f"w{i}" for i in range(n))


def element_names(m: int) -> tuple[str, ...]:
    return tuple(f"d{j}" for j in range(m))


@dataclass(frozen=True)
class Frame:
    worlds: tuple[str, ...]
    domain: tuple[str, ...]
    relation_mask: int
    delta_mask: int

    @property
    def relation(self) -> frozenset[tuple[str, str]]:
        n = len(self.worlds)
        return frozenset(
            (self.worlds[b // n], self.worlds[b % n])
            for b in range(n * n)
            if self.relation_mask >> b & 1
        )

    @property
    def delta(self) -> dict[str, frozenset[str]]:
        m = len(self.domain)
        return {
            w: frozenset(d for j, d in enumerate(self.domain) if self.delta_mask >> (i * m + j) & 1)
            for i, w in enumerate(self.worlds)
        }


def _delta_ok(n: int, m: int, rmask: int, dmask: int, policy: DomainPolicy) -> bool:
    full = (1 << m) - 1
    rows = [(dmask >> (i * m)) & full for i in range(n)]
    if any(r == 0 for r in rows):
        return False
    if policy is DomainPolicy.CONSTANT:
        return all(r == full for r in rows)
    for b in range(n * n):
        if rmask >> b & 1:
            i, j = divmod(b, n)
            if rows[i] & ~rows[j]:
                return False
    return True


def enumerate_frames(
    max_worlds: int, max_domain: int, policy: DomainPolicy, sizes=None
) -> Iterator[Frame]:
    if sizes is None:
        sizes = itertools.product(range(1, max_worlds + 1), range(1, max_domain + 1))
    for n, m in sizes:
        worlds, domain = world_names(n), element_names(m)
        for rmask in range(1 << (n * n)):
            if policy is DomainPolicy.CONSTANT:
                dmasks = [(1 << (n * m)) - 1]
            else:
                dmasks = range(1 << (n * m))
            for dmask in dmasks:
                if _delta_ok(n, m, rmask, dmask, policy):
                    yield Frame(worlds, domain, rmask, dmask)


def atom_table(
    worlds: tuple[str, ...], domain: tuple[str, ...], signature: Mapping[str, int]
) -> list[tuple[str, str, tuple[str, ...]]]:
    """The valuation-mask bit layout: world, then predicate name, then tuple."""
    return [
        (w, p, t)
        for w in worlds
        for p in sorted(signature)
        for t in itertools.product(domain, repeat=signature[p])
    ]


def valuation_from_mask(atoms, worlds, mask: int) -> dict:
    val: dict[str, dict[str, set]] = {w: {} for w in worlds}
    for b, (w, p, t) in enumerate(atoms):
        ext = val[w].setdefault(p, set())
        if mask >> b & 1:
            ext.add(t)
    return {w: {p: frozenset(e) for p, e in ps.items()} for w, ps in val.items()}


def build_model(frame: Frame, atoms, mask: int, policy: DomainPolicy) -> KripkeModel:
    return KripkeModel(
        worlds=frame.worlds,
        relation=frame.relation,
        domain=frame.domain,
        delta=frame.delta,
        valuation=valuation_from_mask(atoms, frame.worlds, mask),
        policy=policy,
    )


def enumerate_models(
    signature: Mapping[str, int], max_worlds: int, max_domain: int, policy: DomainPolicy
) -> Iterator[KripkeModel]:
    if max_worlds < 1 or max_domain < 1:
        raise ValueError("bounds must be at least 1")
    for frame in enumerate_frames(max_worlds, max_domain, policy):
        atoms = atom_table(frame.worlds, frame.domain, signature)
        for mask in range(1 << len(atoms)):
            yield build_model(frame, atoms, mask, policy)


def count_models(signature, max_worlds, max_domain, policy) -> int:
    total = 0
    for frame in enumerate_frames(max_worlds, max_domain, policy):
        total += 1 << len(atom_table(frame.worlds, frame.domain, signature))
    return total


@dataclass(frozen=True)
class Witness:
    model: KripkeModel
    world: str
    sigma: dict[str, str]


def pointed_valuations(model: KripkeModel, world: str, variables) -> Iterator[dict[str, str]]:
    """Valuations of ``variables`` (sorted) into the local domain, in canonical order."""
    variables = sorted(variables)
    local = [d for d in model.domain if d in model.delta[world]]
    for values in itertools.product(local, repeat=len(variables)):
        yield dict(zip(variables, values))


def first_pointed(model: KripkeModel, f: Formula) -> Witness | None:
    fv = free_vars(f)
    for w in model.worlds:
        for sigma in pointed_valuations(model, w, fv):
            if evaluate(model, w, sigma, f):
                return Witness(model, w, sigma)
    return None


def bounded_sat(
    f: Formula,
    max_worlds: int,
    max_domain: int,
    policy: DomainPolicy = DomainPolicy.INCREASING,
    method: str = "sat",
) -> Witness | None:
    """The enumeration-order-least pointed model of ``f`` within the bounds.

    ``None`` only means no model exists within the bounds.
    """
    if max_worlds < 1 or max_domain < 1:
        raise ValueError("bounds must be at least 1")
    if method == "enumerate":
        for model in enumerate_models(predicates(f), max_worlds, max_domain, policy):
            found = first_pointed(model, f)
            if found:
                return found
        return None
    if method != "sat":
        raise ValueError(f"unknown method {method!r}")
    # Any witness with fewer worlds or elements pads to one at the maximal
    # size (unreachable worlds, cloned elements), so one call settles existence.
    if not _Grounding(f, max_worlds, max_domain, policy).satisfiable():
        return None
    for n in range(1, max_worlds + 1):
        for m in range(1, max_domain + 1):
            g = _Grounding(f, n, m, policy)
            if g.satisfiable():
                model = g.least_model()
                found = first_pointed(model, f)
                assert found is not None, "grounding and evaluator disagree"
                return found
    raise AssertionError("satisfiable at the maximal size but at no size")


class _Grounding:
    """CNF encoding of "some pointed model of size (n, m) satisfies f"."""

    def __init__(self, f: Formula, n: int, m: int, policy: DomainPolicy):
        self.f = f
        self.n, self.m = n, m
        self.policy = policy
        self.worlds = world_names(n)
        self.domain = element_names(m)
        self.signature = predicates(f)
        self.atoms = atom_table(self.worlds, self.domain, self.signature)
        self.nvars = 0
        self.rel = [self._new() for _ in range(n * n)]
        self.dlt = [self._new() for _ in range(n * m)]
        self.val = [self._new() for _ in self.atoms]
        self.atom_index = {a: i for i, a in enumerate(self.atoms)}
        self.clauses: list[list[int]] = []
        self._fv: dict[int, tuple[str, ...]] = {}
        self._memo: dict = {}
        self._frame_constraints()
        root = self._root()
        if root is False:
            self.clauses.append([-self.rel[0]])
            self.clauses.append([self.rel[0]])
        elif root is not True:
            self.clauses.append([root])
        self._solver = None

    def _new(self) -> int:
        self.nvars += 1
        return self.nvars

    def _R(self, i: int, j: int) -> int:
        return self.rel[i * self.n + j]

    def _D(self, i: int, j: int) -> int:
        return self.dlt[i * self.m + j]

    def _frame_constraints(self):
        n, m = self.n, self.m
        for i in range(n):
            self.clauses.append([self._D(i, j) for j in range(m)])
            if self.policy is DomainPolicy.CONSTANT:
                self.clauses.extend([self._D(i, j)] for j in range(m))
        if self.policy is DomainPolicy.INCREASING:
            for i in range(n):
                for k in range(n):
                    for j in range(m):
                        self.clauses.append([-self._R(i, k), -self._D(i, j), self._D(k, j)])

    # gates over literals; True/False stand for constants
    def _and(self, parts) -> int | bool:
        lits = []
        for p in parts:
            if p is False:
                return False
            if p is not True:
                lits.append(p)
        if not lits:
            return True
        if len(lits) == 1:
            return lits[0]
        g = self._new()
        for lit in lits:
            self.clauses.append([-g, lit])
        self.clauses.append([g] + [-lit for lit in lits])
        return g

    def _or(self, parts) -> int | bool:
        lits = []
        for p in parts:
            if p is True:
                return True
            if p is not False:
                lits.append(p)
        if not lits:
            return False
        if len(lits) == 1:
            return lits[0]
        g = self._new()
        for lit in lits:
            self.clauses.append([g, -lit])
        self.clauses.append([-g] + lits)
        return g

    @staticmethod
    def _neg(x):
        return (not x) if isinstance(x, bool) else -x

    def _root(self):
        fv = sorted(free_vars(self.f))
        options = []
        for i in range(self.n):
            for values in itertools.product(range(self.m), repeat=len(fv)):
                env = dict(zip(fv, values))
                inside = [self._D(i, j) for j in values]
                options.append(self._and(inside + [self._ground(self.f, i, env)]))
        return self._or(options)

    def _free(self, f: Formula) -> tuple[str, ...]:
        key = id(f)
        if key not in self._fv:
            self._fv[key] = tuple(sorted(free_vars(f)))
        return self._fv[key]

    def _ground(self, f: Formula, i: int, env: dict[str, int]):
        key = (id(f), i, tuple(env[x] for x in self._free(f)))
        if key in self._memo:
            return self._memo[key]
        out = self._ground_uncached(f, i, env)
        self._memo[key] = out
        return out

    def _ground_uncached(self, f: Formula, i: int, env: dict[str, int]):
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, (Atom, NegAtom)):
            t = tuple(self.domain[env[a]] for a in f.args)
            lit = self.val[self.atom_index[(self.worlds[i], f.pred, t)]]
            return lit if isinstance(f, Atom) else -lit
        if isinstance(f, Not):
            return self._neg(self._ground(f.body, i, env))
        if isinstance(f, And):
            return self._and([self._ground(f.left, i, env), self._ground(f.right, i, env)])
        if isinstance(f, Or):
            return self._or([self._ground(f.left, i, env), self._ground(f.right, i, env)])
        if isinstance(f, Bundle):
            k = f.kind
            choices = list(itertools.product(range(self.m), repeat=len(f.binders)))

            def quantify(at: int, body_at: int):
                parts = []
                for values in choices:
                    inside = [self._D(at, j) for j in values]
                    body = self._ground(f.body, body_at, {**env, **dict(zip(f.binders, values))})
                    if k.quantifier == "exists":
                        parts.append(self._and(inside + [body]))
                    else:
                        parts.append(self._or([-d for d in inside] + [body]))
                return self._or(parts) if k.quantifier == "exists" else self._and(parts)

            if k.quantifier_first:
                # the body sits at a successor; quantify at i, then look at each successor
                parts = []
                for values in choices:
                    inside = [self._D(i, j) for j in values]
                    inner_env = {**env, **dict(zip(f.binders, values))}
                    steps = []
                    for v in range(self.n):
                        body = self._ground(f.body, v, inner_env)
                        if k.modality == "dia":
                            steps.append(self._and([self._R(i, v), body]))
                        else:
                            steps.append(self._or([-self._R(i, v), body]))
                    step = self._or(steps) if k.modality == "dia" else self._and(steps)
                    if k.quantifier == "exists":
                        parts.append(self._and(inside + [step]))
                    else:
                        parts.append(self._or([-d for d in inside] + [step]))
                return self._or(parts) if k.quantifier == "exists" else self._and(parts)
            steps = []
            for v in range(self.n):
                q = quantify(v, v)
                if k.modality == "dia":
                    steps.append(self._and([self._R(i, v), q]))
                else:
                    steps.append(self._or([-self._R(i, v), q]))
            return self._or(steps) if k.modality == "dia" else self._and(steps)
        raise TypeError(f"not a formula: {f!r}")

    def solver(self) -> Solver:
        if self._solver is None:
            self._solver = Solver(name=SAT_BACKEND, bootstrap_with=self.clauses)
        return self._solver

    def satisfiable(self) -> bool:
        return self.solver().solve()

    def least_model(self) -> KripkeModel:
        """Greedily clear bits from the most significant end of each mask."""
        s = self.solver()
        assert s.solve()
        current = set(lit for lit in s.get_model() if lit > 0)
        fixed: list[int] = []
        order = list(reversed(self.rel)) + list(reversed(self.dlt)) + list(reversed(self.val))
        for var in order:
            if var not in current:
                fixed.append(-var)
            elif s.solve(assumptions=fixed + [-var]):
                current = set(lit for lit in s.get_model() if lit > 0)
                fixed.append(-var)
            else:
                fixed.append(var)
        rmask = sum(1 << b for b, v in enumerate(self.rel) if v in current)
        dmask = sum(1 << b for b, v in enumerate(self.dlt) if v in current)
        vmask = sum(1 << b for b, v in enumerate(self.val) if v in current)
        s.delete()
        self._solver = None
        frame = Frame(self.worlds, self.domain, rmask, dmask)
        return build_model(frame, self.atoms, vmask, self.policy)
