"""Seeded random structures, bodies and headers for property suites and fuzzing.

Every generator takes a ``random.Random`` so a seed fixes the whole instance.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .formula import (
    Always,
    And,
    Atom,
    Definition,
    Derived,
    Equal,
    Eventually,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Iter,
    IterationSystem,
    Kind,
    Next,
    Not,
    Or,
    Until,
    Var,
    ordered_free_variables,
)
from .structure import FiniteStructure, Relation

BASE_RELATIONS = {"E": 2, "A": 1}


def random_structure(
    rng: random.Random, max_domain: int = 4, *, min_domain: int = 1, density: float | None = None,
    relations: dict[str, int] | None = None, constants: tuple[str, ...] = (),
) -> FiniteStructure:
    n = rng.randint(min_domain, max_domain)
    rels = {}
    for name, k in sorted((relations or BASE_RELATIONS).items()):
        p = rng.uniform(0.2, 0.6) if density is None else density
        rels[name] = Relation(k, frozenset(t for t in itertools.product(range(n), repeat=k) if rng.random() < p))
    consts = {c: rng.randrange(n) for c in constants}
    return FiniteStructure.build(n, rels, consts)


def path_structure(n: int) -> FiniteStructure:
    return FiniteStructure.build(n, {"E": Relation(2, frozenset((i, i + 1) for i in range(n - 1)))})


def random_digraph(rng: random.Random, max_domain: int = 5) -> FiniteStructure:
    return random_structure(rng, max_domain, relations={"E": 2})


def bound_vars(k: int) -> tuple[str, ...]:
    return ("x", "y")[:k] if k <= 2 else tuple(f"x{i}" for i in range(1, k + 1))


# -- bodies ------------------------------------------------------------------


class _Bodies:
    """Formulas over ``E/2``, ``A/1``, equality and the predicate variable.

    ``mode`` fixes the sign of predicate-variable occurrences: ``positive``,
    ``negative`` or ``any``.  The formula is built in negation normal form,
    so the sign of an occurrence is its literal sign.
    """

    def __init__(self, rng: random.Random, preds: dict[str, int], mode: str, relations=None):
        self.rng = rng
        self.preds = preds
        self.mode = mode
        self.relations = relations or BASE_RELATIONS
        self.counter = itertools.count()

    def term_vars(self, scope: list[str], k: int) -> tuple[Var, ...]:
        return tuple(Var(self.rng.choice(scope)) for _ in range(k))

    def literal(self, scope: list[str]) -> Formula:
        rng = self.rng
        if self.preds and rng.random() < 0.45:
            p = rng.choice(sorted(self.preds))
            a = Atom(p, self.term_vars(scope, self.preds[p]))
            negate = {"positive": False, "negative": True}.get(self.mode, rng.random() < 0.5)
            return Not(a) if negate else a
        if rng.random() < 0.2:
            f: Formula = Equal(*self.term_vars(scope, 2))
        else:
            name = rng.choice(sorted(self.relations))
            f = Atom(name, self.term_vars(scope, self.relations[name]))
        return Not(f) if rng.random() < 0.4 else f

    def body(self, scope: list[str], depth: int) -> Formula:
        # half the bodies get a predicate-free disjunct so iterations leave the empty stage
        if self.rng.random() < 0.5:
            seed = _Bodies(self.rng, {}, self.mode, self.relations).formula(scope, depth - 1)
            return Or(seed, self.formula(scope, depth - 1))
        return self.formula(scope, depth)

    def formula(self, scope: list[str], depth: int) -> Formula:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.25:
            return self.literal(scope)
        r = rng.random()
        if r < 0.35:
            return And(self.formula(scope, depth - 1), self.formula(scope, depth - 1))
        if r < 0.7:
            return Or(self.formula(scope, depth - 1), self.formula(scope, depth - 1))
        v = f"w{next(self.counter)}"
        q = Exists if rng.random() < 0.6 else Forall
        return q(v, self.formula(scope + [v], depth - 1))


def random_body(
    rng: random.Random, pred: str = "R", arity: int = 1, mode: str = "any", depth: int = 3,
    *, relations: dict[str, int] | None = None,
) -> tuple[tuple[str, ...], Formula]:
    xs = bound_vars(arity)
    return xs, _Bodies(rng, {pred: arity}, mode, relations).body(list(xs), depth)


def random_system(rng: random.Random, mode: str = "any", max_arity: int = 2, depth: int = 3, preds=("R",)):
    arities = {p: rng.randint(1, max_arity) for p in preds}
    defs = []
    for p in preds:
        xs = bound_vars(arities[p])
        defs.append(Definition(p, xs, _Bodies(rng, arities, mode).body(list(xs), depth)))
    return IterationSystem(tuple(defs))


def random_derived(rng: random.Random, kind: Kind, mode: str, max_arity: int = 2, depth: int = 3) -> tuple[Derived, tuple[str, ...]]:
    """A derived construct applied to fresh query variables, plus those variables."""
    k = rng.randint(1, max_arity)
    xs, body = random_body(rng, "R", k, mode, depth)
    qs = tuple(f"q{i}" for i in range(1, k + 1))
    return Derived.single(kind, "R", xs, body, tuple(Var(q) for q in qs)), qs


# -- headers -----------------------------------------------------------------

PFP_FRAGMENT = ("not", "and", "or", "exists", "forall", "F", "G")
FULL_FRAGMENT = PFP_FRAGMENT + ("X", "U")
MONOTONE_FRAGMENT = ("not", "and", "or", "exists", "forall", "X", "F", "G", "U")


class _Headers:
    def __init__(self, rng: random.Random, preds: dict[str, int], ops, relations):
        self.rng = rng
        self.preds = preds
        self.ops = ops
        self.relations = relations
        self.counter = itertools.count()

    def atom(self, scope: list[str]) -> Formula:
        rng = self.rng
        if rng.random() < 0.7:
            p = rng.choice(sorted(self.preds))
            return Atom(p, tuple(Var(rng.choice(scope)) for _ in range(self.preds[p])))
        if rng.random() < 0.3:
            return Equal(Var(rng.choice(scope)), Var(rng.choice(scope)))
        name = rng.choice(sorted(self.relations))
        return Atom(name, tuple(Var(rng.choice(scope)) for _ in range(self.relations[name])))

    def formula(self, scope: list[str], depth: int, temporal: int) -> Formula:
        rng = self.rng
        temporal_ops = [o for o in self.ops if o in ("X", "F", "G", "U")]
        if depth <= 0 or rng.random() < 0.2:
            return self.atom(scope)
        if temporal > 0 and temporal_ops and rng.random() < 0.5:
            op = rng.choice(temporal_ops)
        else:
            op = rng.choice([o for o in self.ops if o not in temporal_ops])
        rec = lambda s=scope, t=temporal: self.formula(s, depth - 1, t)  # noqa: E731
        match op:
            case "not":
                return Not(rec())
            case "and":
                return And(rec(), rec())
            case "or":
                return Or(rec(), rec())
            case "exists" | "forall":
                v = f"h{next(self.counter)}"
                body = self.formula(scope + [v], depth - 1, temporal)
                return (Exists if op == "exists" else Forall)(v, body)
            case "X":
                return Next(rec(t=temporal - 1))
            case "F":
                return Eventually(rec(t=temporal - 1))
            case "G":
                return Always(rec(t=temporal - 1))
            case "U":
                return Until(rec(t=temporal - 1), rec(t=temporal - 1))
        raise AssertionError(op)


def random_header(
    rng: random.Random, preds: dict[str, int], ops=FULL_FRAGMENT, *, depth: int = 3, temporal: int = 2,
    header_vars: int = 2, relations: dict[str, int] | None = None,
) -> Formula:
    """Closed-over-``z`` header: free variables drawn from ``z1 .. z<header_vars>``."""
    scope = [f"z{i}" for i in range(1, header_vars + 1)]
    gen = _Headers(rng, preds, ops, relations or BASE_RELATIONS)
    return gen.formula(scope, depth, temporal)


def random_iteration(
    rng: random.Random, *, body_mode: str = "any", ops=FULL_FRAGMENT, max_arity: int = 2,
    body_depth: int = 3, header_depth: int = 3, temporal: int = 2, preds=("R",),
) -> tuple[Iter, tuple[str, ...]]:
    """An iteration applied to its own header variables, returned with that variable list."""
    system = random_system(rng, body_mode, max_arity, body_depth, preds)
    arities = {d.pred: d.arity for d in system.defs}
    header = random_header(rng, arities, ops, depth=header_depth, temporal=temporal)
    hv = tuple(ordered_free_variables(header))
    return Iter(header, system, tuple(Var(v) for v in hv)), hv


# -- arbitrary formulas for printer round trips --------------------------------


@dataclass
class FormulaGen:
    """Grammar-driven formulas covering every construct, for parse/print checks."""

    rng: random.Random
    depth: int = 4

    def __post_init__(self):
        self.counter = itertools.count()

    def formula(self, scope: list[str], depth: int, preds: dict[str, int], temporal: bool = False) -> Formula:
        rng = self.rng
        scope = scope or ["a"]
        if depth <= 0:
            return self.atom(scope, preds)
        choices = ["atom", "not", "and", "or", "implies", "iff", "exists", "forall", "iter", "derived"]
        if temporal:
            choices += ["X", "F", "G", "U", "U"]
        op = rng.choice(choices)
        rec = lambda s=scope: self.formula(s, depth - 1, preds, temporal)  # noqa: E731
        match op:
            case "atom":
                return self.atom(scope, preds)
            case "not":
                return Not(rec())
            case "and" | "or" | "implies" | "iff" | "U":
                cls = {"and": And, "or": Or, "implies": Implies, "iff": Iff, "U": Until}[op]
                return cls(rec(), rec())
            case "exists" | "forall":
                v = rng.choice(["a", "b", "c", f"v{next(self.counter)}"])
                return (Exists if op == "exists" else Forall)(v, rec(scope + [v]))
            case "X" | "F" | "G":
                return {"X": Next, "F": Eventually, "G": Always}[op](rec())
            case "iter":
                return self.iteration(scope, depth, preds)
            case "derived":
                kind = rng.choice(list(Kind))
                k = rng.randint(0, 2) if kind not in (Kind.OPMU, Kind.OPNU, Kind.ID) else rng.randint(1, 2)
                p = f"P{next(self.counter)}"
                xs = tuple(f"x{i}" for i in range(k))
                body = self.formula(list(xs) + scope, depth - 1, {**preds, p: k})
                return Derived.single(kind, p, xs, body, tuple(Var(rng.choice(scope)) for _ in range(k)))
        raise AssertionError(op)

    def atom(self, scope, preds) -> Formula:
        rng = self.rng
        if rng.random() < 0.15:
            return Equal(Var(rng.choice(scope)), Var(rng.choice(scope)))
        name = rng.choice(sorted(preds))
        return Atom(name, tuple(Var(rng.choice(scope)) for _ in range(preds[name])))

    def iteration(self, scope, depth, preds) -> Formula:
        rng = self.rng
        n = rng.randint(1, 2)
        local = {f"S{next(self.counter)}": rng.randint(0, 2) for _ in range(n)}
        defs = []
        for p, k in local.items():
            xs = tuple(f"x{i}" for i in range(k))
            defs.append(Definition(p, xs, self.formula(list(xs) + scope, depth - 1, {**preds, **local})))
        hscope = ["z1", "z2"]
        header = self.formula(hscope, depth - 1, {**local, **{k: v for k, v in BASE_RELATIONS.items()}}, temporal=True)
        hv = ordered_free_variables(header)
        return Iter(header, IterationSystem(tuple(defs)), tuple(Var(rng.choice(scope)) for _ in hv))


def random_formula(rng: random.Random, depth: int = 4) -> Formula:
    return FormulaGen(rng, depth).formula(["a", "b"], depth, dict(BASE_RELATIONS))
