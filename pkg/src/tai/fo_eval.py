"""Tarskian evaluation of non-temporal formulas and one-step operator application."""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

from .engine import DEFAULT_MAX_STEPS, iterate
from .formula import (
    And,
    Atom,
    Derived,
    Equal,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Iff,
    Implies,
    Iter,
    IterationSystem,
    Not,
    Or,
    Term,
    Var,
    free_predicates,
    free_variables,
)
from .structure import Assignment, FiniteStructure, Relation

PredEnv = Mapping[str, Relation]


class EvaluationError(FormulaError):
    pass


class Evaluator:
    """Evaluates formulas over one structure, memoising nested iterations.

    A nested ``Iter`` is evaluated by computing its lasso with the current
    predicate environment frozen as ambient rigid relations, then reading the
    header off the lasso.  Results are cached per (construct, relevant
    environment, parameter values).
    """

    def __init__(self, structure: FiniteStructure, max_steps: int = DEFAULT_MAX_STEPS):
        self.s = structure
        self.max_steps = max_steps
        self.domain = range(structure.domain_size)
        self._iter_cache: dict = {}
        self._expanded: dict = {}

    # terms and atoms
    def term(self, t: Term, a: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            try:
                return a[t.name]
            except KeyError:
                raise EvaluationError(f"unbound variable {t.name}") from None
        try:
            return self.s.constants[t.name]
        except KeyError:
            raise EvaluationError(f"unknown constant {t.name}") from None

    def relation(self, name: str, env: PredEnv) -> Relation:
        if name in env:
            return env[name]
        try:
            return self.s.relations[name]
        except KeyError:
            raise EvaluationError(f"unbound predicate variable {name}") from None

    def holds(self, f: Formula, env: PredEnv, a: Mapping[str, int]) -> bool:
        match f:
            case Atom(p, args):
                r = self.relation(p, env)
                if r.arity != len(args):
                    raise EvaluationError(f"arity mismatch: {p} has arity {r.arity}, used with {len(args)}")
                return tuple(self.term(t, a) for t in args) in r.tuples
            case Equal(l, r):
                return self.term(l, a) == self.term(r, a)
            case Not(g):
                return not self.holds(g, env, a)
            case And(l, r):
                return self.holds(l, env, a) and self.holds(r, env, a)
            case Or(l, r):
                return self.holds(l, env, a) or self.holds(r, env, a)
            case Implies(l, r):
                return (not self.holds(l, env, a)) or self.holds(r, env, a)
            case Iff(l, r):
                return self.holds(l, env, a) == self.holds(r, env, a)
            case Exists(v, g):
                b = dict(a)
                for d in self.domain:
                    b[v] = d
                    if self.holds(g, env, b):
                        return True
                return False
            case Forall(v, g):
                b = dict(a)
                for d in self.domain:
                    b[v] = d
                    if not self.holds(g, env, b):
                        return False
                return True
            case Iter(_, _, args):
                value = self.iter_value(f, env, a)
                return tuple(self.term(t, a) for t in args) in value.tuples
            case Derived():
                return self.holds(self.expand(f), env, a)
        raise EvaluationError(f"temporal operator outside iteration header: {type(f).__name__}")

    def sat_set(
        self, f: Formula, env: PredEnv, vars: Sequence[str], a: Mapping[str, int] | None = None
    ) -> Relation:
        b = dict(a or {})
        out = []
        for t in itertools.product(self.domain, repeat=len(vars)):
            b.update(zip(vars, t))
            if self.holds(f, env, b):
                out.append(t)
        return Relation(len(vars), frozenset(out))

    def apply_operator(
        self,
        system: IterationSystem,
        current: Sequence[Relation] | Mapping[str, Relation],
        env: PredEnv | None = None,
        a: Mapping[str, int] | None = None,
    ) -> tuple[Relation, ...]:
        """Synchronous step: every body reads the previous stage."""
        if isinstance(current, Mapping):
            current = tuple(current[p] for p in system.preds)
        if len(current) != len(system.defs):
            raise EvaluationError("one relation per definition is required")
        stage_env = dict(env or {})
        for d, r in zip(system.defs, current):
            if r.arity != d.arity:
                raise EvaluationError(f"arity mismatch for {d.pred}: {r.arity} vs {d.arity}")
            stage_env[d.pred] = r
        return tuple(self.sat_set(d.body, stage_env, d.vars, a) for d in system.defs)

    # nested constructs
    def expand(self, f: Derived) -> Formula:
        try:
            return self._expanded[f]
        except KeyError:
            from .rewrites import expand

            g = expand(f)
            self._expanded[f] = g
            return g

    def iter_value(self, f: Iter, env: PredEnv, a: Mapping[str, int]) -> Relation:
        """Relation defined by the header of ``f`` at stage 0."""
        from .temporal import eval_lasso

        params = sorted(_body_params(f.system))
        preds = sorted(p for p in free_predicates(f) if p in env)
        try:
            key = (f, tuple((p, env[p]) for p in preds), tuple((v, a[v]) for v in params))
        except KeyError as e:
            raise EvaluationError(f"unbound variable {e.args[0]}") from None
        if key in self._iter_cache:
            return self._iter_cache[key]
        ambient = {p: env[p] for p in preds}
        pa = {v: a[v] for v in params}
        lasso = iterate(self.s, f.system, self.max_steps, env=ambient, assignment=pa, evaluator=self)
        value = eval_lasso(self.s, lasso, f.header, f.header_vars, env=ambient, evaluator=self)
        self._iter_cache[key] = value
        return value


def _body_params(system: IterationSystem) -> set[str]:
    out: set[str] = set()
    for d in system.defs:
        out |= free_variables(d.body) - set(d.vars)
    return out


def _as_dict(a) -> dict[str, int]:
    if a is None:
        return {}
    if isinstance(a, Assignment):
        return a.as_dict()
    return dict(a)


def eval_fo(
    s: FiniteStructure, env: PredEnv | None, f: Formula, a: Assignment | Mapping[str, int] | None = None
) -> bool:
    return Evaluator(s).holds(f, dict(env or {}), _as_dict(a))


def sat_set(
    s: FiniteStructure,
    env: PredEnv | None,
    f: Formula,
    vars: Sequence[str],
    a: Assignment | Mapping[str, int] | None = None,
) -> Relation:
    return Evaluator(s).sat_set(f, dict(env or {}), list(vars), _as_dict(a))


def apply_operator(
    s: FiniteStructure,
    system: IterationSystem,
    current: Sequence[Relation] | Mapping[str, Relation],
    env: PredEnv | None = None,
    a: Assignment | Mapping[str, int] | None = None,
) -> tuple[Relation, ...]:
    return Evaluator(s).apply_operator(system, current, env, _as_dict(a))
