"""First-order temporal evaluation over a lasso of stages.

Every subformula is evaluated to a table mapping assignments of its free
variables (sorted by name) to a truth vector over the stored positions.
``F``, ``G`` and ``U`` are solved as fixpoints of their one-step unfoldings
around the lasso, which is exact for an ultimately periodic sequence.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

from .engine import Lasso
from .formula import (
    Always,
    And,
    Eventually,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Until,
    free_variables,
    has_temporal,
)
from .structure import FiniteStructure, Relation

Table = tuple[tuple[str, ...], dict[tuple[int, ...], tuple[bool, ...]]]


class _LassoEvaluator:
    def __init__(self, s, lasso: Lasso, env, evaluator):
        from .fo_eval import Evaluator

        self.ev = evaluator or Evaluator(s)
        self.domain = range(s.domain_size)
        self.n = len(lasso)
        self.succ = [lasso.successor(i) for i in range(self.n)]
        base = dict(env or {})
        self.envs = [{**base, **lasso.env_at(i)} for i in range(self.n)]
        self.memo: dict[Formula, Table] = {}

    def assignments(self, vars):
        return itertools.product(self.domain, repeat=len(vars))

    def lookup(self, table: Table, a: Mapping[str, int]) -> tuple[bool, ...]:
        vars, rows = table
        return rows[tuple(a[v] for v in vars)]

    def fixpoint(self, step, init: bool) -> tuple[bool, ...]:
        x = [init] * self.n
        while True:
            new = [step(i, x) for i in range(self.n)]
            if new == x:
                return tuple(x)
            x = new

    def table(self, f: Formula) -> Table:
        if f in self.memo:
            return self.memo[f]
        vars = tuple(sorted(free_variables(f)))
        rows: dict[tuple[int, ...], tuple[bool, ...]] = {}
        if not has_temporal(f):
            for t in self.assignments(vars):
                a = dict(zip(vars, t))
                rows[t] = tuple(self.ev.holds(f, self.envs[i], a) for i in range(self.n))
            self.memo[f] = (vars, rows)
            return vars, rows

        match f:
            case Not(g):
                tg = self.table(g)
                for t in self.assignments(vars):
                    rows[t] = tuple(not b for b in self.lookup(tg, dict(zip(vars, t))))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                op = {
                    And: lambda x, y: x and y,
                    Or: lambda x, y: x or y,
                    Implies: lambda x, y: (not x) or y,
                    Iff: lambda x, y: x == y,
                }[type(f)]
                tl, tr = self.table(l), self.table(r)
                for t in self.assignments(vars):
                    a = dict(zip(vars, t))
                    rows[t] = tuple(op(x, y) for x, y in zip(self.lookup(tl, a), self.lookup(tr, a)))
            case Exists(v, g) | Forall(v, g):
                tg = self.table(g)
                combine = any if isinstance(f, Exists) else all
                for t in self.assignments(vars):
                    a = dict(zip(vars, t))
                    vecs = [self.lookup(tg, {**a, v: d}) for d in self.domain]
                    rows[t] = tuple(combine(vec[i] for vec in vecs) for i in range(self.n))
            case Next(g):
                tg = self.table(g)
                for t in self.assignments(vars):
                    vec = self.lookup(tg, dict(zip(vars, t)))
                    rows[t] = tuple(vec[self.succ[i]] for i in range(self.n))
            case Eventually(g):
                tg = self.table(g)
                for t in self.assignments(vars):
                    c = self.lookup(tg, dict(zip(vars, t)))
                    rows[t] = self.fixpoint(lambda i, x: c[i] or x[self.succ[i]], False)
            case Always(g):
                tg = self.table(g)
                for t in self.assignments(vars):
                    c = self.lookup(tg, dict(zip(vars, t)))
                    rows[t] = self.fixpoint(lambda i, x: c[i] and x[self.succ[i]], True)
            case Until(l, r):
                tl, tr = self.table(l), self.table(r)
                for t in self.assignments(vars):
                    a = dict(zip(vars, t))
                    cl, cr = self.lookup(tl, a), self.lookup(tr, a)
                    rows[t] = self.fixpoint(lambda i, x: cr[i] or (cl[i] and x[self.succ[i]]), False)
            case _:
                raise TypeError(f"unexpected temporal node {type(f).__name__}")
        self.memo[f] = (vars, rows)
        return vars, rows


def position_sat(
    s: FiniteStructure, lasso: Lasso, psi: Formula, *, env=None, evaluator=None
) -> Table:
    """Per-position satisfaction table of ``psi`` over the lasso."""
    return _LassoEvaluator(s, lasso, env, evaluator).table(psi)


def eval_lasso(
    s: FiniteStructure,
    lasso: Lasso,
    psi: Formula,
    vars: Sequence[str],
    *,
    env: Mapping[str, Relation] | None = None,
    evaluator=None,
    position: int = 0,
) -> Relation:
    """Relation ``{a : position 0 satisfies psi under vars -> a}``."""
    table_vars, rows = position_sat(s, lasso, psi, env=env, evaluator=evaluator)
    vars = list(vars)
    missing = set(table_vars) - set(vars)
    if missing:
        raise ValueError(f"free variables {sorted(missing)} of the header are not listed")
    out = []
    for t in itertools.product(range(s.domain_size), repeat=len(vars)):
        a = dict(zip(vars, t))
        if rows[tuple(a[v] for v in table_vars)][position]:
            out.append(t)
    return Relation(len(vars), frozenset(out))
