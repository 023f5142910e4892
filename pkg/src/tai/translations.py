"""Translations out of temporally accessed iteration.

``translate_to_pfp`` removes every temporal header in favour of (simultaneous)
partial fixed points.  ``translate_monotone_to_lfp`` handles iterations of
positive bodies and produces least fixed points plus two auxiliary relation
symbols per iteration, stage comparison and stage successor, that are
interpreted from the rank table (see :class:`AuxSignature`).

Reading of the PFP translation
------------------------------
A header is translated relative to an *initial* value of the iteration
predicates (empty at the top level).  ``X psi`` moves the initial value one
operator step forward by substitution.  ``F psi`` and ``psi1 U psi2``
accumulate, stage by stage, the tuples satisfying the operand(s); the
iteration is driven as a tortoise (one step per stage) and a hare (two steps
per stage).  The hare visits two positions per stage, and the
accumulators read both.  Once tortoise and hare agree again, every position of
the lasso has been visited and a ``done`` flag freezes the whole system.  That
fixpoint is what the partial fixed point reads.  Without the freeze a
non-converging iteration would make the partial fixed point empty (the
``direct`` reading, kept for comparison).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .engine import DEFAULT_MAX_STEPS, RankTable, rank_table, stage_leq, stage_next
from .fo_eval import Evaluator
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
    FormulaError,
    Iff,
    Implies,
    Iter,
    IterationSystem,
    Kind,
    NameSupply,
    Next,
    Not,
    Or,
    Polarity,
    PolarityError,
    Term,
    Until,
    Var,
    conj,
    desugar,
    disj,
    exists_many,
    false_formula,
    forall_many,
    free_predicates,
    free_variables,
    has_temporal,
    instantiate,
    ordered_free_variables,
    polarity,
    subst_pred,
    subst_vars,
    true_formula,
)
from .rewrites import expand
from .structure import FiniteStructure, Relation


class UnsupportedHeader(FormulaError):
    pass


Template = Callable[[tuple[Term, ...]], Formula]


@dataclass
class _Init:
    """Formula templates standing for the current value of each iteration predicate."""

    templates: dict[str, Template]
    free: frozenset[str]

    def apply(self, f: Formula, supply: NameSupply) -> Formula:
        for p, t in self.templates.items():
            f = subst_pred(f, p, t, supply, self.free)
        return f


def _atom_template(name: str) -> Template:
    return lambda args: Atom(name, tuple(args))


# -- temporal headers to partial fixed points --------------------------------


class _PfpTranslator:
    def __init__(self, supply: NameSupply, reading: str):
        self.supply = supply
        self.reading = reading

    def fresh(self, hint: str) -> str:
        return self.supply.fresh(hint)

    def formula(self, f: Formula) -> Formula:
        match f:
            case Iter():
                return self.iteration(f)
            case Derived(kind, system, args):
                # only pfp survives expansion; its bodies may still hold iterations
                defs = tuple(Definition(d.pred, d.vars, self.formula(d.body)) for d in system.defs)
                return Derived(kind, IterationSystem(defs), args)
            case Not(g):
                return Not(self.formula(g))
            case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b):
                return type(f)(self.formula(a), self.formula(b))
            case Exists(v, g) | Forall(v, g):
                return type(f)(v, self.formula(g))
            case Next() | Eventually() | Always() | Until():
                raise UnsupportedHeader("temporal operator outside an iteration header")
        return f

    def iteration(self, f: Iter) -> Formula:
        system = IterationSystem(
            tuple(Definition(d.pred, d.vars, self.formula(d.body)) for d in f.system.defs)
        )
        params = set()
        for d in system.defs:
            params |= free_variables(d.body) - set(d.vars)
        sigma = dict(zip(f.header_vars, f.args))
        empty = _Init({p: (lambda args: false_formula(self.fresh("e"))) for p in system.preds}, frozenset())
        ctx = (system, frozenset(params))
        return self.header(f.header, sigma, empty, ctx)

    def step(self, init: _Init, ctx) -> _Init:
        """Templates for the stage after ``init``: one operator application."""
        system, params = ctx
        templates = {}
        for d in system.defs:

            def t(args, d=d):
                body = instantiate(d.vars, d.body, args, self.supply)
                return init.apply(body, self.supply)

            templates[d.pred] = t
        return _Init(templates, init.free | params)

    def header(self, psi: Formula, sigma: Mapping[str, Term], init: _Init, ctx) -> Formula:
        if not has_temporal(psi):
            g = subst_vars(psi, dict(sigma), self.supply)
            g = init.apply(g, self.supply)
            return self.formula(g)
        match psi:
            case Not(g):
                return Not(self.header(g, sigma, init, ctx))
            case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b):
                return type(psi)(self.header(a, sigma, init, ctx), self.header(b, sigma, init, ctx))
            case Exists(v, g) | Forall(v, g):
                nv = self.fresh(v)
                return type(psi)(nv, self.header(g, {**sigma, v: Var(nv)}, init, ctx))
            case Always(g):
                return self.header(Not(Eventually(Not(g))), sigma, init, ctx)
            case Next(g):
                return self.header(g, sigma, self.step(init, ctx), ctx)
            case Eventually(g):
                if self.reading == "direct":
                    return self.eventually_direct(g, sigma, init, ctx)
                return self.accumulate(psi, sigma, init, ctx)
            case Until():
                if self.reading == "direct":
                    raise UnsupportedHeader("the direct reading covers F/G headers only")
                return self.accumulate(psi, sigma, init, ctx)
        raise UnsupportedHeader(f"unsupported header node {type(psi).__name__}")

    def accumulate(self, psi: Formula, sigma, init: _Init, ctx) -> Formula:
        system, params = ctx
        flag = lambda name: Atom(name, ())  # noqa: E731
        s1, s2, done = self.fresh("started"), self.fresh("running"), self.fresh("done")
        tort = {d.pred: self.fresh(f"T{d.pred}") for d in system.defs}
        hare = {d.pred: self.fresh(f"H{d.pred}") for d in system.defs}
        at_tort = _Init({p: _atom_template(n) for p, n in tort.items()}, frozenset())
        at_hare = _Init({p: _atom_template(n) for p, n in hare.items()}, frozenset())
        hare_next = self.step(at_hare, ctx)
        tort_step = self.step(at_tort, ctx)
        hare_step2 = self.step(hare_next, ctx)

        free = ordered_free_variables(psi)
        ws = tuple(self.fresh(v) for v in free)
        sigma_w = {v: Var(w) for v, w in zip(free, ws)}

        live = And(flag(s1), Not(flag(done)))
        defs: list[Definition] = []
        match psi:
            case Eventually(g):
                acc = self.fresh("Q")
                seen = Or(self.header(g, sigma_w, at_hare, ctx), self.header(g, sigma_w, hare_next, ctx))
                defs.append(Definition(acc, ws, Or(Atom(acc, tuple(map(Var, ws))), And(live, seen))))
            case Until(a, b):
                acc, failed = self.fresh("Q"), self.fresh("P")
                a0 = self.header(a, sigma_w, at_hare, ctx)
                a1 = self.header(a, sigma_w, hare_next, ctx)
                b0 = self.header(b, sigma_w, at_hare, ctx)
                b1 = self.header(b, sigma_w, hare_next, ctx)
                w = tuple(map(Var, ws))
                defs.append(
                    Definition(acc, ws, Or(Atom(acc, w), conj([live, Not(Atom(failed, w)), Or(b0, And(a0, b1))])))
                )
                defs.append(Definition(failed, ws, Or(Atom(failed, w), And(live, Or(Not(a0), Not(a1))))))

        for d in system.defs:
            xs = tuple(self.fresh(x) for x in d.vars)
            args = tuple(map(Var, xs))
            start = init.templates[d.pred](args)
            for own, nxt in ((tort[d.pred], tort_step), (hare[d.pred], hare_step2)):
                body = disj(
                    [
                        And(Not(flag(s1)), start),
                        conj([flag(s1), flag(done), Atom(own, args)]),
                        And(live, nxt.templates[d.pred](args)),
                    ]
                )
                defs.append(Definition(own, xs, body))
        agree = []
        for d in system.defs:
            vs = tuple(self.fresh("v") for _ in d.vars)
            agree.append(forall_many(vs, Iff(Atom(tort[d.pred], tuple(map(Var, vs))), Atom(hare[d.pred], tuple(map(Var, vs))))))
        defs.append(Definition(s1, (), true_formula(self.fresh("t"))))
        defs.append(Definition(s2, (), flag(s1)))
        defs.append(Definition(done, (), Or(flag(done), And(flag(s2), conj(agree)))))
        out_args = tuple(sigma[v] if v in sigma else Var(v) for v in free)
        return Derived(Kind.PFP, IterationSystem(tuple(defs)), out_args)

    def eventually_direct(self, g: Formula, sigma, init: _Init, ctx) -> Formula:
        """The accumulator system exactly as printed: no termination control."""
        system, _ = ctx
        if init.free or not all(_is_empty_template(t) for t in init.templates.values()):
            raise UnsupportedHeader("the direct reading is defined for top-level F headers only")
        free = ordered_free_variables(g)
        ws = tuple(self.fresh(v) for v in free)
        sigma_w = {v: Var(w) for v, w in zip(free, ws)}
        own = _Init({p: _atom_template(p) for p in system.preds}, frozenset())
        acc = self.fresh("Q")
        acc_body = Or(Atom(acc, tuple(map(Var, ws))), self.header(g, sigma_w, own, ctx))
        defs = (Definition(acc, ws, acc_body),) + system.defs
        return Derived(Kind.PFP, IterationSystem(defs), tuple(sigma.get(v, Var(v)) for v in free))


def _is_empty_template(t: Template) -> bool:
    probe = t(())
    return isinstance(probe, Exists) and isinstance(probe.body, Not) and isinstance(probe.body.operand, Equal)


def translate_to_pfp(tau: Formula, *, reading: str = "lasso") -> Formula:
    """Equivalent formula using only first-order connectives and ``pfp``.

    ``reading`` is ``"lasso"`` (default, exact on every instance) or
    ``"direct"``, the bare accumulator system, which is only exact when the
    iteration converges.
    """
    if reading not in ("lasso", "direct"):
        raise ValueError(f"unknown reading {reading!r}")
    supply = NameSupply.for_formula(tau)
    core = expand(tau, supply)
    return _PfpTranslator(supply, reading).formula(core)


# -- monotone iterations to FO+LFP with stage comparison --------------------


@dataclass(frozen=True)
class AuxEntry:
    pred: str
    system: IterationSystem
    leq: str
    next: str

    @property
    def arity(self) -> int:
        return self.system.defs[0].arity


@dataclass(frozen=True)
class AuxSignature:
    """Auxiliary stage-comparison symbols introduced by the LFP translation."""

    entries: tuple[AuxEntry, ...] = ()

    @property
    def symbols(self) -> dict[str, int]:
        out = {}
        for e in self.entries:
            out[e.leq] = 2 * e.arity
            out[e.next] = 2 * e.arity
        return out

    def rank_tables(self, s: FiniteStructure, *, first_stage_only: bool = False, max_steps=DEFAULT_MAX_STEPS):
        ev = Evaluator(s, max_steps)
        return {
            e.leq: rank_table(s, e.system, max_steps, first_stage_only=first_stage_only, evaluator=ev)
            for e in self.entries
        }

    def relations(self, s: FiniteStructure, *, first_stage_only: bool = False, max_steps=DEFAULT_MAX_STEPS) -> dict[str, Relation]:
        tables = self.rank_tables(s, first_stage_only=first_stage_only, max_steps=max_steps)
        out = {}
        for e in self.entries:
            rt = tables[e.leq]
            out[e.leq] = aux_relation(rt, stage_leq)
            out[e.next] = aux_relation(rt, stage_next)
        return out


def aux_relation(rt: RankTable, test: Callable[[RankTable, tuple, tuple], bool]) -> Relation:
    tuples = [a + b for a, b in itertools.product(rt.as_dict(), repeat=2) if test(rt, a, b)]
    return Relation(2 * rt.arity, frozenset(tuples))


class _LfpTranslator:
    def __init__(self, supply: NameSupply):
        self.supply = supply
        self.entries: list[AuxEntry] = []

    def aux_name(self, base: str) -> str:
        name = f"__{base}"
        if name in self.supply.used:
            return self.supply.fresh(base)
        self.supply.used.add(name)
        return name

    def formula(self, f: Formula, bound_preds: frozenset[str] = frozenset()) -> Formula:
        match f:
            case Iter():
                return self.iteration(f, bound_preds)
            case Derived(kind, system, args):
                if kind is not Kind.LFP:
                    return self.formula(expand(f, self.supply), bound_preds)
                inner = bound_preds | set(system.preds)
                defs = tuple(Definition(d.pred, d.vars, self.formula(d.body, inner)) for d in system.defs)
                return Derived(kind, IterationSystem(defs), args)
            case Not(g):
                return Not(self.formula(g, bound_preds))
            case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b):
                return type(f)(self.formula(a, bound_preds), self.formula(b, bound_preds))
            case Exists(v, g) | Forall(v, g):
                return type(f)(v, self.formula(g, bound_preds))
            case Next() | Eventually() | Always() | Until():
                raise UnsupportedHeader("temporal operator outside an iteration header")
        return f

    def iteration(self, f: Iter, bound_preds: frozenset[str]) -> Formula:
        system = f.system
        if len(system.defs) != 1:
            raise UnsupportedHeader("the stage-comparison translation needs a single definition")
        d = system.defs[0]
        if polarity(d.body, d.pred) not in (Polarity.POSITIVE, Polarity.ABSENT):
            raise PolarityError(f"body of {d.pred} is {polarity(d.body, d.pred).value} in {d.pred}, not positive")
        if free_variables(d.body) - set(d.vars):
            raise UnsupportedHeader("iteration bodies with parameters have no global rank table")
        if (free_predicates(d.body) - {d.pred}) & bound_preds:
            raise UnsupportedHeader("iteration bodies reading enclosing predicate variables have no global rank table")
        body = self.formula(d.body, bound_preds | {d.pred})
        leq = self.aux_name(f"leq_{d.pred}")
        nxt = self.aux_name(f"next_{d.pred}")
        self.entries.append(AuxEntry(d.pred, system, leq, nxt))
        ctx = _StageContext(self, d.pred, d.vars, body, leq, nxt)
        header = subst_vars(f.header, dict(zip(f.header_vars, f.args)), self.supply)
        return ctx.translate(desugar(header), None)


class _StageContext:
    """Header translation indexed by the start stage (``None``) or a stage witness tuple."""

    def __init__(self, tr: _LfpTranslator, pred, xs, body, leq, nxt):
        self.tr = tr
        self.supply = tr.supply
        self.pred, self.xs, self.body = pred, xs, body
        self.leq, self.nxt = leq, nxt

    def witnesses(self) -> tuple[str, ...]:
        return tuple(self.supply.fresh("u") for _ in self.xs)

    def lfp(self, args: Sequence[Term]) -> Formula:
        return Derived.single(Kind.LFP, self.pred, self.xs, self.body, tuple(args))

    def first_stage(self, args: Sequence[Term]) -> Formula:
        """``args`` belongs to the first stage: the body with the predicate empty."""
        body = subst_pred(self.body, self.pred, lambda _: false_formula(self.supply.fresh("e")), self.supply)
        return instantiate(self.xs, body, args, self.supply)

    def leq_atom(self, a: Sequence[Term], b: Sequence[Term]) -> Formula:
        return Atom(self.leq, tuple(a) + tuple(b))

    def lt(self, a, b) -> Formula:
        return And(self.leq_atom(a, b), Not(self.leq_atom(b, a)))

    def translate(self, f: Formula, idx: tuple[str, ...] | None) -> Formula:
        u = tuple(map(Var, idx)) if idx is not None else None
        match f:
            case Atom(p, args) if p == self.pred:
                if u is None:
                    return false_formula(self.supply.fresh("e"))
                return And(self.leq_atom(args, u), self.lfp(args))
            case Atom() | Equal():
                return f
            case Iter() | Derived():
                if self.pred in free_predicates(f):
                    raise UnsupportedHeader("nested construct in a header reads the iteration predicate")
                return self.tr.formula(f)
            case Not(g):
                return Not(self.translate(g, idx))
            case And(a, b):
                return And(self.translate(a, idx), self.translate(b, idx))
            case Forall(v, g):
                return Forall(v, self.translate(g, idx))
            case Next(g):
                w = self.witnesses()
                wt = tuple(map(Var, w))
                if u is None:
                    w2 = self.witnesses()
                    progress = exists_many(w, And(self.first_stage(wt), self.translate(g, w)))
                    # empty first stage: the sequence never leaves the start stage
                    stuck = And(Not(exists_many(w2, self.first_stage(tuple(map(Var, w2))))), self.translate(g, None))
                    return Or(progress, stuck)
                return exists_many(w, And(Atom(self.nxt, u + wt), self.translate(g, w)))
            case Eventually(g):
                w = self.witnesses()
                wt = tuple(map(Var, w))
                if u is None:
                    return Or(self.translate(g, None), exists_many(w, And(self.lfp(wt), self.translate(g, w))))
                return exists_many(w, And(self.leq_atom(u, wt), self.translate(g, w)))
            case Until(a, b):
                w, w2 = self.witnesses(), self.witnesses()
                wt, w2t = tuple(map(Var, w)), tuple(map(Var, w2))
                if u is None:
                    later = exists_many(
                        w,
                        conj([
                            self.lfp(wt),
                            self.translate(b, w),
                            forall_many(w2, Implies(self.lt(w2t, wt), self.translate(a, w2))),
                        ]),
                    )
                    return Or(self.translate(b, None), And(self.translate(a, None), later))
                return exists_many(
                    w,
                    conj([
                        self.leq_atom(u, wt),
                        self.translate(b, w),
                        forall_many(w2, Implies(And(self.leq_atom(u, w2t), self.lt(w2t, wt)), self.translate(a, w2))),
                    ]),
                )
        raise UnsupportedHeader(f"no stage-comparison rule for {type(f).__name__}")


def translate_monotone_to_lfp(tau: Formula) -> tuple[Formula, AuxSignature]:
    """FO+LFP formula over the base signature plus stage-comparison symbols."""
    supply = NameSupply.for_formula(tau)
    tr = _LfpTranslator(supply)
    out = tr.formula(tau)
    return out, AuxSignature(tuple(tr.entries))


def augment(s: FiniteStructure, aux: AuxSignature, **kw) -> FiniteStructure:
    """Structure extended with the interpretations of the auxiliary symbols."""
    return s.with_relations(aux.relations(s, **kw))


def eval_with_aux(
    s: FiniteStructure,
    f: Formula,
    aux: AuxSignature,
    vars: Sequence[str] = (),
    *,
    first_stage_only: bool = False,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Relation:
    aug = augment(s, aux, first_stage_only=first_stage_only, max_steps=max_steps)
    missing = set(aux.symbols) - set(aug.relations)
    if missing:
        raise FormulaError(f"missing interpretation for {sorted(missing)}")
    return Evaluator(aug, max_steps).sat_set(f, {}, list(vars))
