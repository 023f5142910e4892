"""Seeded property suites comparing encodings, translations and lasso evaluation with references."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from . import oracles
from .engine import DEFAULT_MAX_STEPS, iterate
from .fo_eval import Evaluator
from .formula import (
    Always,
    And,
    Definition,
    Derived,
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
from .generators import (
    FULL_FRAGMENT,
    MONOTONE_FRAGMENT,
    PFP_FRAGMENT,
    random_body,
    random_header,
    random_iteration,
    random_structure,
    random_system,
)
from .rewrites import expand
from .structure import FiniteStructure, Relation, print_structure
from .syntax import print_formula
from .temporal import eval_lasso
from .translations import eval_with_aux, translate_monotone_to_lfp, translate_to_pfp


@dataclass(frozen=True)
class Check:
    label: str
    structure: FiniteStructure
    query: Formula
    vars: tuple[str, ...]
    expected: object
    got: object

    @property
    def ok(self) -> bool:
        return self.expected == self.got

    def render(self) -> str:
        def show(v):
            return " ".join(f"({','.join(map(str, t))})" for t in v.sorted()) if isinstance(v, Relation) else str(v)

        return "\n".join([
            f"# {self.label}",
            print_structure(self.structure).rstrip("\n"),
            f"# vars: {','.join(self.vars)}",
            f"# query: {print_formula(self.query)}",
            f"# expected: {show(self.expected)}",
            f"# got: {show(self.got)}",
        ])


@dataclass
class LawReport:
    law: str
    total: int = 0
    passed: int = 0
    counterexample: Check | None = None
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def summary(self) -> str:
        return f"{self.law}: {self.passed}/{self.total} pass"


def swap_fg(f: Formula) -> Formula:
    """Mutant: every F becomes G and vice versa, inside iteration headers too."""
    match f:
        case Eventually(g):
            return Always(swap_fg(g))
        case Always(g):
            return Eventually(swap_fg(g))
        case Iter(h, system, args):
            defs = tuple(Definition(d.pred, d.vars, swap_fg(d.body)) for d in system.defs)
            return Iter(swap_fg(h), IterationSystem(defs), args)
        case Derived():
            return swap_fg(expand(f))
        case Not(g) | Next(g):
            return type(f)(swap_fg(g))
        case Exists(v, g) | Forall(v, g):
            return type(f)(v, swap_fg(g))
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return type(f)(swap_fg(a), swap_fg(b))
    return f


@dataclass
class Ctx:
    rng: random.Random
    max_domain: int
    mutate: bool
    max_steps: int

    def structure(self, cap: int | None = None) -> FiniteStructure:
        return random_structure(self.rng, min(self.max_domain, cap or self.max_domain))

    def encoded(self, f: Formula) -> Formula:
        return swap_fg(f) if self.mutate else f

    def sat(self, s: FiniteStructure, f: Formula, vars) -> Relation:
        return Evaluator(s, self.max_steps).sat_set(f, {}, list(vars))


def _derived_checks(ctx: Ctx, mode: str, cases: dict[Kind, Callable[[oracles.Operator], frozenset]], cap=None):
    s = ctx.structure(cap)
    k = ctx.rng.randint(1, 2)
    xs, body = random_body(ctx.rng, "R", k, mode)
    qs = tuple(f"q{i}" for i in range(1, k + 1))
    op = oracles.Operator(s, Definition("R", xs, body))
    out = []
    for kind, oracle in cases.items():
        f = Derived.single(kind, "R", xs, body, tuple(Var(q) for q in qs))
        got = ctx.sat(s, ctx.encoded(f), qs)
        out.append(Check(kind.value, s, f, qs, Relation(k, oracle(op)), got))
    return out


def law_lfp_direct(ctx: Ctx):
    return _derived_checks(ctx, "positive", {Kind.LFP: oracles.knaster_tarski})


def law_ifp_direct(ctx: Ctx):
    return _derived_checks(ctx, "any", {Kind.IFP: oracles.inflationary})


def law_pfp_direct(ctx: Ctx):
    return _derived_checks(
        ctx, "any",
        {Kind.PFP: oracles.partial, Kind.PFPCUP: oracles.stage_union, Kind.PFPCAP: lambda op: frozenset()},
    )


def law_pfpgen_loop(ctx: Ctx):
    return _derived_checks(ctx, "any", {Kind.PFPGEN: oracles.loop_intersection, Kind.RFP: oracles.loop_union})


def law_osc_squared(ctx: Ctx):
    checks = _derived_checks(ctx, "negative", {Kind.OPMU: oracles.squared_least, Kind.OPNU: oracles.squared_greatest})
    c = checks[0]
    d = c.query.system
    lasso = iterate(c.structure, d, ctx.max_steps)
    loop_ok = lasso.loop_len in (1, 2)
    checks.append(Check("loop length in {1,2}", c.structure, c.query, c.vars, True, loop_ok))
    return checks


def law_id_monotone(ctx: Ctx):
    return _derived_checks(ctx, "positive", {Kind.ID: oracles.knaster_tarski}, cap=3)


def _roundtrip(ctx: Ctx, translate, ops, body_mode: str, temporal: int = 2, header_depth: int = 3):
    s = ctx.structure(3)
    f, hv = random_iteration(ctx.rng, body_mode=body_mode, ops=ops, temporal=temporal, header_depth=header_depth)
    expected = ctx.sat(s, ctx.encoded(f), hv)
    return [Check("round trip", s, f, hv, expected, translate(s, f, hv))]


def law_thm1_roundtrip(ctx: Ctx):
    return _roundtrip(ctx, lambda s, f, hv: ctx.sat(s, translate_to_pfp(f), hv), PFP_FRAGMENT, "any")


def law_thm1_next_until(ctx: Ctx):
    return _roundtrip(ctx, lambda s, f, hv: ctx.sat(s, translate_to_pfp(f), hv), FULL_FRAGMENT, "any")


def law_lfp_roundtrip(ctx: Ctx):
    def via_aux(s, f, hv):
        g, aux = translate_monotone_to_lfp(f)
        return eval_with_aux(s, g, aux, hv, max_steps=ctx.max_steps)

    def build(ctx=ctx):
        s = ctx.structure(3)
        k = ctx.rng.randint(1, 2)
        xs, body = random_body(ctx.rng, "R", k, "positive")
        header = random_header(ctx.rng, {"R": k}, MONOTONE_FRAGMENT, depth=3, temporal=2)
        hv = tuple(ordered_free_variables(header))
        f = Iter(header, IterationSystem.single("R", xs, body), tuple(Var(v) for v in hv))
        return s, f, hv

    s, f, hv = build()
    expected = ctx.sat(s, ctx.encoded(f), hv)
    return [Check("round trip", s, f, hv, expected, via_aux(s, f, hv))]


def _lasso_instance(ctx: Ctx):
    s = ctx.structure(3)
    system = random_system(ctx.rng, "any", 2, 3)
    header = random_header(ctx.rng, {d.pred: d.arity for d in system.defs}, FULL_FRAGMENT, depth=3, temporal=2)
    hv = tuple(ordered_free_variables(header))
    lasso = iterate(s, system, ctx.max_steps)
    ev = Evaluator(s, ctx.max_steps)
    return s, system, header, hv, lasso, ev


def _lasso_check(label, s, system, lhs, rhs, hv, lasso, ev, ctx, lasso_rhs=None):
    a = eval_lasso(s, lasso, lhs, hv, evaluator=ev)
    b = eval_lasso(s, lasso_rhs or lasso, ctx.encoded(rhs), hv, evaluator=ev)
    return Check(label, s, Iter(lhs, system, tuple(Var(v) for v in hv)), hv, a, b)


def law_unroll_invariance(ctx: Ctx):
    s, system, h, hv, lasso, ev = _lasso_instance(ctx)
    return [_lasso_check("unrolled lasso", s, system, h, h, hv, lasso, ev, ctx, lasso.unrolled())]


def law_fg_duality(ctx: Ctx):
    s, system, h, hv, lasso, ev = _lasso_instance(ctx)
    return [
        _lasso_check("G = !F!", s, system, Always(h), Not(Eventually(Not(h))), hv, lasso, ev, ctx),
        _lasso_check("F = !G!", s, system, Eventually(h), Not(Always(Not(h))), hv, lasso, ev, ctx),
    ]


def law_until_unfolding(ctx: Ctx):
    s, system, a, hv_a, lasso, ev = _lasso_instance(ctx)
    b = random_header(ctx.rng, {d.pred: d.arity for d in system.defs}, FULL_FRAGMENT, depth=3, temporal=1)
    u = Until(a, b)
    hv = tuple(ordered_free_variables(u))
    unfolded = Or(b, And(a, Next(u)))
    return [_lasso_check("a U b = b | a & X(a U b)", s, system, u, unfolded, hv, lasso, ev, ctx)]


LAWS: dict[str, Callable[[Ctx], list[Check]]] = {
    "lfp-direct": law_lfp_direct,
    "ifp-direct": law_ifp_direct,
    "pfp-direct": law_pfp_direct,
    "pfpgen-loop": law_pfpgen_loop,
    "osc-squared": law_osc_squared,
    "id-monotone": law_id_monotone,
    "thm1-roundtrip": law_thm1_roundtrip,
    "thm1-next-until": law_thm1_next_until,
    "lfp-roundtrip": law_lfp_roundtrip,
    "unroll-invariance": law_unroll_invariance,
    "fg-duality": law_fg_duality,
    "until-unfolding": law_until_unfolding,
}


def run_law(
    name: str, count: int = 100, seed: int = 0, *, max_domain: int = 4, mutate: bool = False,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> LawReport:
    """Run ``count`` instances; an instance passes when all of its checks hold."""
    law = LAWS[name]
    report = LawReport(name)
    for i in range(count):
        ctx = Ctx(random.Random(f"{name}:{seed}:{i}"), max_domain, mutate, max_steps)
        checks = law(ctx)
        report.total += 1
        bad = next((c for c in checks if not c.ok), None)
        if bad is None:
            report.passed += 1
        elif report.counterexample is None:
            report.counterexample = bad
    return report
