"""Expansion of classical fixpoint constructs into temporally accessed iterations.

Each kind is defined by a header over the iteration stages:

==========  ============================================================
lfp         ``F R(z)``, body positive in R
ifp         ``F R(z)`` over the inflationary body ``R(x) | phi``
pfp         ``F (R(z) & forall v. (R(v) <-> X R(v)))``
pfpgen      ``F G R(z)``
pfpcup      ``F R(z)``, any body
pfpcap      ``G R(z)``
rfp         ``G F R(z)``
opnu, opmu  the oscillating-point headers, body negative in R
id          lower / negated-upper approximation system (see :func:`expand_id`)
==========  ============================================================
"""

from __future__ import annotations

from typing import Callable

from .formula import (
    Always,
    And,
    Atom,
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
    NameSupply,
    Next,
    Not,
    Or,
    Polarity,
    PolarityError,
    Term,
    Until,
    Var,
    _monotone_construct,
    atom,
    conj,
    exists_many,
    forall_many,
    free_predicates,
    polarity,
)


def _vars(prefix: str, k: int) -> tuple[str, ...]:
    return (prefix,) if k == 1 else tuple(f"{prefix}{i}" for i in range(1, k + 1))


def _stable(pred: str, k: int, steps: int = 1) -> Formula:
    """``forall v. (R(v) <-> X^steps R(v))``."""
    vs = _vars("v", k)
    later: Formula = atom(pred, *vs)
    for _ in range(steps):
        later = Next(later)
    return forall_many(vs, Iff(atom(pred, *vs), later))


def _check_polarity(system: IterationSystem, allowed: set[Polarity], what: str) -> None:
    for d in system.defs:
        for p in system.preds:
            pol = polarity(d.body, p)
            if pol not in allowed:
                raise PolarityError(f"body of {d.pred} is {pol.value} in {p}; {what} requires {' or '.join(sorted(a.value for a in allowed))}")


POSITIVE = {Polarity.POSITIVE, Polarity.ABSENT}
NEGATIVE = {Polarity.NEGATIVE, Polarity.ABSENT}


def header_for(kind: Kind, system: IterationSystem) -> Formula:
    """Temporal header that reads the first definition's construct off the stages."""
    first = system.defs[0]
    z = _vars("z", first.arity)
    r = atom(first.pred, *z)
    match kind:
        case Kind.LFP | Kind.IFP | Kind.PFPCUP:
            return Eventually(r)
        case Kind.PFP:
            return Eventually(conj([r] + [_stable(d.pred, d.arity) for d in system.defs]))
        case Kind.PFPGEN:
            return Eventually(Always(r))
        case Kind.PFPCAP:
            return Always(r)
        case Kind.RFP:
            return Always(Eventually(r))
        case Kind.OPNU | Kind.OPMU:
            ys = _vars("y", first.arity)
            ry = atom(first.pred, *ys)
            if kind is Kind.OPNU:
                leaves = exists_many(ys, And(ry, Next(Not(ry))))
            else:
                leaves = exists_many(ys, And(Not(ry), Next(ry)))
            return Eventually(conj([r, _stable(first.pred, first.arity, 2), Or(leaves, _stable(first.pred, first.arity))]))
    raise ValueError(f"no header for {kind}")


def expand(f: Formula, supply: NameSupply | None = None) -> Formula:
    """Replace every derived construct in ``f`` by a core iteration."""
    supply = supply or NameSupply.for_formula(f)
    return _expand(f, supply)


def _expand_system(system: IterationSystem, supply) -> IterationSystem:
    return IterationSystem(tuple(Definition(d.pred, d.vars, _expand(d.body, supply)) for d in system.defs))


def _expand(f: Formula, supply: NameSupply) -> Formula:
    match f:
        case Derived():
            return _expand(expand_derived(f, supply), supply)
        case Iter(h, system, args):
            return Iter(_expand(h, supply), _expand_system(system, supply), args)
        case Not(g) | Next(g) | Eventually(g) | Always(g):
            return type(f)(_expand(g, supply))
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return type(f)(_expand(a, supply), _expand(b, supply))
        case Exists(v, g) | Forall(v, g):
            return type(f)(v, _expand(g, supply))
    return f


def expand_derived(f: Derived, supply: NameSupply | None = None) -> Formula:
    """One derived node to its core form (bodies expanded, except ID's inner lfp)."""
    supply = supply or NameSupply.for_formula(f)
    kind, system = f.kind, f.system
    if kind is Kind.ID:
        return expand_id(f, supply)
    if kind is Kind.LFP:
        _check_polarity(system, POSITIVE, "lfp")
    elif kind in (Kind.OPMU, Kind.OPNU):
        _check_polarity(system, NEGATIVE, kind.value)
    system = _expand_system(system, supply)
    if kind is Kind.IFP:
        system = IterationSystem(
            tuple(Definition(d.pred, d.vars, Or(atom(d.pred, *d.vars), d.body)) for d in system.defs)
        )
    return Iter(header_for(kind, system), system, f.args)


def replace_negative(f: Formula, p: str, repl: Callable[[tuple[Term, ...]], Formula]) -> Formula:
    """Replace the negative occurrences of ``p`` by ``repl(args)``; positive ones stay."""

    def go(g: Formula, positive: bool) -> Formula:
        if p not in free_predicates(g):
            return g
        match g:
            case Atom(q, args):
                return g if positive or q != p else repl(args)
            case Not(h):
                return Not(go(h, not positive))
            case Implies(a, b):
                return Implies(go(a, not positive), go(b, positive))
            case Iff(a, b):
                return go(And(Implies(a, b), Implies(b, a)), positive)
            case Exists(v, h) | Forall(v, h):
                return type(g)(v, go(h, positive))
            case Iter(_, sys, _) | Derived(_, sys, _):
                if not _monotone_construct(g):
                    raise PolarityError(f"cannot split occurrences of {p} inside a non-monotone nested construct")
                new_sys = IterationSystem(tuple(Definition(d.pred, d.vars, go(d.body, positive)) for d in sys.defs))
                if isinstance(g, Iter):
                    return Iter(g.header, new_sys, g.args)
                return Derived(g.kind, new_sys, g.args)
            case Next(h) | Eventually(h) | Always(h):
                return type(g)(go(h, positive))
            case And(a, b) | Or(a, b) | Until(a, b):
                return type(g)(go(a, positive), go(b, positive))
        return g

    return go(f, True)


def expand_id(f: Derived, supply: NameSupply) -> Formula:
    """ID construct as a simultaneous iteration of lower / negated-upper bounds.

    ``P_u(y) <- !lfp[P(x): phi(P_l)](y)`` and ``P_l(y) <- lfp[P(x): phi(!P_u)](y)``,
    read out by ``F (P_l(z) & forall y. (P_l(y) <-> !P_u(y)))``.
    """
    p, xs, body = f.pred, f.bound_vars, f.body
    k = len(xs)
    lower = supply.fresh(f"{p}_l")
    upper = supply.fresh(f"{p}_u")
    ys = tuple(supply.fresh("y") for _ in range(k))
    y_terms = tuple(Var(y) for y in ys)
    via_lower = replace_negative(body, p, lambda args: Atom(lower, tuple(args)))
    via_upper = replace_negative(body, p, lambda args: Not(Atom(upper, tuple(args))))
    system = IterationSystem(
        (
            Definition(upper, ys, Not(Derived.single(Kind.LFP, p, xs, via_lower, y_terms))),
            Definition(lower, ys, Derived.single(Kind.LFP, p, xs, via_upper, y_terms)),
        )
    )
    z = _vars("z", k)
    hy = _vars("y", k)
    header = Eventually(
        And(atom(lower, *z), forall_many(hy, Iff(atom(lower, *hy), Not(atom(upper, *hy)))))
    )
    return Iter(header, system, f.args)
