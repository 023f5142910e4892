"""Formula AST, syntactic analyses and capture-avoiding substitution."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

RESERVED_PREFIX = "__"


class FormulaError(ValueError):
    pass


class PolarityError(FormulaError):
    pass


def _node(cls):
    """Frozen dataclass whose hash is computed once.

    Formulas are used as memo keys all over the evaluator; the generated
    dataclass hash walks the whole tree on every call.
    """
    cls = dataclass(frozen=True)(cls)
    field_hash = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = field_hash(self)
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


# -- terms -------------------------------------------------------------------


class Term:
    __slots__ = ()


@_node
class Var(Term):
    name: str

    def __str__(self):
        return self.name


@_node
class Const(Term):
    name: str

    def __str__(self):
        return self.name


# -- formulas ----------------------------------------------------------------


class Formula:
    pass


@_node
class Atom(Formula):
    pred: str
    args: tuple[Term, ...] = ()


@_node
class Equal(Formula):
    left: Term
    right: Term


@_node
class Not(Formula):
    operand: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Implies(Formula):
    left: Formula
    right: Formula


@_node
class Iff(Formula):
    left: Formula
    right: Formula


@_node
class Exists(Formula):
    var: str
    body: Formula


@_node
class Forall(Formula):
    var: str
    body: Formula


@_node
class Next(Formula):
    operand: Formula


@_node
class Eventually(Formula):
    operand: Formula


@_node
class Always(Formula):
    operand: Formula


@_node
class Until(Formula):
    left: Formula
    right: Formula


@_node
class Definition:
    pred: str
    vars: tuple[str, ...]
    body: Formula

    @property
    def arity(self) -> int:
        return len(self.vars)


@_node
class IterationSystem:
    defs: tuple[Definition, ...]

    def __post_init__(self):
        if not self.defs:
            raise FormulaError("iteration system needs at least one definition")
        preds = [d.pred for d in self.defs]
        if len(set(preds)) != len(preds):
            raise FormulaError(f"duplicate predicate variable in system: {preds}")
        for d in self.defs:
            if len(set(d.vars)) != len(d.vars):
                raise FormulaError(f"repeated bound variable in definition of {d.pred}")

    @classmethod
    def single(cls, pred: str, vars: Iterable[str], body: Formula) -> IterationSystem:
        return cls((Definition(pred, tuple(vars), body),))

    @property
    def preds(self) -> tuple[str, ...]:
        return tuple(d.pred for d in self.defs)

    def arity_of(self, pred: str) -> int | None:
        for d in self.defs:
            if d.pred == pred:
                return d.arity
        return None


@_node
class Iter(Formula):
    """``[header][iter system](args)``; header variables in first-occurrence order."""

    header: Formula
    system: IterationSystem
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        if len(self.args) != len(self.header_vars):
            raise FormulaError(
                f"iteration header has free variables {list(self.header_vars)} "
                f"but {len(self.args)} argument(s) were given"
            )

    @property
    def header_vars(self) -> tuple[str, ...]:
        try:
            return self.__dict__["_hv"]
        except KeyError:
            hv = tuple(ordered_free_variables(self.header))
            object.__setattr__(self, "_hv", hv)
            return hv


class Kind(str, enum.Enum):
    LFP = "lfp"
    IFP = "ifp"
    PFP = "pfp"
    PFPGEN = "pfpgen"
    PFPCUP = "pfpcup"
    PFPCAP = "pfpcap"
    RFP = "rfp"
    OPMU = "opmu"
    OPNU = "opnu"
    ID = "id"

    def __str__(self):
        return self.value


# kinds whose expansion only needs a single definition
SINGLE_ONLY = {Kind.OPMU, Kind.OPNU, Kind.ID}


@_node
class Derived(Formula):
    """A classical fixpoint construct; the first definition is the one read out."""

    kind: Kind
    system: IterationSystem
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if len(self.args) != self.system.defs[0].arity:
            raise FormulaError(
                f"{self.kind} construct for {self.pred} expects {self.system.defs[0].arity} "
                f"argument(s), got {len(self.args)}"
            )
        if self.kind in SINGLE_ONLY and len(self.system.defs) != 1:
            raise FormulaError(f"{self.kind} takes a single definition")

    @classmethod
    def single(cls, kind, pred: str, vars: Iterable[str], body: Formula, args: Iterable[Term]) -> Derived:
        return cls(Kind(kind), IterationSystem.single(pred, vars, body), tuple(args))

    @property
    def pred(self) -> str:
        return self.system.defs[0].pred

    @property
    def bound_vars(self) -> tuple[str, ...]:
        return self.system.defs[0].vars

    @property
    def body(self) -> Formula:
        return self.system.defs[0].body


TEMPORAL = (Next, Eventually, Always, Until)
BINARY = (And, Or, Implies, Iff, Until)
QUANTIFIERS = (Exists, Forall)


# -- constructors ------------------------------------------------------------


def false_formula(var: str = "x") -> Formula:
    """The closed formula ``exists x. !(x = x)``."""
    return Exists(var, Not(Equal(Var(var), Var(var))))


def true_formula(var: str = "x") -> Formula:
    return Forall(var, Equal(Var(var), Var(var)))


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return true_formula()
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return false_formula()
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def exists_many(vars: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Exists(v, body)
    return body


def forall_many(vars: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Forall(v, body)
    return body


def atom(pred: str, *vars: str) -> Atom:
    return Atom(pred, tuple(Var(v) for v in vars))


# -- traversal ---------------------------------------------------------------


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Not(g) | Next(g) | Eventually(g) | Always(g):
            return (g,)
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return (a, b)
        case Exists(_, g) | Forall(_, g):
            return (g,)
        case Iter(h, sys, _):
            return (h,) + tuple(d.body for d in sys.defs)
        case Derived(_, sys, _):
            return tuple(d.body for d in sys.defs)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from subformulas(c)


def _term_vars(ts: Iterable[Term]) -> list[str]:
    return [t.name for t in ts if isinstance(t, Var)]


def _ordered_fv(f: Formula, bound: frozenset, out: list, seen: set) -> None:
    def emit(names):
        for n in names:
            if n not in bound and n not in seen:
                seen.add(n)
                out.append(n)

    match f:
        case Atom(_, args):
            emit(_term_vars(args))
        case Equal(a, b):
            emit(_term_vars((a, b)))
        case Exists(v, g) | Forall(v, g):
            _ordered_fv(g, bound | {v}, out, seen)
        case Iter(_, sys, args) | Derived(_, sys, args):
            # headers are closed apart from the header variables
            for d in sys.defs:
                _ordered_fv(d.body, bound | set(d.vars), out, seen)
            emit(_term_vars(args))
        case _:
            for c in children(f):
                _ordered_fv(c, bound, out, seen)


def ordered_free_variables(f: Formula) -> list[str]:
    """Free individual variables in order of first (printed) occurrence."""
    out: list[str] = []
    _ordered_fv(f, frozenset(), out, set())
    return out


@lru_cache(maxsize=200_000)
def free_variables(f: Formula) -> frozenset[str]:
    match f:
        case Atom(_, args):
            return frozenset(_term_vars(args))
        case Equal(a, b):
            return frozenset(_term_vars((a, b)))
        case Exists(v, g) | Forall(v, g):
            return free_variables(g) - {v}
        case Iter(_, sys, args) | Derived(_, sys, args):
            out = set(_term_vars(args))
            for d in sys.defs:
                out |= free_variables(d.body) - set(d.vars)
            return frozenset(out)
    out = frozenset()
    for c in children(f):
        out |= free_variables(c)
    return out


@lru_cache(maxsize=200_000)
def free_predicates(f: Formula) -> frozenset[str]:
    """Predicate names occurring free (relation symbols included)."""
    match f:
        case Atom(p, _):
            return frozenset({p})
        case Iter(h, sys, _):
            inner = set(free_predicates(h))
            for d in sys.defs:
                inner |= free_predicates(d.body)
            return frozenset(inner - set(sys.preds))
        case Derived(_, sys, _):
            inner = set()
            for d in sys.defs:
                inner |= free_predicates(d.body)
            return frozenset(inner - set(sys.preds))
    out = frozenset()
    for c in children(f):
        out |= free_predicates(c)
    return out


def all_names(f: Formula) -> set[str]:
    """Every identifier used anywhere in ``f`` (variables, predicates, constants)."""
    out: set[str] = set()
    for g in subformulas(f):
        match g:
            case Atom(p, args):
                out.add(p)
                out.update(t.name for t in args)
            case Equal(a, b):
                out.update((a.name, b.name))
            case Exists(v, _) | Forall(v, _):
                out.add(v)
            case Iter(_, sys, args) | Derived(_, sys, args):
                out.update(t.name for t in args)
                for d in sys.defs:
                    out.add(d.pred)
                    out.update(d.vars)
    return out


def has_temporal(f: Formula) -> bool:
    """True if a temporal connective occurs at this level (outside nested headers)."""
    match f:
        case Next() | Eventually() | Always() | Until():
            return True
        case Iter() | Derived():
            return False
    return any(has_temporal(c) for c in children(f))


def temporal_misuse(f: Formula, in_header: bool = False) -> Formula | None:
    """Return the first temporal subformula that is not inside an iteration header."""
    match f:
        case Next() | Eventually() | Always() | Until():
            if not in_header:
                return f
            return next((m for c in children(f) if (m := temporal_misuse(c, True))), None)
        case Iter(h, sys, _):
            if m := temporal_misuse(h, True):
                return m
            return next((m for d in sys.defs if (m := temporal_misuse(d.body, False))), None)
        case Derived(_, sys, _):
            return next((m for d in sys.defs if (m := temporal_misuse(d.body, False))), None)
    return next((m for c in children(f) if (m := temporal_misuse(c, in_header))), None)


# -- polarity ----------------------------------------------------------------


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    MIXED = "mixed"
    ABSENT = "absent"

    def dual(self) -> Polarity:
        return {Polarity.POSITIVE: Polarity.NEGATIVE, Polarity.NEGATIVE: Polarity.POSITIVE}.get(self, self)

    @classmethod
    def from_signs(cls, signs: set[bool]) -> Polarity:
        if not signs:
            return cls.ABSENT
        if signs == {True}:
            return cls.POSITIVE
        if signs == {False}:
            return cls.NEGATIVE
        return cls.MIXED


def _monotone_construct(f: Formula) -> bool:
    """Nested constructs that are monotone in positively occurring parameters."""
    match f:
        case Derived(Kind.LFP, sys, _):
            bodies_ok = True
        case Iter(Eventually(Atom(p, args)), sys, _) if p in sys.preds and all(
            isinstance(t, Var) for t in args
        ):
            bodies_ok = True
        case _:
            return False
    return bodies_ok and all(
        polarity(d.body, q) in (Polarity.POSITIVE, Polarity.ABSENT) for d in sys.defs for q in sys.preds
    )


def _signs(f: Formula, p: str, positive: bool, out: set[bool]) -> None:
    match f:
        case Atom(q, _):
            if q == p:
                out.add(positive)
        case Equal():
            pass
        case Not(g):
            _signs(g, p, not positive, out)
        case Implies(a, b):
            _signs(a, p, not positive, out)
            _signs(b, p, positive, out)
        case Iff(a, b):
            for g in (a, b):
                _signs(g, p, positive, out)
                _signs(g, p, not positive, out)
        case Iter(_, sys, _) | Derived(_, sys, _):
            if p in sys.preds or p not in free_predicates(f):
                return
            if _monotone_construct(f):
                for d in sys.defs:
                    _signs(d.body, p, positive, out)
            else:
                out.update((True, False))
        case _:
            for c in children(f):
                _signs(c, p, positive, out)


@lru_cache(maxsize=50_000)
def polarity(f: Formula, p: str) -> Polarity:
    """Polarity of predicate ``p`` in ``f`` (Implies/Iff desugared)."""
    out: set[bool] = set()
    _signs(f, p, True, out)
    return Polarity.from_signs(out)


# -- fresh names and substitution -------------------------------------------


class NameSupply:
    """Generates reserved-prefix names that avoid everything already in use."""

    def __init__(self, used: Iterable[str] = ()):
        self.used = set(used)
        self._counter = itertools.count(1)

    def avoid(self, names: Iterable[str]) -> None:
        self.used.update(names)

    def fresh(self, hint: str = "v") -> str:
        hint = hint.lstrip("_") or "v"
        while True:
            name = f"{RESERVED_PREFIX}{hint}{next(self._counter)}"
            if name not in self.used:
                self.used.add(name)
                return name

    @classmethod
    def for_formula(cls, *fs: Formula) -> NameSupply:
        used: set[str] = set()
        for f in fs:
            used |= all_names(f)
        return cls(used)


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    return t


def _term_names(mapping: Mapping[str, Term]) -> set[str]:
    return {t.name for t in mapping.values() if isinstance(t, Var)}


def subst_vars(f: Formula, mapping: Mapping[str, Term], supply: NameSupply) -> Formula:
    """Capture-avoiding substitution of terms for free individual variables."""
    mapping = {k: v for k, v in mapping.items() if not (isinstance(v, Var) and v.name == k)}
    if not mapping or not (free_variables(f) & mapping.keys()):
        return f
    incoming = _term_names(mapping)

    def binder(v: str, m: dict) -> tuple[str, dict]:
        m = {k: t for k, t in m.items() if k != v}
        if v in _term_names(m):
            nv = supply.fresh(v)
            m[v] = Var(nv)
            return nv, m
        return v, m

    match f:
        case Atom(p, args):
            return Atom(p, tuple(_subst_term(t, mapping) for t in args))
        case Equal(a, b):
            return Equal(_subst_term(a, mapping), _subst_term(b, mapping))
        case Exists(v, g) | Forall(v, g):
            nv, m = binder(v, dict(mapping))
            return type(f)(nv, subst_vars(g, m, supply))
        case Iter(_, sys, args) | Derived(_, sys, args):
            defs = []
            for d in sys.defs:
                m = {k: t for k, t in mapping.items() if k not in d.vars}
                new_vars = list(d.vars)
                for i, v in enumerate(d.vars):
                    if v in incoming and m:
                        nv = supply.fresh(v)
                        m[v] = Var(nv)
                        new_vars[i] = nv
                defs.append(Definition(d.pred, tuple(new_vars), subst_vars(d.body, m, supply)))
            new_args = tuple(_subst_term(t, mapping) for t in args)
            if isinstance(f, Iter):
                return Iter(f.header, IterationSystem(tuple(defs)), new_args)
            return Derived(f.kind, IterationSystem(tuple(defs)), new_args)
        case Not(g) | Next(g) | Eventually(g) | Always(g):
            return type(f)(subst_vars(g, mapping, supply))
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return type(f)(subst_vars(a, mapping, supply), subst_vars(b, mapping, supply))
    raise TypeError(f"not a formula: {f!r}")


def instantiate(vars: Iterable[str], body: Formula, args: Iterable[Term], supply: NameSupply) -> Formula:
    """``body`` with ``vars`` replaced simultaneously by ``args``."""
    return subst_vars(body, dict(zip(vars, args)), supply)


def subst_pred(
    f: Formula,
    pred: str,
    template: Callable[[tuple[Term, ...]], Formula],
    supply: NameSupply,
    template_vars: Iterable[str] = (),
) -> Formula:
    """Replace every free ``pred(args)`` atom by ``template(args)``.

    ``template_vars`` are individual variables free in the template results
    (other than the arguments); binders in ``f`` that would capture them are
    renamed.
    """
    template_vars = frozenset(template_vars)
    return _subst_pred(f, pred, template, supply, template_vars)


def _subst_pred(f, pred, template, supply, tv):
    if pred not in free_predicates(f):
        return f
    rec = lambda g: _subst_pred(g, pred, template, supply, tv)  # noqa: E731
    match f:
        case Atom(p, args):
            return template(args) if p == pred else f
        case Exists(v, g) | Forall(v, g):
            if v in tv:
                nv = supply.fresh(v)
                g = subst_vars(g, {v: Var(nv)}, supply)
                v = nv
            return type(f)(v, rec(g))
        case Iter(_, sys, args) | Derived(_, sys, args):
            if pred in sys.preds:
                return f
            defs = []
            for d in sys.defs:
                body, vars_ = d.body, list(d.vars)
                clash = {v: Var(supply.fresh(v)) for v in vars_ if v in tv}
                if clash:
                    body = subst_vars(body, clash, supply)
                    vars_ = [clash[v].name if v in clash else v for v in vars_]
                defs.append(Definition(d.pred, tuple(vars_), rec(body)))
            sys2 = IterationSystem(tuple(defs))
            if isinstance(f, Iter):
                h2 = rec(f.header)
                if free_variables(h2) != free_variables(f.header):
                    raise FormulaError(f"substituting for {pred} would open the header of a nested iteration")
                return Iter(h2, sys2, args)
            return Derived(f.kind, sys2, args)
        case Not(g) | Next(g) | Eventually(g) | Always(g):
            return type(f)(rec(g))
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return type(f)(rec(a), rec(b))
    return f


def rename_pred(f: Formula, old: str, new: str, supply: NameSupply) -> Formula:
    return subst_pred(f, old, lambda args: Atom(new, tuple(args)), supply)


def substitute_system(
    f: Formula, system: IterationSystem, replacement: Mapping[str, Callable[[tuple[Term, ...]], Formula]],
    supply: NameSupply, template_vars: Iterable[str] = (),
) -> Formula:
    """Apply :func:`subst_pred` for each system predicate simultaneously.

    Templates must not mention the system predicates themselves, so
    sequential replacement is equivalent to simultaneous replacement.
    """
    for p in system.preds:
        if p in replacement:
            f = subst_pred(f, p, replacement[p], supply, template_vars)
    return f


def desugar(f: Formula) -> Formula:
    """Rewrite Or/Exists/Implies/Iff/Always into And/Forall/Not/Eventually.

    Nested iteration constructs are left untouched.
    """
    match f:
        case Or(a, b):
            return Not(And(Not(desugar(a)), Not(desugar(b))))
        case Implies(a, b):
            return Not(And(desugar(a), Not(desugar(b))))
        case Iff(a, b):
            da, db = desugar(a), desugar(b)
            return And(Not(And(da, Not(db))), Not(And(db, Not(da))))
        case Exists(v, g):
            return Not(Forall(v, Not(desugar(g))))
        case Always(g):
            return Not(Eventually(Not(desugar(g))))
        case Not(g) | Next(g) | Eventually(g):
            return type(f)(desugar(g))
        case Forall(v, g):
            return Forall(v, desugar(g))
        case And(a, b) | Until(a, b):
            return type(f)(desugar(a), desugar(b))
    return f
