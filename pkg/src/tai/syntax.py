"""Concrete syntax: tokenizer, recursive-descent parser, printer, checks.

Precedence, loosest first: ``<->``, ``->`` (right associative), ``|``,
``U``, ``&``, then the prefix operators ``!``, ``X``, ``F``, ``G``.
Quantifiers extend as far to the right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .formula import (
    RESERVED_PREFIX,
    Always,
    And,
    Atom,
    Const,
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
    Next,
    Not,
    Or,
    Term,
    Until,
    Var,
    children,
    temporal_misuse,
)
from .structure import Signature

KEYWORDS = {"exists", "forall", "iter", "X", "F", "G", "U"}
KINDS = {k.value: k for k in Kind}


class ParseError(FormulaError):
    def __init__(self, message: str, text: str = "", pos: int | None = None):
        self.pos = pos
        if pos is not None:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class SignatureError(FormulaError):
    """Well-formed text that does not fit the signature: arities, unknown symbols."""


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, OP, EOF
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><->|->|!=|[()\[\],.;:!&|=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup == "name":
            out.append(Token("NAME", m.group(), pos))
        elif m.lastgroup == "op":
            out.append(Token("OP", m.group(), pos))
        pos = m.end()
    out.append(Token("EOF", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, constants: set[str]):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.constants = constants

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, self.text, tok.pos)

    def at(self, text: str) -> bool:
        return self.tok.kind != "EOF" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str = "name") -> str:
        t = self.tok
        if t.kind != "NAME" or t.text in KEYWORDS:
            self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    # grammar
    def formula(self, scope: frozenset) -> Formula:
        left = self.implies(scope)
        while self.at("<->"):
            self.i += 1
            left = Iff(left, self.implies(scope))
        return left

    def implies(self, scope):
        left = self.or_(scope)
        if self.at("->"):
            self.i += 1
            return Implies(left, self.implies(scope))
        return left

    def or_(self, scope):
        left = self.until(scope)
        while self.at("|"):
            self.i += 1
            left = Or(left, self.until(scope))
        return left

    def until(self, scope):
        left = self.and_(scope)
        while self.tok.kind == "NAME" and self.tok.text == "U":
            self.i += 1
            left = Until(left, self.and_(scope))
        return left

    def and_(self, scope):
        left = self.unary(scope)
        while self.at("&"):
            self.i += 1
            left = And(left, self.unary(scope))
        return left

    def unary(self, scope):
        t = self.tok
        if self.at("!"):
            self.i += 1
            return Not(self.unary(scope))
        if t.kind == "NAME" and t.text in ("X", "F", "G"):
            self.i += 1
            op = {"X": Next, "F": Eventually, "G": Always}[t.text]
            return op(self.unary(scope))
        if t.kind == "NAME" and t.text in ("exists", "forall"):
            self.i += 1
            v = self.name("variable")
            self.expect(".")
            body = self.formula(scope | {v})
            return (Exists if t.text == "exists" else Forall)(v, body)
        return self.primary(scope)

    def term(self, scope) -> Term:
        n = self.name("term")
        if n in scope or n not in self.constants:
            return Var(n)
        return Const(n)

    def terms(self, scope, close: str = ")") -> tuple[Term, ...]:
        out = []
        if not self.at(close):
            out.append(self.term(scope))
            while self.at(","):
                self.i += 1
                out.append(self.term(scope))
        self.expect(close)
        return tuple(out)

    def var_list(self) -> tuple[str, ...]:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.name("variable"))
            while self.at(","):
                self.i += 1
                out.append(self.name("variable"))
        self.expect(")")
        return tuple(out)

    def definitions(self, scope) -> IterationSystem:
        defs = []
        while True:
            start = self.tok
            pred = self.name("predicate variable")
            vars_ = self.var_list()
            self.expect(":")
            body = self.formula(scope | set(vars_))
            defs.append(Definition(pred, vars_, body))
            if self.at(";"):
                self.i += 1
                continue
            break
        try:
            return IterationSystem(tuple(defs))
        except FormulaError as e:
            self.error(str(e), start)

    def primary(self, scope) -> Formula:
        t = self.tok
        if self.at("("):
            self.i += 1
            f = self.formula(scope)
            self.expect(")")
            return f
        if self.at("["):
            self.i += 1
            # the header is closed apart from its own (free) variables
            header = self.formula(frozenset())
            self.expect("]")
            self.expect("[")
            if not (self.tok.kind == "NAME" and self.tok.text == "iter"):
                self.error("expected 'iter'")
            self.i += 1
            system = self.definitions(scope)
            self.expect("]")
            self.expect("(")
            args = self.terms(scope)
            try:
                return Iter(header, system, args)
            except FormulaError as e:
                self.error(str(e), t)
        if t.kind == "NAME" and t.text in KINDS and self.peek().text == "[":
            self.i += 2
            system = self.definitions(scope)
            self.expect("]")
            self.expect("(")
            args = self.terms(scope)
            try:
                return Derived(KINDS[t.text], system, args)
            except FormulaError as e:
                self.error(str(e), t)
        if t.kind == "NAME" and t.text not in KEYWORDS:
            if self.peek().text == "(":
                self.i += 2
                return Atom(t.text, self.terms(scope))
            left = self.term(scope)
            if self.at("="):
                self.i += 1
                return Equal(left, self.term(scope))
            if self.at("!="):
                self.i += 1
                return Not(Equal(left, self.term(scope)))
            self.error("expected '(' , '=' or '!=' after name")
        self.error(f"unexpected {t.text or 'end of input'!r}")


def parse_formula(
    text: str,
    signature: Signature | None = None,
    *,
    constants: Iterable[str] = (),
    allow_reserved: bool = False,
) -> Formula:
    """Parse formula text.

    Identifiers in term position are constants when declared in
    ``signature`` (or ``constants``) and not bound by an enclosing binder;
    otherwise they are variables.
    """
    consts = set(constants)
    if signature is not None:
        consts |= set(signature.constants)
    p = _Parser(text, consts)
    f = p.formula(frozenset())
    if p.tok.kind != "EOF":
        p.error(f"unexpected {p.tok.text!r} after formula")
    check_formula(f, signature, allow_reserved=allow_reserved, text=text)
    return f


def check_formula(
    f: Formula,
    signature: Signature | None = None,
    *,
    allow_reserved: bool = False,
    text: str = "",
) -> None:
    """Well-formedness: temporal placement, predicate binding and arities."""
    if (m := temporal_misuse(f)) is not None:
        raise ParseError(f"temporal operator outside iteration header: {print_formula(m)}")
    _check(f, {}, signature, allow_reserved)


def _check_binder(name: str, allow_reserved: bool):
    if not allow_reserved and name.startswith(RESERVED_PREFIX):
        raise ParseError(f"names starting with {RESERVED_PREFIX!r} are reserved: {name}")


def _check(f: Formula, preds: dict[str, int], sig: Signature | None, allow_reserved: bool) -> None:
    match f:
        case Atom(p, args):
            if p in preds:
                if preds[p] != len(args):
                    raise SignatureError(f"arity mismatch: {p} has arity {preds[p]}, used with {len(args)}")
            elif sig is not None:
                k = sig.arity(p)
                if k is None:
                    raise SignatureError(f"unbound predicate variable {p}")
                if k != len(args):
                    raise SignatureError(f"arity mismatch: {p} has arity {k}, used with {len(args)}")
            _check_terms(args, sig)
        case Equal(a, b):
            _check_terms((a, b), sig)
        case Exists(v, g) | Forall(v, g):
            _check_binder(v, allow_reserved)
            _check(g, preds, sig, allow_reserved)
        case Iter(_, system, args) | Derived(_, system, args):
            inner = dict(preds)
            for d in system.defs:
                _check_binder(d.pred, allow_reserved)
                if sig is not None and sig.arity(d.pred) is not None:
                    raise SignatureError(f"predicate variable {d.pred} clashes with a relation symbol")
                for v in d.vars:
                    _check_binder(v, allow_reserved)
                inner[d.pred] = d.arity
            for d in system.defs:
                _check(d.body, inner, sig, allow_reserved)
            if isinstance(f, Iter):
                _check(f.header, inner, sig, allow_reserved)
            _check_terms(args, sig)
        case _:
            for c in children(f):
                _check(c, preds, sig, allow_reserved)


def _check_terms(args, sig):
    if sig is None:
        return
    for t in args:
        if isinstance(t, Const) and t.name not in sig.constants:
            raise SignatureError(f"unknown constant {t.name}")


# -- printing ----------------------------------------------------------------

_IFF, _IMP, _OR, _UNTIL, _AND, _UNARY, _ATOM = range(1, 8)
_BIN = {Iff: (_IFF, "<->"), Implies: (_IMP, "->"), Or: (_OR, "|"), Until: (_UNTIL, "U"), And: (_AND, "&")}
_PREFIX = {Not: "!", Next: "X ", Eventually: "F ", Always: "G "}


def _terms(args) -> str:
    return ",".join(t.name for t in args)


def _system(system: IterationSystem) -> str:
    return "; ".join(f"{d.pred}({','.join(d.vars)}): {print_formula(d.body)}" for d in system.defs)


def _pr(f: Formula) -> tuple[str, int, bool]:
    """Return (text, precedence, open_right)."""
    match f:
        case Atom(p, args):
            return f"{p}({_terms(args)})", _ATOM, False
        case Equal(a, b):
            return f"{a.name} = {b.name}", _ATOM, False
        case Iter(h, system, args):
            return f"[{print_formula(h)}][iter {_system(system)}]({_terms(args)})", _ATOM, False
        case Derived(kind, system, args):
            return f"{kind.value}[{_system(system)}]({_terms(args)})", _ATOM, False
        case Exists(v, g) | Forall(v, g):
            q = "exists" if isinstance(f, Exists) else "forall"
            body, _, _ = _pr(g)
            return f"{q} {v}. {body}", _UNARY, True
        case Not(g) | Next(g) | Eventually(g) | Always(g):
            text, prec, open_ = _pr(g)
            if prec < _UNARY:
                text, open_ = f"({text})", False
            return _PREFIX[type(f)] + text, _UNARY, open_
    prec, op = _BIN[type(f)]
    right_assoc = isinstance(f, Implies)
    lt, lp, lo = _pr(f.left)
    rt, rp, ro = _pr(f.right)
    if lp < prec or (lp == prec and right_assoc) or lo:
        lt = f"({lt})"
    if rp < prec or (rp == prec and not right_assoc):
        rt, ro = f"({rt})", False
    return f"{lt} {op} {rt}", prec, ro


def print_formula(f: Formula) -> str:
    return _pr(f)[0]
