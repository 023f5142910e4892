"""Finite relational structures and the structure-file format."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class StructureError(ValueError):
    """Raised for malformed structure files or invalid structures."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Relation:
    arity: int
    tuples: frozenset[tuple[int, ...]] = frozenset()

    def __post_init__(self):
        if self.arity < 0:
            raise StructureError(f"negative arity {self.arity}")
        if not isinstance(self.tuples, frozenset):
            object.__setattr__(self, "tuples", frozenset(tuple(t) for t in self.tuples))
        for t in self.tuples:
            if len(t) != self.arity:
                raise StructureError(f"tuple {t} does not have arity {self.arity}")

    @classmethod
    def of(cls, arity: int, tuples: Iterable[Iterable[int]] = ()) -> Relation:
        return cls(arity, frozenset(tuple(t) for t in tuples))

    @classmethod
    def empty(cls, arity: int) -> Relation:
        return cls(arity, frozenset())

    def __contains__(self, item) -> bool:
        return tuple(item) in self.tuples

    def __iter__(self):
        return iter(sorted(self.tuples))

    def __len__(self) -> int:
        return len(self.tuples)

    def __le__(self, other: Relation) -> bool:
        return self.tuples <= other.tuples

    def __and__(self, other: Relation) -> Relation:
        return Relation(self.arity, self.tuples & other.tuples)

    def __or__(self, other: Relation) -> Relation:
        return Relation(self.arity, self.tuples | other.tuples)

    def __sub__(self, other: Relation) -> Relation:
        return Relation(self.arity, self.tuples - other.tuples)

    def sorted(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def __repr__(self) -> str:
        return f"Relation({self.arity}, {self.sorted()})"


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations] + list(self.constants)
        seen = set()
        for n in names:
            if n in seen:
                raise StructureError(f"duplicate symbol {n!r}")
            seen.add(n)
        for n, k in self.relations:
            if not isinstance(k, int) or k < 0:
                raise StructureError(f"relation {n!r} has invalid arity {k!r}")

    def arity(self, name: str) -> int | None:
        for n, k in self.relations:
            if n == name:
                return k
        return None

    @property
    def relation_names(self) -> set[str]:
        return {n for n, _ in self.relations}


@dataclass(frozen=True)
class FiniteStructure:
    """A finite domain ``0..n-1`` with interpreted relations and constants.

    Relation and constant maps are stored as sorted tuples of pairs so that
    structures are hashable and compare by value.
    """

    domain_size: int
    signature: Signature
    rel_interp: tuple[tuple[str, Relation], ...] = ()
    const_interp: tuple[tuple[str, int], ...] = ()
    _rels: dict = field(init=False, repr=False, compare=False, hash=False)
    _consts: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n = self.domain_size
        if not isinstance(n, int) or n < 1:
            raise StructureError(f"domain size must be a positive integer, got {n!r}")
        rels = dict(self.rel_interp)
        consts = dict(self.const_interp)
        if len(rels) != len(self.rel_interp) or len(consts) != len(self.const_interp):
            raise StructureError("symbol interpreted twice")
        for name, k in self.signature.relations:
            if name not in rels:
                raise StructureError(f"relation {name!r} has no interpretation")
            r = rels[name]
            if r.arity != k:
                raise StructureError(f"relation {name!r} declared with arity {k}, interpreted with {r.arity}")
            for t in r.tuples:
                for e in t:
                    if not 0 <= e < n:
                        raise StructureError(f"element {e} out of range in {name}{t}")
        for name in self.signature.constants:
            if name not in consts:
                raise StructureError(f"constant {name!r} has no interpretation")
            if not 0 <= consts[name] < n:
                raise StructureError(f"element {consts[name]} out of range for constant {name!r}")
        extra = (set(rels) - self.signature.relation_names) | (set(consts) - set(self.signature.constants))
        if extra:
            raise StructureError(f"interpretation for undeclared symbols {sorted(extra)}")
        sig = self.signature
        object.__setattr__(self, "signature", Signature(tuple(sorted(sig.relations)), tuple(sorted(sig.constants))))
        object.__setattr__(self, "rel_interp", tuple(sorted(rels.items())))
        object.__setattr__(self, "const_interp", tuple(sorted(consts.items())))
        object.__setattr__(self, "_rels", rels)
        object.__setattr__(self, "_consts", consts)

    @classmethod
    def build(
        cls,
        domain_size: int,
        relations: Mapping[str, Relation] | None = None,
        constants: Mapping[str, int] | None = None,
    ) -> FiniteStructure:
        relations = dict(relations or {})
        constants = dict(constants or {})
        sig = Signature(
            tuple(sorted((name, r.arity) for name, r in relations.items())),
            tuple(sorted(constants)),
        )
        return cls(domain_size, sig, tuple(relations.items()), tuple(constants.items()))

    @property
    def domain(self) -> range:
        return range(self.domain_size)

    @property
    def relations(self) -> Mapping[str, Relation]:
        return self._rels

    @property
    def constants(self) -> Mapping[str, int]:
        return self._consts

    def relation(self, name: str) -> Relation:
        return self._rels[name]

    def constant(self, name: str) -> int:
        return self._consts[name]

    def with_relations(self, extra: Mapping[str, Relation]) -> FiniteStructure:
        """Return a copy with additional (or replaced) relation symbols."""
        rels = dict(self._rels)
        rels.update(extra)
        return FiniteStructure.build(self.domain_size, rels, self._consts)


@dataclass(frozen=True)
class Assignment:
    bindings: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, int] | None = None, **kw: int) -> Assignment:
        d = dict(mapping or {})
        d.update(kw)
        return cls(tuple(sorted(d.items())))

    def as_dict(self) -> dict[str, int]:
        return dict(self.bindings)


_NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_DOMAIN_RE = re.compile(r"domain\s+(\d+)$")
_CONST_RE = re.compile(rf"const\s+({_NAME})\s*=\s*(\d+)$")
_REL_RE = re.compile(rf"rel\s+({_NAME})\s*/\s*(\d+)\s*=\s*\{{(.*)\}}$")
_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def _parse_tuples(body: str, arity: int, lineno: int) -> list[tuple[int, ...]]:
    tuples = []
    pos = 0
    for m in _TUPLE_RE.finditer(body):
        if body[pos:m.start()].strip():
            raise StructureError(f"unexpected text {body[pos:m.start()].strip()!r} in relation body", lineno)
        pos = m.end()
        inner = m.group(1).strip()
        if inner == "":
            elems: list[str] = []
        else:
            elems = [e.strip() for e in inner.split(",")]
        if any(not e.isdigit() for e in elems):
            raise StructureError(f"malformed tuple ({inner})", lineno)
        t = tuple(int(e) for e in elems)
        if len(t) != arity:
            raise StructureError(f"arity mismatch: tuple {t} in relation of arity {arity}", lineno)
        tuples.append(t)
    if body[pos:].strip():
        raise StructureError(f"unexpected text {body[pos:].strip()!r} in relation body", lineno)
    return tuples


def parse_structure(text: str) -> FiniteStructure:
    """Parse structure-file text into a validated :class:`FiniteStructure`."""
    domain: int | None = None
    rels: dict[str, Relation] = {}
    consts: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if domain is None:
            m = _DOMAIN_RE.match(line)
            if not m:
                raise StructureError("expected 'domain N' as first declaration", lineno)
            domain = int(m.group(1))
            if domain < 1:
                raise StructureError("domain must be at least 1", lineno)
            continue
        if m := _CONST_RE.match(line):
            name, e = m.group(1), int(m.group(2))
            if name in consts or name in rels:
                raise StructureError(f"duplicate symbol {name!r}", lineno)
            if e >= domain:
                raise StructureError(f"element {e} out of range 0..{domain - 1}", lineno)
            consts[name] = e
        elif m := _REL_RE.match(line):
            name, k = m.group(1), int(m.group(2))
            if name in consts or name in rels:
                raise StructureError(f"duplicate symbol {name!r}", lineno)
            tuples = _parse_tuples(m.group(3), k, lineno)
            for t in tuples:
                for e in t:
                    if e >= domain:
                        raise StructureError(f"element {e} out of range 0..{domain - 1}", lineno)
            rels[name] = Relation.of(k, tuples)
        elif line.startswith("domain"):
            raise StructureError("duplicate domain declaration", lineno)
        else:
            raise StructureError(f"syntax error: {line!r}", lineno)
    if domain is None:
        raise StructureError("missing 'domain N' declaration")
    return FiniteStructure.build(domain, rels, consts)


def format_tuple(t: tuple[int, ...]) -> str:
    return "(" + ",".join(str(e) for e in t) + ")"


def print_structure(s: FiniteStructure) -> str:
    lines = [f"domain {s.domain_size}"]
    for name, e in s.const_interp:
        lines.append(f"const {name} = {e}")
    for name, r in s.rel_interp:
        body = " ".join(format_tuple(t) for t in r.sorted())
        lines.append(f"rel {name}/{r.arity} = {{ {body} }}" if body else f"rel {name}/{r.arity} = {{ }}")
    return "\n".join(lines) + "\n"
