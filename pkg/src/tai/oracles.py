"""Reference semantics computed directly from the operator, without headers or lassos."""

from __future__ import annotations

import itertools
from collections import deque

from .fo_eval import Evaluator
from .formula import Definition, IterationSystem
from .structure import FiniteStructure, Relation


def reachability(s: FiniteStructure, edge: str = "E") -> set[tuple[int, int]]:
    """Pairs ``(a, b)`` joined by a directed path of length at least one (breadth-first search)."""
    succ: dict[int, list[int]] = {a: [] for a in s.domain}
    for a, b in s.relations[edge].tuples:
        succ[a].append(b)
    out = set()
    for a in s.domain:
        seen = set()
        queue = deque(succ[a])
        while queue:
            b = queue.popleft()
            if b in seen:
                continue
            seen.add(b)
            queue.extend(succ[b])
        out |= {(a, b) for b in seen}
    return out


class Operator:
    """The one-step operator of a single definition, applied to explicit relations."""

    def __init__(self, s: FiniteStructure, d: Definition):
        self.s = s
        self.d = d
        self.system = IterationSystem((d,))
        self.ev = Evaluator(s)

    def __call__(self, r: frozenset) -> frozenset:
        (out,) = self.ev.apply_operator(self.system, (Relation(self.d.arity, r),))
        return out.tuples

    @property
    def full(self) -> frozenset:
        return frozenset(itertools.product(self.s.domain, repeat=self.d.arity))


def stages(op: Operator) -> tuple[list[frozenset], int]:
    """Stage list from the empty relation up to the first repeat, and the index the repeat returns to."""
    seq = [frozenset()]
    index = {frozenset(): 0}
    while True:
        nxt = op(seq[-1])
        if nxt in index:
            return seq, index[nxt]
        index[nxt] = len(seq)
        seq.append(nxt)


def knaster_tarski(op: Operator) -> frozenset:
    """Least fixed point of a monotone operator, iterated from the empty relation."""
    x: frozenset = frozenset()
    while (y := op(x)) != x:
        x = y
    return x


def inflationary(op: Operator) -> frozenset:
    x: frozenset = frozenset()
    while (y := x | op(x)) != x:
        x = y
    return x


def partial(op: Operator) -> frozenset:
    seq, start = stages(op)
    return seq[-1] if start == len(seq) - 1 else frozenset()


def loop_intersection(op: Operator) -> frozenset:
    seq, start = stages(op)
    return frozenset.intersection(*seq[start:])


def loop_union(op: Operator) -> frozenset:
    seq, start = stages(op)
    return frozenset().union(*seq[start:])


def stage_union(op: Operator) -> frozenset:
    return frozenset().union(*stages(op)[0])


def squared_least(op: Operator) -> frozenset:
    """Least fixed point of the twice-applied operator, from the empty relation."""
    x: frozenset = frozenset()
    while (y := op(op(x))) != x:
        x = y
    return x


def squared_greatest(op: Operator) -> frozenset:
    """Greatest fixed point of the twice-applied operator, from the full relation."""
    x = op.full
    while (y := op(op(x))) != x:
        x = y
    return x
