"""Stage iteration, lasso detection, ranks and stage comparison."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence, TypeVar

from .formula import IterationSystem, Polarity, PolarityError, polarity
from .structure import FiniteStructure, Relation

DEFAULT_MAX_STEPS = 10_000
INFINITY = math.inf

S = TypeVar("S", bound=Hashable)


class StepLimitExceeded(RuntimeError):
    """No repeated stage within the step budget.

    Over a finite structure a repetition always exists; this only means the
    budget was too small for the instance.
    """


def find_lasso(step: Callable[[S], S], initial: S, max_steps: int) -> tuple[list[S], int, int]:
    """Iterate ``step`` from ``initial`` until a stage repeats.

    Returns ``(stages, prefix_len, loop_len)`` where ``stages`` holds the
    pairwise distinct stages and ``step(stages[-1]) == stages[prefix_len]``.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    seen: dict[S, int] = {initial: 0}
    stages = [initial]
    for _ in range(max_steps):
        nxt = step(stages[-1])
        if nxt in seen:
            p = seen[nxt]
            return stages, p, len(stages) - p
        seen[nxt] = len(stages)
        stages.append(nxt)
    raise StepLimitExceeded(f"no repeated stage within {max_steps} steps")


@dataclass(frozen=True)
class Lasso:
    """Stage sequence ``stages[0..p+l-1]`` followed by the loop ``stages[p..]`` forever."""

    preds: tuple[str, ...]
    stages: tuple[tuple[Relation, ...], ...]
    prefix_len: int
    loop_len: int

    def __post_init__(self):
        if self.loop_len < 1 or self.prefix_len < 0 or self.prefix_len + self.loop_len != len(self.stages):
            raise ValueError("inconsistent lasso shape")

    def __len__(self) -> int:
        return len(self.stages)

    def successor(self, i: int) -> int:
        return i + 1 if i + 1 < len(self.stages) else self.prefix_len

    def position(self, n: int) -> int:
        """Index of the stored stage equal to stage ``n`` of the infinite sequence."""
        if n < len(self.stages):
            return n
        return self.prefix_len + (n - self.prefix_len) % self.loop_len

    def env_at(self, i: int) -> dict[str, Relation]:
        return dict(zip(self.preds, self.stages[i]))

    def relation(self, pred: str, i: int) -> Relation:
        return self.stages[i][self.preds.index(pred)]

    @property
    def loop(self) -> tuple[tuple[Relation, ...], ...]:
        return self.stages[self.prefix_len:]

    def unrolled(self) -> Lasso:
        """The same infinite sequence with the loop rolled once into the prefix."""
        return Lasso(self.preds, self.stages + self.loop, self.prefix_len + self.loop_len, self.loop_len)


def iterate(
    s: FiniteStructure,
    system: IterationSystem,
    max_steps: int = DEFAULT_MAX_STEPS,
    *,
    env: Mapping[str, Relation] | None = None,
    assignment: Mapping[str, int] | None = None,
    evaluator=None,
) -> Lasso:
    """Compute the stage sequence of ``system`` from all-empty relations."""
    from .fo_eval import Evaluator

    ev = evaluator or Evaluator(s, max_steps=max_steps)
    env = dict(env or {})
    a = dict(assignment or {})
    start = tuple(Relation.empty(d.arity) for d in system.defs)

    def step(stage):
        return ev.apply_operator(system, stage, env, a)

    stages, p, l = find_lasso(step, start, max_steps)
    return Lasso(system.preds, tuple(stages), p, l)


@dataclass(frozen=True)
class RankTable:
    """Rank of every tuple of ``M^k``: the first stage containing it, or infinity."""

    arity: int
    ranks: tuple[tuple[tuple[int, ...], float], ...]
    max_finite_rank: int
    first_stage_only: bool = False

    def rank(self, t: Sequence[int]) -> float:
        return dict(self.ranks)[tuple(t)]

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(self.ranks)

    def _eligible(self, r: float) -> bool:
        # literal reading: both tuples in Phi(empty), i.e. rank 1
        if self.first_stage_only:
            return r == 1
        return r != INFINITY


def rank_table(
    s: FiniteStructure,
    system: IterationSystem,
    max_steps: int = DEFAULT_MAX_STEPS,
    *,
    first_stage_only: bool = False,
    evaluator=None,
) -> RankTable:
    if len(system.defs) != 1:
        raise PolarityError("rank tables are defined for single-definition systems")
    d = system.defs[0]
    if polarity(d.body, d.pred) not in (Polarity.POSITIVE, Polarity.ABSENT):
        raise PolarityError(f"body of {d.pred} is not positive in {d.pred}")
    lasso = iterate(s, system, max_steps, evaluator=evaluator)
    ranks: dict[tuple[int, ...], float] = {
        t: INFINITY for t in itertools.product(range(s.domain_size), repeat=d.arity)
    }
    for i, (stage,) in enumerate(lasso.stages):
        for t in stage.tuples:
            if ranks[t] == INFINITY:
                ranks[t] = i
    finite = [r for r in ranks.values() if r != INFINITY]
    return RankTable(d.arity, tuple(sorted(ranks.items())), int(max(finite, default=0)), first_stage_only)


def stage_leq(rt: RankTable, a: Sequence[int], b: Sequence[int]) -> bool:
    ra, rb = rt.rank(a), rt.rank(b)
    return rt._eligible(ra) and rt._eligible(rb) and ra <= rb


def stage_next(rt: RankTable, a: Sequence[int], b: Sequence[int]) -> bool:
    """``b`` represents the stage after the one ``a`` represents.

    At the last stage the successor is the stage itself.
    """
    ra, rb = rt.rank(a), rt.rank(b)
    if ra == INFINITY or rb == INFINITY:
        return False
    return rb == ra + 1 or (ra == rt.max_finite_rank and rb == ra)
