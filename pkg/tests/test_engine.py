import itertools
import random

import pytest

from tai.engine import (
    INFINITY,
    StepLimitExceeded,
    find_lasso,
    iterate,
    rank_table,
    stage_leq,
    stage_next,
)
from tai.formula import IterationSystem, PolarityError
from tai.generators import random_body, random_structure
from tai.structure import Relation
from tai.syntax import parse_formula

from conftest import TC_BODY, domain


def system(body, vars="x,y"):
    return parse_formula(f"[F R({vars})][iter R({vars}): {body}]({vars})").system


def stages(lasso):
    return [st[0].sorted() for st in lasso.stages]


def test_tc_lasso(path):
    lasso = iterate(path, system(TC_BODY))
    assert stages(lasso) == [[], [(0, 1), (1, 2)], [(0, 1), (0, 2), (1, 2)]]
    assert (lasso.prefix_len, lasso.loop_len) == (2, 1)


def test_flip_lasso():
    lasso = iterate(domain(1), system("!R(x)", "x"))
    assert stages(lasso) == [[], [(0,)]]
    assert (lasso.prefix_len, lasso.loop_len) == (0, 2)


def test_identity_operator_has_empty_fixpoint():
    lasso = iterate(domain(2), system("R(x)", "x"))
    assert stages(lasso) == [[]]
    assert (lasso.prefix_len, lasso.loop_len) == (0, 1)


def test_step_limit():
    with pytest.raises(StepLimitExceeded):
        iterate(domain(1), system("!R(x)", "x"), max_steps=1)


def test_find_lasso_generic():
    stages_, p, l = find_lasso(lambda i: (i + 1) % 5 if i < 5 else 2, 7, 100)
    assert stages_[0] == 7 and (p, l) == (1, 5)


def test_lasso_successor_and_unrolled():
    lasso = iterate(domain(1), system("!R(x)", "x"))
    assert [lasso.successor(i) for i in range(2)] == [1, 0]
    u = lasso.unrolled()
    assert len(u) == 4 and u.prefix_len == 2 and u.loop_len == 2
    assert [u.position(n) for n in range(6)] == [0, 1, 2, 3, 2, 3]


def test_ranks(path):
    rt = rank_table(path, system(TC_BODY))
    assert rt.rank((0, 1)) == 1 and rt.rank((1, 2)) == 1 and rt.rank((0, 2)) == 2
    assert rt.rank((2, 0)) == INFINITY
    assert rt.max_finite_rank == 2
    full = rank_table(path, system("x = x", "x"))
    assert all(r == 1 for _, r in full.ranks)


def test_rank_requires_positive(path):
    with pytest.raises(PolarityError):
        rank_table(path, system("!R(x)", "x"))


def test_stage_comparison(path):
    rt = rank_table(path, system(TC_BODY))
    assert stage_leq(rt, (0, 1), (0, 2))
    assert not stage_leq(rt, (0, 2), (0, 1))
    assert not stage_leq(rt, (2, 0), (0, 1))
    assert stage_next(rt, (0, 1), (0, 2))
    assert stage_next(rt, (0, 2), (0, 2))
    assert not stage_next(rt, (0, 1), (1, 2))


def test_first_stage_only_reading(path):
    rt = rank_table(path, system(TC_BODY), first_stage_only=True)
    assert stage_leq(rt, (0, 1), (1, 2))
    assert not stage_leq(rt, (0, 1), (0, 2))


def _random_case(seed, mode):
    rng = random.Random(seed)
    s = random_structure(rng, 3)
    k = rng.randint(1, 2)
    xs, body = random_body(rng, "R", k, mode)
    return s, IterationSystem.single("R", xs, body), k


def test_positive_bodies_increase_and_converge():
    for seed in range(100):
        s, sys_, k = _random_case(seed, "positive")
        lasso = iterate(s, sys_)
        assert lasso.loop_len == 1
        assert len(lasso) <= s.domain_size**k + 1
        for a, b in zip(lasso.stages, lasso.stages[1:]):
            assert a[0] <= b[0]


def test_negative_bodies_oscillate_with_period_at_most_two():
    for seed in range(100):
        s, sys_, _ = _random_case(seed, "negative")
        assert iterate(s, sys_).loop_len in (1, 2)


def test_inflationary_wrapping_converges():
    from tai.formula import Atom, Definition, Or, Var

    for seed in range(60):
        s, sys_, _ = _random_case(seed, "any")
        d = sys_.defs[0]
        wrapped = IterationSystem((Definition("R", d.vars, Or(Atom("R", tuple(map(Var, d.vars))), d.body)),))
        lasso = iterate(s, wrapped)
        assert lasso.loop_len == 1
        for a, b in zip(lasso.stages, lasso.stages[1:]):
            assert a[0] <= b[0]


def test_rank_matches_stage_differences():
    for seed in range(60):
        s, sys_, k = _random_case(seed, "positive")
        lasso = iterate(s, sys_)
        rt = rank_table(s, sys_)
        for t in itertools.product(s.domain, repeat=k):
            r = rt.rank(t)
            if r == INFINITY:
                assert all(t not in st[0] for st in lasso.stages)
            else:
                assert t in lasso.stages[r][0] and t not in lasso.stages[r - 1][0]


def test_iterate_is_deterministic():
    for seed in range(20):
        s, sys_, _ = _random_case(seed, "any")
        assert iterate(s, sys_) == iterate(s, sys_)


def test_system_env_parameters(path):
    # a body parameter is fixed by the assignment
    sys_ = parse_formula("[F R(z)][iter R(x): E(p,x) | exists v.(R(v) & E(v,x))](a)").system
    lasso = iterate(path, sys_, assignment={"p": 0})
    assert lasso.stages[-1][0] == Relation.of(1, [(1,), (2,)])
