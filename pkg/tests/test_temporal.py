import random

from tai.engine import iterate
from tai.fo_eval import Evaluator
from tai.formula import And, Atom, Always, Var, Eventually, Next, Not, Or, Until, ordered_free_variables
from tai.generators import FULL_FRAGMENT, random_header, random_structure, random_system
from tai.syntax import parse_formula
from tai.temporal import eval_lasso, position_sat

from conftest import TC_BODY, domain


def flip():
    s = domain(1)
    return s, iterate(s, parse_formula("[R(z)][iter R(x): !R(x)](a)").system)


def test_flip_headers():
    s, lasso = flip()
    def run(h):
        return eval_lasso(s, lasso, parse_formula(f"[{h}][iter R(x): !R(x)](q)").header, ["z"]).sorted()
    assert run("F R(z)") == [(0,)]
    assert run("G R(z)") == []
    assert run("G F R(z)") == [(0,)]
    assert run("F G R(z)") == []
    assert run("X R(z)") == [(0,)]
    assert run("X X R(z)") == []


def test_tc_union_of_stages(path):
    f = parse_formula(f"[F R(z1,z2)][iter R(x,y): {TC_BODY}](a,b)")
    lasso = iterate(path, f.system)
    assert eval_lasso(path, lasso, f.header, ["z1", "z2"]).sorted() == [(0, 1), (0, 2), (1, 2)]


def test_until_is_strong():
    s, lasso = flip()
    h = parse_formula("[R(z) U (z = z & !z = z)][iter R(x): !R(x)](q)").header
    assert eval_lasso(s, lasso, h, ["z"]).sorted() == []


def test_position_table_is_periodic():
    s, lasso = flip()
    vars, rows = position_sat(s, lasso, parse_formula("[X R(z)][iter R(x): !R(x)](q)").header)
    assert vars == ("z",) and rows[(0,)] == (True, False)


def _instance(seed):
    rng = random.Random(seed)
    s = random_structure(rng, 3)
    system = random_system(rng, "any", 2, 3)
    h = random_header(rng, {d.pred: d.arity for d in system.defs}, FULL_FRAGMENT)
    return s, system, h, ordered_free_variables(h), rng


def test_metamorphic_laws():
    for seed in range(200):
        s, system, h, hv, rng = _instance(seed)
        lasso = iterate(s, system)
        ev = Evaluator(s)
        run = lambda f, l=lasso: eval_lasso(s, l, f, hv, evaluator=ev)  # noqa: E731
        assert run(h) == run(h, lasso.unrolled())
        assert run(Not(Eventually(h))) == run(Always(Not(h)))
        assert run(Not(Next(h))) == run(Next(Not(h)))
        g = random_header(rng, {d.pred: d.arity for d in system.defs}, FULL_FRAGMENT, temporal=1)
        u = Until(h, g)
        hv2 = ordered_free_variables(u)
        assert eval_lasso(s, lasso, u, hv2, evaluator=ev) == eval_lasso(
            s, lasso, Or(g, And(h, Next(u))), hv2, evaluator=ev
        )


def _r(k):
    zs = tuple(Var(f"z{i}") for i in range(k))
    return Atom("R", zs), [z.name for z in zs]


def test_next_locality():
    """With only X the value is read from one stage; a longer prefix changes nothing."""
    for seed in range(50):
        s, system, _, _, _ = _instance(seed)
        lasso = iterate(s, system)
        r, zs = _r(system.defs[0].arity)
        h = Next(Next(r))
        value = eval_lasso(s, lasso, h, zs)
        assert value == eval_lasso(s, lasso.unrolled().unrolled(), h, zs)
        assert value == lasso.stages[lasso.position(2)][0]


def test_stage_union_identities():
    for seed in range(60):
        s, system, _, _, _ = _instance(seed)
        lasso = iterate(s, system)
        r, zs = _r(system.defs[0].arity)
        stages = [st[0].tuples for st in lasso.stages]
        loop = stages[lasso.prefix_len:]
        run = lambda h: eval_lasso(s, lasso, h, zs).tuples  # noqa: E731
        assert run(Eventually(r)) == frozenset().union(*stages)
        assert run(Always(Eventually(r))) == frozenset().union(*loop)
        assert run(Eventually(Always(r))) == frozenset.intersection(*loop)
