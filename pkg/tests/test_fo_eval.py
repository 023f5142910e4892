import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tai.fo_eval import EvaluationError, Evaluator, apply_operator, eval_fo, sat_set
from tai.formula import And, Not, Or, free_variables
from tai.generators import random_body, random_structure
from tai.structure import Relation
from tai.syntax import parse_formula

from conftest import TC_BODY, domain


def test_eval_examples(path):
    assert eval_fo(path, {}, parse_formula("E(x,y)"), {"x": 0, "y": 1})
    assert not eval_fo(path, {}, parse_formula("forall x. exists y. E(x,y)"))
    assert eval_fo(path, {}, parse_formula("x = x"), {"x": 2})


def test_sat_set_examples(path):
    assert sat_set(path, {}, parse_formula("exists y. E(x,y)"), ["x"]).sorted() == [(0,), (1,)]
    assert sat_set(path, {}, parse_formula("x = x"), ["x"]).sorted() == [(0,), (1,), (2,)]
    assert sat_set(path, {}, parse_formula("!(x = x)"), ["x"]).sorted() == []


def test_apply_operator_examples(path):
    tc = parse_formula(f"lfp[R(x,y): {TC_BODY}](a,b)").system
    (r,) = apply_operator(path, tc, [Relation.empty(2)])
    assert r.sorted() == [(0, 1), (1, 2)]
    flip = parse_formula("[R(z)][iter R(x): !R(x)](a)").system
    assert apply_operator(domain(1), flip, [Relation.empty(1)])[0].sorted() == [(0,)]


def test_apply_operator_is_synchronous():
    system = parse_formula("[A(z)][iter A(x): !B(x); B(x): A(x)](a)").system
    a, b = apply_operator(domain(1), system, {"A": Relation.empty(1), "B": Relation.empty(1)})
    assert a.sorted() == [(0,)] and b.sorted() == []


def test_errors(path):
    with pytest.raises(EvaluationError, match="unbound variable"):
        eval_fo(path, {}, parse_formula("E(x,y)"), {"x": 0})
    with pytest.raises(EvaluationError, match="unbound predicate"):
        eval_fo(path, {}, parse_formula("R(x)"), {"x": 0})
    with pytest.raises(EvaluationError, match="arity"):
        eval_fo(path, {"R": Relation.empty(2)}, parse_formula("R(x)"), {"x": 0})


def test_constants():
    from tai.structure import parse_structure

    s = parse_structure("domain 3\nconst c = 2\nrel E/2 = { (0,2) }")
    f = parse_formula("E(x,c)", s.signature)
    assert sat_set(s, {}, f, ["x"]).sorted() == [(0,)]


def _instance(seed, mode="any"):
    rng = random.Random(seed)
    s = random_structure(rng, 3)
    _, f = random_body(rng, "A", 1, mode)
    _, g = random_body(rng, "A", 1, mode)
    return s, f, g


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_negation_flips(seed):
    s, f, _ = _instance(seed)
    ev = Evaluator(s)
    for t in itertools.product(s.domain, repeat=2):
        a = dict(zip(("x", "y"), t))
        assert ev.holds(Not(f), {}, a) == (not ev.holds(f, {}, a))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_and_or_are_intersection_union(seed):
    s, f, g = _instance(seed)
    vars = ["x"]
    ev = Evaluator(s)
    sf, sg = ev.sat_set(f, {}, vars), ev.sat_set(g, {}, vars)
    assert ev.sat_set(And(f, g), {}, vars) == sf & sg
    assert ev.sat_set(Or(f, g), {}, vars) == sf | sg


def _subsets(n):
    elems = list(range(n))
    for r in range(n + 1):
        for c in itertools.combinations(elems, r):
            yield Relation.of(1, [(e,) for e in c])


@pytest.mark.parametrize("mode", ["positive", "negative"])
def test_operator_monotonicity(mode):
    for seed in range(40):
        rng = random.Random(seed)
        s = random_structure(rng, 3)
        xs, body = random_body(rng, "R", 1, mode)
        system = parse_formula("[R(z)][iter R(x): x=x](a)").system.__class__.single("R", xs, body)
        ev = Evaluator(s)
        image = {p: ev.apply_operator(system, [p])[0] for p in _subsets(s.domain_size)}
        for p, q in itertools.product(image, repeat=2):
            if p <= q:
                if mode == "positive":
                    assert image[p] <= image[q]
                else:
                    assert image[q] <= image[p]


def test_nested_iteration_reads_ambient_relation(path):
    # inner iteration uses the outer stage of R as a rigid relation
    q = "[F R(z)][iter R(x): E(x,x) | [F Q(w)][iter Q(u): exists v.(E(v,u) & (R(v) | v = v))](x)](a)"
    f = parse_formula(q)
    assert free_variables(f) == {"a"}
    assert Evaluator(path).sat_set(f, {}, ["a"]).sorted() == [(1,), (2,)]
