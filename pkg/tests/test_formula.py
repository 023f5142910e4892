import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tai.fo_eval import Evaluator
from tai.formula import (
    Always,
    And,
    Atom,
    Const,
    Derived,
    Equal,
    Eventually,
    Exists,
    Implies,
    Iter,
    Kind,
    NameSupply,
    Not,
    Or,
    Polarity,
    Until,
    Var,
    free_variables,
    ordered_free_variables,
    polarity,
    subst_pred,
    subst_vars,
)
from tai.generators import random_body, random_formula, random_structure
from tai.structure import Signature
from tai.syntax import ParseError, SignatureError, parse_formula, print_formula

from conftest import TC_BODY


def test_parse_tc_body():
    f = parse_formula(TC_BODY)
    assert isinstance(f, Or)
    assert f.left == Atom("E", (Var("x"), Var("y")))
    assert isinstance(f.right, Exists) and isinstance(f.right.body, And)


def test_parse_iteration_with_constant():
    f = parse_formula("[F R(z)][iter R(x): !R(x)](c)", constants=["c"])
    assert isinstance(f, Iter)
    assert f.header == Eventually(Atom("R", (Var("z"),)))
    assert f.system.defs[0].body == Not(Atom("R", (Var("x"),)))
    assert f.args == (Const("c"),)


def test_temporal_outside_header_rejected():
    with pytest.raises(ParseError, match="temporal"):
        parse_formula("F R(z) & E(x,y)")


def test_syntax_error_position():
    with pytest.raises(ParseError, match="1:15"):
        parse_formula("exists x. E(x,")


def test_precedence():
    f = parse_formula("[P(z) | Q(z) & S(z) U T(z)][iter P(x): x=x; Q(x): x=x; S(x): x=x; T(x): x=x](a)")
    h = f.header
    # U binds between & and |
    assert isinstance(h, Or) and isinstance(h.right, Until) and isinstance(h.right.left, And)
    g = parse_formula("E(x,y) -> E(y,x) -> x = y")
    assert print_formula(g) == "E(x,y) -> E(y,x) -> x = y"
    assert isinstance(g.right, Implies)


def test_quantifier_scope_extends_right():
    f = parse_formula("exists x. E(x,y) & E(y,x)")
    assert isinstance(f, Exists) and isinstance(f.body, And)


def test_print_derived_and_round_trip():
    f = parse_formula(f"lfp[R(x,y): {TC_BODY}](a,b)")
    text = print_formula(f)
    assert text.startswith("lfp[")
    assert parse_formula(text) == f
    assert parse_formula(print_formula(parse_formula(TC_BODY))) == parse_formula(TC_BODY)


def test_nested_iteration_round_trip():
    text = "[F R(z)][iter R(x): [G Q(w)][iter Q(u): E(u,x) & !Q(u)](x)](a)"
    f = parse_formula(text)
    assert parse_formula(print_formula(f)) == f


def test_header_arity_checked():
    with pytest.raises(ParseError, match="argument"):
        parse_formula("[F R(z1,z2)][iter R(x,y): E(x,y)](a)")


def test_signature_checks():
    sig = Signature((("E", 2),), ("c",))
    assert parse_formula("E(c,x)", sig) == Atom("E", (Const("c"), Var("x")))
    # bound occurrence shadows the constant
    assert parse_formula("exists c. E(c,x)", sig) == Exists("c", Atom("E", (Var("c"), Var("x"))))
    with pytest.raises(SignatureError):
        parse_formula("E(x)", sig)
    with pytest.raises(SignatureError):
        parse_formula("P(x)", sig)
    with pytest.raises(SignatureError):
        parse_formula("lfp[E(x,y): E(x,y)](a,b)", sig)


def test_reserved_prefix():
    with pytest.raises(ParseError, match="reserved"):
        parse_formula("exists __v. E(__v,x)")
    assert parse_formula("exists __v. E(__v,x)", allow_reserved=True)


def test_keywords_are_not_names():
    with pytest.raises(ParseError):
        parse_formula("exists F. E(F,x)")
    # derived kinds are keywords only before '['
    assert parse_formula("lfp(x)") == Atom("lfp", (Var("x"),))


def test_free_variables_examples():
    assert free_variables(parse_formula("E(x,y)")) == {"x", "y"}
    assert free_variables(parse_formula("[F R(z)][iter R(x): !R(x)](y)")) == {"y"}
    assert free_variables(parse_formula("exists x. E(x,y)")) == {"y"}
    # body parameters are free
    assert free_variables(parse_formula("[F R(z)][iter R(x): E(x,p)](y)")) == {"p", "y"}


def test_header_variables_first_occurrence_order():
    f = parse_formula("[F R(z2,z1)][iter R(x,y): E(x,y)](a,b)")
    assert f.header_vars == ("z2", "z1")
    assert ordered_free_variables(parse_formula("E(y,x) & E(x,w)")) == ["y", "x", "w"]


def test_free_variables_brute_force_oracle():
    """A variable is free iff renaming it can change the truth value somewhere."""
    rng = random.Random(3)
    for _ in range(60):
        xs, body = random_body(rng, "A", 1, "any")
        f = body
        fv = free_variables(f)
        for s in [random_structure(random.Random(k), 3) for k in range(3)]:
            ev = Evaluator(s)
            env = {}
            for v in ("x", "y"):
                if v in fv:
                    continue
                # non-free variables never matter
                for a in range(s.domain_size):
                    base = {w: 0 for w in fv}
                    assert ev.holds(f, env, {**base, v: a}) == ev.holds(f, env, base)


@pytest.mark.parametrize(
    "body, pol",
    [
        (TC_BODY, Polarity.POSITIVE),
        ("!R(x)", Polarity.NEGATIVE),
        ("R(x) & !R(x)", Polarity.MIXED),
        ("E(x,y)", Polarity.ABSENT),
        ("R(x) -> E(x,x)", Polarity.NEGATIVE),
        ("R(x) <-> E(x,x)", Polarity.MIXED),
        ("!!R(x)", Polarity.POSITIVE),
        ("lfp[Q(y): R(y) | Q(y)](x)", Polarity.POSITIVE),
        ("!lfp[Q(y): R(y) | Q(y)](x)", Polarity.NEGATIVE),
        ("pfp[Q(y): R(y) | Q(y)](x)", Polarity.MIXED),
    ],
)
def test_polarity(body, pol):
    assert polarity(parse_formula(body), "R") is pol


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_polarity_of_negation_is_dual(seed):
    _, body = random_body(random.Random(seed), "R", 1, "any")
    p = polarity(body, "R")
    assert polarity(Not(body), "R") is p.dual()
    assert polarity(Not(Not(body)), "R") is p


def test_subst_vars_avoids_capture():
    f = parse_formula("exists y. E(x,y)")
    supply = NameSupply.for_formula(f)
    g = subst_vars(f, {"x": Var("y")}, supply)
    assert free_variables(g) == {"y"}
    assert isinstance(g, Exists) and g.var != "y"


def test_subst_pred_avoids_capture_and_shadowing():
    f = parse_formula("exists p. R(p) & lfp[R(x): R(x)](p)")
    supply = NameSupply.for_formula(f)
    g = subst_pred(f, "R", lambda args: Atom("E", (args[0], Var("p"))), supply, {"p"})
    # the binder was renamed, the free p of the template survives, the shadowing lfp is untouched
    assert "p" in free_variables(g)
    assert isinstance(g.body.right, Derived) and g.body.right.pred == "R"


def test_fresh_names_use_reserved_prefix():
    supply = NameSupply({"__v1"})
    assert supply.fresh("v") == "__v2"
    assert supply.fresh("x").startswith("__")


def test_derived_requires_matching_arity():
    with pytest.raises(Exception):
        Derived.single(Kind.LFP, "R", ("x",), Equal(Var("x"), Var("x")), (Var("a"), Var("b")))


def test_print_parse_identity_on_generated_formulas():
    for i in range(1000):
        f = random_formula(random.Random(i))
        assert parse_formula(print_formula(f)) == f, i


def test_always_prints_prefix():
    f = Iter(Always(Atom("R", (Var("z"),))), parse_formula("[R(z)][iter R(x): E(x,x)](a)").system, (Var("a"),))
    assert print_formula(f) == "[G R(z)][iter R(x): E(x,x)](a)"
