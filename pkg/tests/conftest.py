import pytest

from tai.fo_eval import Evaluator
from tai.structure import parse_structure
from tai.syntax import parse_formula

PATH_TEXT = "domain 3\nrel E/2 = { (0,1) (1,2) }\n"
TC_BODY = "E(x,y) | exists z.(E(x,z) & R(z,y))"


@pytest.fixture
def path():
    return parse_structure(PATH_TEXT)


def domain(n: int):
    return parse_structure(f"domain {n}\nrel E/2 = {{ }}\n")


def sat(s, query: str, vars):
    f = parse_formula(query, allow_reserved=True)
    return Evaluator(s).sat_set(f, {}, list(vars)).sorted()
