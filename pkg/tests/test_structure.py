import itertools
import random

import pytest

from tai.generators import random_structure
from tai.structure import (
    Assignment,
    FiniteStructure,
    Relation,
    Signature,
    StructureError,
    parse_structure,
    print_structure,
)


def test_parse_path(path):
    assert path.domain_size == 3
    assert path.relations["E"] == Relation.of(2, [(0, 1), (1, 2)])


def test_parse_empty_relation():
    s = parse_structure("domain 1\nrel P/1 = { }")
    assert s.relations["P"].tuples == frozenset()
    assert "{ }" in print_structure(s)


def test_out_of_range_element():
    with pytest.raises(StructureError, match="5"):
        parse_structure("domain 2\nrel E/2 = { (0,5) }")


def test_constants_and_comments():
    s = parse_structure("# header\ndomain 2\nconst a = 0  # first\nrel P/0 = { () }\n")
    assert s.constants == {"a": 0}
    assert s.relations["P"].tuples == {()}
    assert "const a = 0" in print_structure(s)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("domain 0", "domain"),
        ("rel E/2 = { }", "domain"),
        ("domain 2\nrel E/2 = { (0) }", "arity"),
        ("domain 2\nrel E/1 = { }\nrel E/1 = { }", "duplicate"),
        ("domain 2\nconst a = 0\nrel a/1 = { }", "duplicate"),
        ("domain 2\nconst a = 2", "range"),
        ("domain 2\nfoo", "line 2"),
    ],
)
def test_structure_errors(text, fragment):
    with pytest.raises(StructureError) as e:
        parse_structure(text)
    assert fragment in str(e.value).lower()


def test_syntax_error_reports_line():
    with pytest.raises(StructureError) as e:
        parse_structure("domain 2\nrel E/2 = { (0,1 }")
    assert e.value.line == 2


def test_round_trip_path(path):
    assert parse_structure(print_structure(path)) == path


def test_relation_equality_ignores_order():
    assert Relation.of(2, [(1, 2), (0, 1)]) == Relation.of(2, [(0, 1), (1, 2), (0, 1)])


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_validation_rejects_out_of_range_exhaustively(k):
    n = 2
    for t in itertools.product(range(n + 1), repeat=k):
        bad = any(e >= n for e in t)
        build = lambda: FiniteStructure.build(n, {"P": Relation.of(k, [t])})  # noqa: E731
        if bad:
            with pytest.raises(StructureError):
                build()
        else:
            assert t in build().relations["P"]


def test_signature_rejects_duplicates():
    with pytest.raises(StructureError):
        Signature((("E", 2), ("E", 1)), ())


def test_assignment():
    assert Assignment.of(x=1).as_dict() == {"x": 1}


def test_round_trip_random_structures():
    for i in range(200):
        s = random_structure(random.Random(i), 5, constants=("c",))
        assert parse_structure(print_structure(s)) == s
