from fractions import Fraction

import pytest

from hallscatter.qtorus import dilog_wall_function
from hallscatter.quiver import A2, A3, KRONECKER, QuiverError, parse_quiver
from hallscatter.scatter import (
    NonGeneralPoint,
    ScatterError,
    build_initial_quantum,
    consistency_check,
    diagram_to_json,
    equivalent,
    loop_product,
    pipeline,
    rank2_direct,
    wall_function_at,
)
from hallscatter.verify import expected_a2_diagram


def test_parse_quiver_roundtrip():
    q = parse_quiver('{"vertices": 3, "arrows": [[1, 2], [3, 2]]}')
    assert q == A3


@pytest.mark.parametrize(
    "text",
    ['{"arrows": []}', '{"vertices": 2, "arrows": [[1]]}', '{"vertices": 2, "arrows": [[1, 3]]}', "not json"],
)
def test_parse_quiver_rejects(text):
    with pytest.raises(QuiverError):
        parse_quiver(text)


def test_expected_pentagon_is_consistent():
    # hand-written three-wall diagram; loops around the origin must close up
    d = expected_a2_diagram(6)
    square = [(Fraction(1), Fraction(1, 3)), (Fraction(-1, 5), Fraction(1)), (Fraction(-1), Fraction(-2, 7)), (Fraction(1, 9), Fraction(-1))]
    assert loop_product(d, square) == d.coeff.one()


def test_two_walls_alone_are_inconsistent():
    d = expected_a2_diagram(4)
    d.walls = d.walls[:2]
    square = [(Fraction(1), Fraction(1, 3)), (Fraction(-1, 5), Fraction(1)), (Fraction(-1), Fraction(-2, 7)), (Fraction(1, 9), Fraction(-1))]
    assert loop_product(d, square) != d.coeff.one()


def test_a2_pipeline_small_order():
    d = build_initial_quantum(A2, 5)
    full, specialized = pipeline(d, seed=4)
    assert len(specialized.walls) == 3
    assert equivalent(specialized, expected_a2_diagram(5), seed=1)["equivalent"]
    assert consistency_check(specialized, loops=10, seed=1)["consistent"]
    assert len(full.walls) > len(specialized.walls)


def test_pipeline_seed_independence_a3():
    d = build_initial_quantum(A3, 4)
    _, s1 = pipeline(d, seed=1)
    _, s2 = pipeline(d, seed=9)
    assert equivalent(s1, s2, seed=3)["equivalent"]
    assert consistency_check(s1, loops=20, seed=2)["consistent"]


def test_pipeline_deterministic():
    d = build_initial_quantum(A2, 4)
    a = diagram_to_json(pipeline(d, seed=5)[0])
    b = diagram_to_json(pipeline(d, seed=5)[0])
    assert a == b


def test_subset_scheme_agrees():
    d = build_initial_quantum(KRONECKER, 4)
    _, copy = pipeline(d, seed=2)
    _, subset = pipeline(d, seed=2, scheme="subset")
    assert equivalent(copy, subset, seed=1)["equivalent"]


def test_kronecker_matches_rank2_oracle():
    d = build_initial_quantum(KRONECKER, 5)
    _, specialized = pipeline(d, seed=3)
    assert equivalent(specialized, rank2_direct(d), seed=1)["equivalent"]


def test_wall_function_on_initial_wall():
    d = build_initial_quantum(A2, 4)
    g = wall_function_at(d, (0, Fraction(3, 7)))
    assert g == dilog_wall_function(d.coeff, (1, 0))


def test_origin_is_not_general():
    d = build_initial_quantum(A2, 3)
    with pytest.raises(NonGeneralPoint):
        wall_function_at(d, (0, 0))


def test_rank2_oracle_needs_rank2():
    with pytest.raises(ScatterError):
        rank2_direct(build_initial_quantum(A3, 2))
