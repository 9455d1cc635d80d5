import random
from dataclasses import replace
from fractions import Fraction

import pytest

from hallscatter.hall import HallAlgebra, HallPrincipal
from hallscatter.quiver import A2, A3
from hallscatter.scatter import build_initial_quantum, pipeline, random_general_points
from hallscatter.theta import (
    COUNTER_M,
    COUNTER_THETA1,
    COUNTER_THETA2,
    HallAction,
    PrincipalLattice,
    QuantumAction,
    ThetaError,
    counterexample_driver,
    cps_check,
    enumerate_broken_lines,
    hall_first_order_diagram,
    in_slice,
    nudge,
    theta_function,
)


@pytest.fixture(scope="module")
def a2_setup():
    d = build_initial_quantum(A2, 4)
    _, specialized = pipeline(d, seed=1)
    return specialized, QuantumAction(PrincipalLattice(d.b), 4)


def test_principal_form_and_map():
    lat = PrincipalLattice(build_initial_quantum(A3, 1).b)
    n1, m1, n2, m2 = (1, 0, 0), (0, 1, 0), (0, 1, 1), (1, 0, -1)
    expected = lat.pairing(n1 + m1, n2 + m2)
    b = build_initial_quantum(A3, 1).b
    bnn = sum(n1[i] * b[i][j] * n2[j] for i in range(3) for j in range(3))
    dot = lambda u, v: sum(x * y for x, y in zip(u, v))  # noqa: E731
    assert expected == bnn - dot(n1, m2) + dot(n2, m1)


def test_unbroken_line_without_walls(a2_setup):
    d, act = a2_setup
    lam = (0, 0, 1, 1)
    lines = enumerate_broken_lines(replace(d, walls=[]), act, lam, (Fraction(5), Fraction(7)))
    assert len(lines) == 1 and not lines[0].bends
    assert lines[0].element == act.monomial(lam)


def test_theta_truncation_monotone():
    d4 = build_initial_quantum(A2, 4)
    d5 = build_initial_quantum(A2, 5)
    _, s4 = pipeline(d4, seed=1)
    _, s5 = pipeline(d5, seed=1)
    a4 = QuantumAction(PrincipalLattice(d4.b), 4)
    a5 = QuantumAction(PrincipalLattice(d5.b), 5)
    lam = (0, 0, 1, -1)
    q = (Fraction(-1, 7), Fraction(3, 11))
    t4 = theta_function(s4, a4, lam, q)
    t5 = theta_function(s5, a5, lam, q)
    assert t4.terms == {n: c for n, c in t5.terms.items() if sum(n[:2]) <= 4}


def test_endpoint_independence_in_chamber(a2_setup):
    d, act = a2_setup
    lam = (0, 0, -1, 1)
    base = (Fraction(1, 3), Fraction(-1, 5))
    ref = theta_function(d, act, lam, base)
    rng = random.Random(0)
    for _ in range(5):
        assert theta_function(d, act, lam, nudge(d, base, rng)) == ref


@pytest.mark.parametrize("quiver", [A2, A3])
def test_quantum_cps_small(quiver):
    d = build_initial_quantum(quiver, 4)
    _, specialized = pipeline(d, seed=2)
    act = QuantumAction(PrincipalLattice(d.b), 4)
    rng = random.Random(4)
    r = quiver.vertex_count
    for i in range(4):
        m = tuple(rng.randint(-2, 2) for _ in range(r))
        if not any(m):
            m = (1,) + m[1:]
        q1, q2 = (tuple(x / 50 for x in p) for p in random_general_points(r, rng, 2))
        assert cps_check(specialized, act, (0,) * r + m, q1, q2, seed=i)["holds"]


def test_hall_lines_stay_in_slice():
    hall = HallAlgebra(A3, order=3)
    d = hall_first_order_diagram(hall)
    act = HallAction(HallPrincipal(hall))
    lat = PrincipalLattice(d.b)
    for th in (COUNTER_THETA1, COUNTER_THETA2):
        for line in enumerate_broken_lines(d, act, (0, 0, 0) + COUNTER_M, th):
            assert in_slice(lat, th, [b.point for b in line.bends])


def test_hall_lines_need_zero_n_part():
    hall = HallAlgebra(A3, order=2)
    with pytest.raises(ThetaError):
        HallAction(HallPrincipal(hall)).monomial((1, 0, 0, 0, 0, 0))


def test_counterexample_standard_pairing():
    rep = counterexample_driver(sign=1)
    assert rep["ok"]
    assert all(rep["steps"].values())
    assert rep["residual_k123_00_coefficient"] != "0"
    assert rep["integral_of_difference"] == []


def test_counterexample_flipped_residual_survives():
    rep = counterexample_driver(sign=-1)
    assert rep["residual_k123_00_coefficient"] != "0"
    # only the standard pairing is compatible with integration
    assert not rep["steps"]["g"]
