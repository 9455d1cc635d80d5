import random
from fractions import Fraction

import pytest

from hallscatter.quiver import A2, A3
from hallscatter.scalar import ONE, Q, T_MINUS_TINV, r_prime
from hallscatter.scatter import asymptotic_tagged, build_initial_quantum, pipeline, wall_function_at
from hallscatter.tropical import (
    WeightVector,
    check_disk,
    classical_mult,
    disk_mult,
    disks_at,
    extract_disk,
    n_theta,
    quantum_leaf,
    ribbon_mults,
    ribbons,
)
from hallscatter.verify import find_two_by_two_ribbon, q_minus_one_exponent


@pytest.fixture(scope="module")
def a2_full():
    return pipeline(build_initial_quantum(A2, 4), seed=1)


def test_weight_vector_aut():
    ww = WeightVector.from_leaves([(0, 1), (0, 1), (1, 2), (1, 1)])
    assert ww.aut_order() == 2
    assert ww.n(2) == (2, 3)
    assert WeightVector.from_leaves([(0, 1)] * 3).aut_order() == 6


def test_simplest_disk_value(a2_full):
    full, _ = a2_full
    alg = full.coeff
    w = next(w for w in full.walls if tuple(w.degree) == (1, 1) and w.parents is not None)
    tau = extract_disk(full, w)
    # [R'_1 z^e1, R'_1 z^e2] = R'_1^2 (t - 1/t) z^(1,1) = R'_1 z^(1,1)
    assert disk_mult(tau, quantum_leaf(alg)) == alg.monomial((1, 1), r_prime(1))
    assert r_prime(1) * r_prime(1) * T_MINUS_TINV == r_prime(1)
    assert classical_mult(tau, "dilog") == 1


def test_every_disk_balanced_and_ribbons_sum(a2_full):
    full, _ = a2_full
    leaf = quantum_leaf(full.coeff)
    for w in full.walls:
        tau = extract_disk(full, w)
        assert all(check_disk(tau).values())
        total = full.coeff.zero()
        for _, v in ribbon_mults(tau, leaf):
            total = total + v
        assert total == disk_mult(tau, leaf)
        assert len(ribbons(tau)) == 2 ** tau.vertex_count()


def test_n_theta_equals_wall_function(a2_full):
    full, specialized = a2_full
    asym = asymptotic_tagged(full)
    for x in ((Fraction(1, 3), Fraction(-1, 3)), (Fraction(0), Fraction(2, 5)), (Fraction(3, 7), Fraction(1, 9))):
        assert n_theta(full, x, asym=asym) == wall_function_at(specialized, x)
        assert n_theta(full, x, method="ribbon", asym=asym) == n_theta(full, x, method="bracket", asym=asym)


def test_a3_disks_at_point():
    d = build_initial_quantum(A3, 3)
    full, specialized = pipeline(d, seed=2)
    rng = random.Random(0)
    for w in specialized.walls:
        x = w.support.random_relint_point(rng)
        items = disks_at(full, x)
        assert items
        assert n_theta(full, x) == wall_function_at(specialized, x)


def test_two_by_two_ribbon_routes():
    from hallscatter.hall import HallAlgebra
    from hallscatter.tropical import flag_form

    full, tau, rib = find_two_by_two_ribbon()
    assert rib is not None and rib.nu == -1
    res = flag_form(rib, HallAlgebra(A2, order=4), full.coeff)
    assert res["agree"]
    c = res["hall_route"].coeff((2, 2)) / tau.ww.aut_order()
    assert c == -(ONE / (Q - ONE) ** 4) / 4
    assert q_minus_one_exponent(c) == 4
