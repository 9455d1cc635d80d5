"""Hall algebra counts checked against brute-force enumeration over small fields."""
import random
from fractions import Fraction
from itertools import product

import pytest

from hallscatter import ffield as ff
from hallscatter.hall import HallAlgebra, HallError, Rep, key_dim, stability_diagram
from hallscatter.quiver import A2, A3, KRONECKER
from hallscatter.scalar import ONE, Q, t_pow
from hallscatter.scatter import build_initial_quantum, equivalent, pipeline


@pytest.fixture(scope="module")
def h2():
    return HallAlgebra(A2, order=4)


@pytest.fixture(scope="module")
def h3():
    return HallAlgebra(A3, order=3)


# -- brute-force oracles -----------------------------------------------------


def all_matrices(r, c, p):
    for vals in product(range(p), repeat=r * c):
        yield tuple(tuple(vals[i * c : (i + 1) * c]) for i in range(r))


def mat_mul(a, b, p):
    if not a or not b or not b[0]:
        return tuple(tuple(0 for _ in range(len(b[0]) if b else 0)) for _ in a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) % p for j in range(len(b[0]))) for i in range(len(a)))


def brute_aut(quiver, rep, p):
    """Count tuples of invertible g_v with g_t A = A g_s for every arrow s -> t."""
    choices = []
    for d in rep.dims:
        choices.append([g for g in all_matrices(d, d, p) if d == 0 or ff.det(g, p)])
    count = 0
    for gs in product(*choices):
        ok = True
        for arr, (s, t) in enumerate(quiver.arrows):
            a = rep.maps[arr]
            if rep.dims[s] == 0 or rep.dims[t] == 0:
                continue
            if mat_mul(gs[t], a, p) != mat_mul(a, gs[s], p):
                ok = False
                break
        count += ok
    return count


def span(vectors, n, p):
    out = {tuple([0] * n)}
    for v in vectors:
        out = {tuple((x + c * y) % p for x, y in zip(w, v)) for w in out for c in range(p)}
    return frozenset(out)


def brute_subspaces(n, k, p):
    vecs = list(product(range(p), repeat=n))
    seen = set()
    for basis in product(vecs, repeat=k):
        s = span(basis, n, p)
        if len(s) == p**k:
            seen.add(s)
    return seen


def apply(mat, v, p):
    return tuple(sum(a * b for a, b in zip(row, v)) % p for row in mat)


def dim_of(s, p):
    d = 0
    while p**d < len(s):
        d += 1
    return d


def a2_brute_tally(rep, a, p):
    """Subreps of an A2 rep (1 -> 2) of dim a, tallied by (rank of N, rank of M/N)."""
    (d1, d2), mat = rep.dims, rep.maps[0]
    tally = {}
    for n1 in brute_subspaces(d1, a[0], p):
        img = span([apply(mat, v, p) for v in n1], d2, p) if d2 else frozenset({()})
        for n2 in brute_subspaces(d2, a[1], p):
            if not img <= n2:
                continue
            r_sub = dim_of(img, p)
            full_img = span([apply(mat, v, p) for v in product(range(p), repeat=d1)], d2, p) if d2 else frozenset({()})
            joined = span(list(full_img) + list(n2), d2, p) if d2 else frozenset({()})
            r_quo = dim_of(joined, p) - a[1]
            tally[(r_sub, r_quo)] = tally.get((r_sub, r_quo), 0) + 1
    return tally


def a2_rank(key):
    return sum(1 for r in key if r == (1, 1))


def a3_signature(rep, p):
    """(dims, rk a, rk b, rk [a|b]) for 1 -> 2 <- 3; determines the iso class."""
    a, b = rep.maps
    d1, d2, d3 = rep.dims
    cols_a = [tuple(a[i][j] for i in range(d2)) for j in range(d1)] if d2 else []
    cols_b = [tuple(b[i][j] for i in range(d2)) for j in range(d3)] if d2 else []
    ra = ff.rank([list(c) for c in cols_a], d2, p) if cols_a else 0
    rb = ff.rank([list(c) for c in cols_b], d2, p) if cols_b else 0
    rab = ff.rank([list(c) for c in cols_a + cols_b], d2, p) if cols_a + cols_b else 0
    return rep.dims, ra, rb, rab


def key_signature(key):
    m = {r: key.count(r) for r in set(key)}
    ra = m.get((1, 1, 0), 0) + m.get((1, 1, 1), 0)
    rb = m.get((0, 1, 1), 0) + m.get((1, 1, 1), 0)
    rab = ra + m.get((0, 1, 1), 0)
    return key_dim(key, 3), ra, rb, rab


def random_rep(quiver, dims, rng, p):
    maps = []
    for s, t in quiver.arrows:
        maps.append(tuple(tuple(rng.randrange(p) for _ in range(dims[s])) for _ in range(dims[t])))
    return Rep(tuple(dims), tuple(maps))


# -- tests -------------------------------------------------------------------


def test_subspace_enumeration_matches_brute_force():
    for n, k, p in ((2, 1, 2), (3, 1, 2), (3, 2, 3), (2, 1, 3)):
        listed = {span(rows, n, p) for rows, _ in ff.subspaces(n, k, p)}
        assert listed == brute_subspaces(n, k, p)
        assert len(listed) == ff.gaussian_binomial(n, k, p)


def test_gl_order_brute_force():
    for n, p in ((2, 2), (2, 3)):
        brute = sum(1 for g in all_matrices(n, n, p) if ff.det(g, p))
        assert ff.gl_order(n, p) == brute


@pytest.mark.parametrize("p", [2, 3])
def test_aut_counts_brute_force(h2, h3, p):
    for h, dims_list in ((h2, [(1, 1), (2, 1), (1, 2), (2, 0)]), (h3, [(1, 1, 1), (1, 1, 0), (0, 1, 1), (1, 0, 1)])):
        for d in dims_list:
            for key in h.classes(d):
                rep = h.witness(key)
                assert h.aut_count(key, p) == brute_aut(h.quiver, rep, p), (key, p)


def test_aut_polynomial_of_gl2(h2):
    t2 = t_pow(2)
    assert h2.aut_order(h2.simple_key(0, 2)) == (t2 * t2 - ONE) * (t2 * t2 - t2)


@pytest.mark.parametrize("p", [2, 3])
def test_iso_key_brute_force_a3(h3, p):
    rng = random.Random(p)
    for _ in range(40):
        dims = tuple(rng.randint(0, 1) for _ in range(3))
        if sum(dims) == 0:
            continue
        dims = tuple(x + (1 if i == 1 and rng.random() < 0.4 and sum(dims) < 3 else 0) for i, x in enumerate(dims))
        rep = random_rep(A3, dims, rng, p)
        assert key_signature(h3.iso_key(rep, p)) == a3_signature(rep, p)


@pytest.mark.parametrize("p", [2, 3])
def test_subrep_tally_brute_force_a2(h2, p):
    for d in ((1, 1), (2, 1), (1, 2), (2, 2)):
        for key in h2.classes(d):
            rep = h2.witness(key)
            rep = Rep(rep.dims, tuple(tuple(tuple(x % p for x in row) for row in m) for m in rep.maps))
            for a in product(range(d[0] + 1), range(d[1] + 1)):
                brute = a2_brute_tally(rep, a, p)
                ours = {}
                for (ka, kb), c in h2.subrep_tally(key, a, p).items():
                    k = (a2_rank(ka), a2_rank(kb))
                    ours[k] = ours.get(k, 0) + c
                assert ours == brute, (key, a, p)


def test_hall_numbers_of_indecomposable_a2(h2):
    p_key = ((1, 1),)
    s1, s2 = ((1, 0),), ((0, 1),)
    # S2 is the only nonzero proper subrepresentation of the projective at vertex 1
    assert h2.hall_poly(p_key, s2, s1) == ONE
    assert h2.hall_poly(p_key, s1, s2).is_zero()


def test_flag_count_lines(h2):
    for p in (2, 3, 5):
        assert h2.flag_count([((1, 0),), ((1, 0),)], h2.simple_key(0, 2), p) == p + 1


def test_simple_products(h3):
    k2, k3 = h3.kappa_simple(1), h3.kappa_simple(2)
    assert h3.mul(k2, k3) == h3.kappa(((0, 0, 1), (0, 1, 0))) + h3.kappa(((0, 1, 1),), Q - ONE)
    assert h3.mul(k3, k2) == h3.kappa(((0, 0, 1), (0, 1, 0)))


def test_associativity_small(h3):
    rng = random.Random(3)
    keys = [k for d in ((1, 0, 0), (0, 1, 0), (0, 0, 1)) for k in h3.classes(d)]
    for _ in range(10):
        x, y, z = (h3.delta(rng.choice(keys), Fraction(rng.randint(1, 4))) for _ in range(3))
        assert h3.mul(h3.mul(x, y), z) == h3.mul(x, h3.mul(y, z))


def test_integration_on_generators(h2):
    qt = h2.integrate_t(h2.kappa_simple(0)).alg
    assert h2.integrate_t(h2.kappa_simple(0)) == qt.monomial((1, 0), t_pow(1))
    assert h2.integrate_t(h2.kappa_simple(1, 2)) == qt.monomial((0, 2), t_pow(4))


def test_held_out_prime_detects_non_polynomial(h2):
    with pytest.raises(HallError):
        h2._interpolate(lambda p: 2**p, 1)


def test_held_out_checks_counted():
    h = HallAlgebra(A2, order=2)
    h.mul(h.kappa_simple(0), h.kappa_simple(1))
    assert h.held_out_checks > 0


def test_non_dynkin_rejected():
    with pytest.raises(HallError):
        HallAlgebra(KRONECKER, order=2)


def test_order_bound():
    with pytest.raises(HallError):
        HallAlgebra(A2, order=7)


@pytest.mark.parametrize("quiver,order", [(A2, 5), (A3, 4)])
def test_stability_walls_match_pipeline(quiver, order):
    hall = HallAlgebra(quiver, order=order)
    oracle = stability_diagram(hall)
    _, specialized = pipeline(build_initial_quantum(quiver, order), seed=2)
    assert equivalent(specialized, oracle, seed=4)["equivalent"]
