"""Acceptance suites.  Each suite returns {name, passed, details, seconds}."""
from __future__ import annotations

import random
import time
from fractions import Fraction
from typing import Callable

from . import polyhedra as ph
from .hall import HallAlgebra, _semisimple_key
from .qtorus import QTAlgebra, dilog_wall_function, qt_bracket, qt_mul
from .quiver import A2, A3, KRONECKER
from .scalar import ONE, Q, ScalarRF, q_pow, t_pow
from .scatter import (
    NonGeneralPoint,
    ScatteringDiagram,
    Wall,
    asymptotic_tagged,
    build_initial_quantum,
    equivalent,
    pipeline,
    random_general_points,
    rank2_direct,
    support_cell_points,
    wall_function_at,
)
from .theta import (
    PrincipalLattice,
    QuantumAction,
    counterexample_driver,
    cps_check,
)
from .tropical import (
    check_disk,
    disk_mult,
    extract_disk,
    flag_form,
    hall_tropical_sum,
    n_theta,
    quantum_leaf,
    refined_disk_value,
    ribbon_mults,
    ribbons,
)

SUITES: dict[str, Callable[..., dict]] = {}


def suite(name: str):
    def deco(fn):
        SUITES[name] = fn
        return fn

    return deco


def run_suite(name: str, **kw) -> dict:
    if name not in SUITES:
        raise KeyError(name)
    t0 = time.perf_counter()
    passed, details = SUITES[name](**kw)
    return {"name": name, "passed": bool(passed), "details": details, "seconds": round(time.perf_counter() - t0, 2)}


def run_all(names=None, **kw) -> list[dict]:
    return [run_suite(n, **kw) for n in (names or list(SUITES))]


def _qm1() -> ScalarRF:
    return Q - ONE


def _e(r: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(r))


# 1 -------------------------------------------------------------------------


def expected_a2_diagram(order: int) -> ScatteringDiagram:
    d = build_initial_quantum(A2, order)
    alg = d.coeff
    walls = [
        Wall(0, (1, 0), ph.hyperplane((1, 0)), dilog_wall_function(alg, (1, 0))),
        Wall(1, (0, 1), ph.hyperplane((0, 1)), dilog_wall_function(alg, (0, 1))),
        # the ray R>=0 (1,-1): x1 + x2 = 0 with x2 <= 0
        Wall(
            2,
            (1, 1),
            ph.Polyhedron(2, (((1, 1), Fraction(0)),), (((0, 1), Fraction(0)),)),
            dilog_wall_function(alg, (1, 1)),
        ),
    ]
    return ScatteringDiagram(order, walls, alg, d.b, {"kind": "expected"})


@suite("a2-pentagon")
def a2_pentagon(order: int = 8, seed: int = 1, **_):
    d = build_initial_quantum(A2, order)
    full, specialized = pipeline(d, seed=seed)
    exp = expected_a2_diagram(order)
    eq = equivalent(specialized, exp, seed=seed)
    ok = eq["equivalent"] and len(specialized.walls) == 3
    return ok, {
        "order": order,
        "completed_walls": len(full.walls),
        "specialized_walls": len(specialized.walls),
        "points_compared": eq["points"],
        "mismatches": len(eq["mismatches"]),
    }


# 2 -------------------------------------------------------------------------


@suite("rank2-oracle")
def rank2_oracle(seed: int = 1, **_):
    out = {}
    ok = True
    for name, q, k in (("a2", A2, 8), ("kronecker", KRONECKER, 6)):
        d = build_initial_quantum(q, k)
        _, specialized = pipeline(d, seed=seed)
        direct = rank2_direct(d, seed=seed)
        eq = equivalent(specialized, direct, seed=seed + 2, random_points=20)
        out[name] = {
            "order": k,
            "pipeline_walls": len(specialized.walls),
            "direct_walls": len(direct.walls),
            "points_compared": eq["points"],
            "mismatches": len(eq["mismatches"]),
        }
        ok = ok and eq["equivalent"]
    return ok, out


# 3 -------------------------------------------------------------------------


def _theta_candidates(specialized, rank: int, rng: random.Random, count: int = 20):
    """Relative-interior points of walls first, then random points, without end."""
    want = (3 * count) // 4
    on_walls = []
    while specialized.walls and len(on_walls) < want:
        on_walls += support_cell_points(specialized, rng)
    rng.shuffle(on_walls)
    yield from on_walls[:want]
    while True:
        yield from random_general_points(rank, rng, 1)


@suite("tropical")
def tropical_correspondence(seeds=(7, 13, 29), count: int = 20, primes=None, **_):
    out = {}
    ok = True
    # the Hall route is only run where the Hall order fits
    configs = (("a2", A2, 8, False), ("kronecker", KRONECKER, 5, False), ("a3", A3, 4, True), ("a2-hall", A2, 4, True))
    for name, q, k, with_hall in configs:
        d = build_initial_quantum(q, k)
        _, ref = pipeline(d, seed=1)
        hall = HallAlgebra(q, order=k, primes=primes) if with_hall else None
        rows = []
        for s in seeds:
            full, _ = pipeline(d, seed=s)
            asym = asymptotic_tagged(full)
            rng = random.Random(s)
            agree = nonzero = redrawn = hall_agree = used = 0
            for x in _theta_candidates(ref, q.vertex_count, rng, count):
                if used == count:
                    break
                try:
                    g = wall_function_at(ref, x)
                    n = n_theta(full, x, asym=asym)
                except NonGeneralPoint:
                    redrawn += 1
                    continue
                used += 1
                agree += g == n
                nonzero += not g.is_zero()
                if hall is not None:
                    hall_agree += hall_tropical_sum(full, x, hall, asym=asym) == g
            row = {"seed": s, "points": used, "agree": agree, "nonzero": nonzero, "redrawn": redrawn}
            if hall is not None:
                row["hall_route_agree"] = hall_agree
                ok = ok and hall_agree == used
            ok = ok and agree == used
            rows.append(row)
        out[name] = {"order": k, "runs": rows}
    return ok, out


# 4 -------------------------------------------------------------------------


@suite("hall-identities")
def hall_identities(primes=None, **_):
    details = {}
    h3 = HallAlgebra(A3, order=2, primes=primes)
    k2, k3 = h3.kappa_simple(1), h3.kappa_simple(2)
    k23_0 = h3.kappa(((0, 0, 1), (0, 1, 0)))
    k23_id = h3.kappa(((0, 1, 1),))
    details["k2k3"] = h3.mul(k2, k3) == k23_0 + k23_id.scale(_qm1())
    details["k3k2"] = h3.mul(k3, k2) == k23_0
    h2 = HallAlgebra(A2, order=4, primes=primes)
    powers = {}
    for i in range(2):
        x = h2.one()
        for k in range(1, 5):
            x = h2.mul(x, h2.kappa_simple(i))
            kk = h2.kappa_simple(i, k)
            powers[f"kappa_{k}S{i + 1}"] = kk == x.scale(q_pow(k * (k - 1) // 2))
            denom = ONE
            for j in range(1, k + 1):
                denom = denom * (q_pow(j) - ONE)
            powers[f"delta_{k}S{i + 1}"] = h2.delta(h2.simple_key(i, k)) == x.scale(denom.inverse())
    details["powers"] = powers
    details["held_out_checks"] = h2.held_out_checks + h3.held_out_checks
    ok = details["k2k3"] and details["k3k2"] and all(powers.values()) and details["held_out_checks"] > 0
    return ok, details


# 5 -------------------------------------------------------------------------


def _random_composition(hall: HallAlgebra, rng: random.Random, degree: int):
    """Random combination of words in the kappa_i of the given total degree."""
    r = hall.quiver.vertex_count
    out = hall.zero()
    for _ in range(rng.randint(1, 2)):
        word = hall.one()
        for _ in range(degree):
            word = hall.mul(word, hall.kappa_simple(rng.randrange(r)))
        out = out + word.scale(Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4)))
    return out


@suite("integration")
def integration(pairs: int = 50, seed: int = 5, max_degree: int = 5, primes=None, **_):
    rng = random.Random(seed)
    algebras = {"a2": HallAlgebra(A2, order=max_degree, primes=primes), "a3": HallAlgebra(A3, order=max_degree, primes=primes)}
    tested = {"a2": 0, "a3": 0}
    failures = []
    for k in range(pairs):
        name = "a2" if k % 2 == 0 else "a3"
        h = algebras[name]
        qt = QTAlgebra(h.b, max_degree)
        total = rng.randint(2, max_degree)
        dx = rng.randint(1, total - 1)
        x = _random_composition(h, rng, dx)
        y = _random_composition(h, rng, total - dx)
        lhs = h.integrate_t(h.mul(x, y), qt)
        rhs = qt_mul(h.integrate_t(x, qt), h.integrate_t(y, qt))
        tested[name] += 1
        if lhs != rhs:
            failures.append({"quiver": name, "case": k})
    gens = {}
    for name, h in algebras.items():
        qt = QTAlgebra(h.b, max_degree)
        r = h.quiver.vertex_count
        for i in range(r):
            gens[f"{name}:kappa_{i + 1}"] = h.integrate_t(h.kappa_simple(i), qt) == qt.monomial(_e(r, i), t_pow(1))
            for k in range(2, 4):
                n = tuple(k * x for x in _e(r, i))
                gens[f"{name}:kappa_{k}S{i + 1}"] = h.integrate_t(h.kappa_simple(i, k), qt) == qt.monomial(n, t_pow(k * k))
    ok = not failures and all(gens.values())
    return ok, {"pairs": tested, "failures": failures, "generators": gens}


# 6 -------------------------------------------------------------------------


def q_minus_one_exponent(c: ScalarRF, bound: int = 12):
    """Smallest e >= 0 with c * (q-1)^e a rational constant, or None."""
    for e in range(bound + 1):
        v = c * _qm1() ** e
        if v.num.degree() <= 0 and v.den.degree() == 0:
            return e
    return None


def find_two_by_two_ribbon(order: int = 4, seed: int = 1):
    """The A2 disk with two weight-one leaves on each vertex and its ribbon with leaf order 1,1,2,2."""
    d = build_initial_quantum(A2, order)
    full, _ = pipeline(d, seed=seed)
    want_ww = ((0, (1, 1)), (1, (1, 1)))
    want_order = ((0, 1), (0, 1), (1, 1), (1, 1))
    for w in full.walls:
        if tuple(w.degree) != (2, 2) or w.parents is None:
            continue
        tau = extract_disk(full, w)
        if tau.ww.parts != want_ww:
            continue
        for rib in ribbons(tau):
            if rib.leaf_order == want_order:
                return full, tau, rib
    return full, None, None


@suite("ribbon-example")
def ribbon_example(primes=None, **_):
    full, tau, rib = find_two_by_two_ribbon()
    if rib is None:
        return False, {"error": "no matching ribbon"}
    hall = HallAlgebra(A2, order=4, primes=primes)
    qt = full.coeff
    res = flag_form(rib, hall, qt)
    aut = tau.ww.aut_order()
    hall_route = res["hall_route"].scale(Fraction(1, aut))
    product_route = res["product_route"].scale(Fraction(1, aut))
    c_hall = hall_route.coeff((2, 2))
    c_prod = product_route.coeff((2, 2))
    e_hall = q_minus_one_exponent(c_hall)
    e_prod = q_minus_one_exponent(c_prod)
    flag = res["flag"].scale((tau.ww.r() * rib.nu).inverse())
    ss = _semisimple_key((2, 2))
    expected_value = qt.monomial((2, 2), -(_qm1() ** -4) / 4)
    details = {
        "leaf_order": [[i + 1, w] for i, w in rib.leaf_order],
        "nu": rib.nu,
        "aut": aut,
        "hall_route": hall_route.to_json(),
        "product_route": product_route.to_json(),
        "routes_agree": hall_route == product_route,
        "exponent_hall": e_hall,
        "exponent_product": e_prod,
        "reference_exponent": 3,
        "flag": res["flag"].to_json(),
        "flag_is_q^-2_kappa_ss": flag == hall.kappa(ss, q_pow(-2)),
        "matches_closed_form": hall_route == expected_value,
    }
    ok = details["routes_agree"] and hall_route.terms.keys() == {(2, 2)} and e_hall is not None and e_hall == e_prod
    return ok, details


# 7 -------------------------------------------------------------------------


def quantum_cps(quivers, order: int = 6, pairs: int = 10, seed: int = 1) -> tuple[bool, dict]:
    out = {}
    ok = True
    for name, q in quivers:
        d = build_initial_quantum(q, order)
        _, specialized = pipeline(d, seed=seed + 2)
        act = QuantumAction(PrincipalLattice(d.b), order)
        rng = random.Random(seed)
        r = q.vertex_count
        held = 0
        rows = []
        for i in range(pairs):
            m = tuple(rng.randint(-2, 2) for _ in range(r))
            if not any(m):
                m = (1,) + m[1:]
            q1, q2 = random_general_points(r, rng, 2)
            q1 = tuple(x / 50 for x in q1)
            q2 = tuple(x / 50 for x in q2)
            rep = cps_check(specialized, act, (0,) * r + m, q1, q2, seed=i)
            held += rep["holds"]
            rows.append({"m": list(m), "holds": rep["holds"], "theta_terms": len(rep["theta1"].terms)})
        out[name] = {"order": order, "pairs": pairs, "holds": held, "cases": rows}
        ok = ok and held == pairs
    return ok, out


@suite("quantum-cps")
def quantum_cps_suite(order: int = 6, pairs: int = 10, **_):
    return quantum_cps((("a2", A2), ("a3", A3)), order, pairs)


# 8 -------------------------------------------------------------------------


@suite("a3-cps")
def a3_counterexample(primes=None, **_):
    standard = counterexample_driver(sign=1, primes=primes)
    flipped = counterexample_driver(sign=-1, primes=primes)
    keep = (
        "steps",
        "ok",
        "residual_k123_00_coefficient",
        "bracket_k123_00_coefficient",
        "inner_pair_scalar",
        "integral_of_difference",
        "hall_bend_sequences",
        "slice_confined",
    )
    details = {
        "standard": {k: standard[k] for k in keep},
        "flipped": {k: flipped[k] for k in keep},
    }
    flipped_nonzero = flipped["residual_k123_00_coefficient"] != "0"
    details["flipped_residual_nonzero"] = flipped_nonzero
    return standard["ok"] and flipped_nonzero, details


# 9 -------------------------------------------------------------------------


def _random_qt_element(alg: QTAlgebra, rng: random.Random, terms: int = 3):
    out = {}
    for _ in range(terms):
        n = tuple(rng.randint(0, 2) for _ in range(alg.dim))
        out[n] = ScalarRF.of(Fraction(rng.randint(-5, 5), rng.randint(1, 3))) * t_pow(rng.randint(-2, 2))
    return alg.element(out)


def qt_properties(cases: int = 500, seed: int = 11) -> dict:
    rng = random.Random(seed)
    bad = {"associativity": 0, "jacobi": 0, "skew": 0, "commutation": 0}
    for _ in range(cases):
        r = rng.randint(2, 3)
        form = [[0] * r for _ in range(r)]
        for i in range(r):
            for j in range(i + 1, r):
                v = rng.randint(-2, 2)
                form[i][j], form[j][i] = v, -v
        alg = QTAlgebra(form, rng.randint(3, 6))
        a, b, c = (_random_qt_element(alg, rng) for _ in range(3))
        if qt_mul(qt_mul(a, b), c) != qt_mul(a, qt_mul(b, c)):
            bad["associativity"] += 1
        jac = qt_bracket(a, qt_bracket(b, c)) + qt_bracket(b, qt_bracket(c, a)) + qt_bracket(c, qt_bracket(a, b))
        if not jac.is_zero():
            bad["jacobi"] += 1
        if qt_bracket(a, b) != -qt_bracket(b, a):
            bad["skew"] += 1
        n1 = tuple(rng.randint(0, 1) for _ in range(r))
        n2 = tuple(rng.randint(0, 1) for _ in range(r))
        lhs = qt_mul(alg.monomial(n1), alg.monomial(n2))
        rhs = qt_mul(alg.monomial(n2), alg.monomial(n1)).scale(t_pow(2 * alg.pairing(n1, n2)))
        if lhs != rhs:
            bad["commutation"] += 1
    return bad


def hall_associativity(cases: int = 100, seed: int = 13, primes=None) -> int:
    rng = random.Random(seed)
    algebras = [HallAlgebra(A2, order=4, primes=primes), HallAlgebra(A3, order=4, primes=primes)]
    bad = 0
    for k in range(cases):
        h = algebras[k % 2]
        keys = [key for d in _small_dims(h) for key in h.classes(d)]
        x, y, z = (h.delta(rng.choice(keys), Fraction(rng.randint(1, 5), rng.randint(1, 3))) for _ in range(3))
        if h.mul(h.mul(x, y), z) != h.mul(x, h.mul(y, z)):
            bad += 1
    return bad


def _small_dims(h: HallAlgebra) -> list[tuple]:
    r = h.quiver.vertex_count
    out = []
    for i in range(r):
        out.append(_e(r, i))
    for i in range(r - 1):
        out.append(tuple(1 if j in (i, i + 1) else 0 for j in range(r)))
    return out


def disk_properties(seed: int = 1) -> dict:
    out = {}
    for name, q, k in (("a2", A2, 6), ("kronecker", KRONECKER, 5), ("a3", A3, 4)):
        d = build_initial_quantum(q, k)
        full, _ = pipeline(d, seed=seed)
        leaf = quantum_leaf(full.coeff)
        counts = {"disks": 0, "unbalanced": 0, "not_trivalent": 0, "unrealized": 0, "ribbon_mismatch": 0, "vertex_formula_mismatch": 0, "wall_mismatch": 0}
        for w in full.walls:
            tau = extract_disk(full, w)
            counts["disks"] += 1
            c = check_disk(tau)
            counts["unbalanced"] += not c["balanced"]
            counts["not_trivalent"] += not c["trivalent"]
            counts["unrealized"] += not c["realized"]
            dm = disk_mult(tau, leaf)
            total = full.coeff.zero()
            for _, v in ribbon_mults(tau, leaf):
                total = total + v
            counts["ribbon_mismatch"] += total != dm
            counts["vertex_formula_mismatch"] += refined_disk_value(tau, full.coeff) != dm
            counts["wall_mismatch"] += dm != w.function
        out[name] = counts
    return out


def cli_determinism() -> dict:
    from .cli import run

    commands = [
        ["scatter", "--quiver", "a2", "--order", "5", "--seed", "3"],
        ["scatter", "--quiver", "kronecker", "--order", "4", "--seed", "3", "--method", "rank2"],
        ["tropical", "--quiver", "a2", "--order", "5", "--seed", "3", "--theta", "1/3,-1/3"],
        ["theta", "--quiver", "a2", "--order", "4", "--lambda", "0,0;1,1", "--endpoint", "1/7,-3/11"],
        ["cps-check", "--quiver", "a2", "--order", "4", "--lambda", "0,0;1,-1", "--seed", "2"],
    ]
    out = {}
    for argv in commands:
        first = run(argv)
        second = run(argv)
        out[" ".join(argv[:1] + argv[1:3])] = first == second and first[0] == 0
    return out


@suite("properties")
def properties(primes=None, include_cli: bool = True, **_):
    details = {
        "quantum_torus": qt_properties(),
        "hall_associativity_failures": hall_associativity(primes=primes),
        "disks": disk_properties(),
    }
    if include_cli:
        details["cli_determinism"] = cli_determinism()
    ok = (
        not any(details["quantum_torus"].values())
        and details["hall_associativity_failures"] == 0
        and all(v == 0 for c in details["disks"].values() for k, v in c.items() if k != "disks")
        and all(details.get("cli_determinism", {}).values())
    )
    return ok, details


CRITERIA = [
    (1, "a2-pentagon"),
    (2, "rank2-oracle"),
    (3, "tropical"),
    (4, "hall-identities"),
    (5, "integration"),
    (6, "ribbon-example"),
    (7, "quantum-cps"),
    (8, "a3-cps"),
    (9, "properties"),
]
