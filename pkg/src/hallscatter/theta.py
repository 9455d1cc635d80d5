"""Broken lines and theta functions with principal coefficients.

Geometry runs in M_R: walls are invariant under translation by (0, N_R),
so a broken line is traced through its projection, while attached
elements keep the full (n, m) bidegree.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import polyhedra as ph
from .polyhedra import Polyhedron, dot
from .qtorus import QTAlgebra, QTElement, qt_exp, qt_mul
from .quiver import A3, forms, p_star, pair
from .scalar import ONE, ScalarRF, q_pow
from .scatter import NonGeneralPoint, ScatteringDiagram, Wall, crossings


class ThetaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# principal lattice


class PrincipalLattice:
    """N^prin = N + M with B^prin((n1,m1),(n2,m2)) = B(n1,n2) - <n1,m2> + <n2,m1>."""

    def __init__(self, b: Sequence[Sequence[int]]):
        self.b = tuple(tuple(row) for row in b)
        self.rank = len(self.b)
        r = self.rank
        form = [[0] * (2 * r) for _ in range(2 * r)]
        for i in range(r):
            for j in range(r):
                form[i][j] = self.b[i][j]
            form[i][r + i] = -1
            form[r + i][i] = 1
        self.form = tuple(tuple(row) for row in form)

    def pairing(self, x: Sequence[int], y: Sequence[int]) -> int:
        return pair(self.form, x, y)

    def pi_star(self, n: Sequence[int]) -> tuple:
        return p_star(self.b, n)

    def p_star(self, n: Sequence[int], m: Sequence[int]) -> tuple:
        return tuple(a - b for a, b in zip(self.pi_star(n), m)) + tuple(n)

    def direction(self, n: Sequence[int], m: Sequence[int]) -> tuple:
        """Velocity m - pi*(n) of a segment carrying z^(n,m), projected to M_R."""
        return tuple(b - a for a, b in zip(self.pi_star(n), m))

    def algebra(self, order: int) -> QTAlgebra:
        return QTAlgebra(self.form, order, graded_rank=self.rank)

    def split(self, lam: Sequence[int]) -> tuple[tuple, tuple]:
        return tuple(lam[: self.rank]), tuple(lam[self.rank :])


# ---------------------------------------------------------------------------
# coefficient actions


class QuantumAction:
    """Conjugation action of the quantum torus on the principal quantum torus."""

    kind = "quantum"

    def __init__(self, lattice: PrincipalLattice, order: int):
        self.lattice = lattice
        self.order = order
        self.alg = lattice.algebra(order)
        self._exp_cache: dict = {}

    def lift(self, g: QTElement) -> QTElement:
        r = self.lattice.rank
        return self.alg.element({tuple(n) + (0,) * r: c for n, c in g.terms.items()})

    def zero(self):
        return self.alg.zero()

    def monomial(self, lam: Sequence[int]):
        return self.alg.monomial(lam)

    def act(self, g, sign: int, a):
        key = (id(g), sign)
        hit = self._exp_cache.get(key)
        if hit is None:
            lg = self.lift(g)
            hit = (g, qt_exp(lg if sign > 0 else -lg), qt_exp(-lg if sign > 0 else lg))
            self._exp_cache[key] = hit
        _, e, e_inv = hit
        return qt_mul(qt_mul(e, a), e_inv)

    def component(self, el, lam: Sequence[int]):
        return el.homogeneous(tuple(lam))

    def components(self, el) -> dict:
        return {n: el.homogeneous(n) for n in el.terms}

    def to_json(self, el) -> list:
        return el.to_json()


class HallAction:
    """Adjoint action of the Hall algebra on its principal-coefficient module."""

    kind = "hall"

    def __init__(self, module):
        self.module = module
        self.hall = module.hall
        self.order = module.hall.order
        self.rank = module.hall.quiver.vertex_count

    def zero(self):
        return self.module.zero()

    def monomial(self, lam: Sequence[int]):
        n, m = tuple(lam[: self.rank]), tuple(lam[self.rank :])
        if any(n):
            raise ThetaError("Hall broken lines start from exponents (0, m)")
        return self.module.monomial(m)

    def act(self, g, sign: int, a):
        return self.module.ad_exp(g, a, sign)

    def component(self, el, lam: Sequence[int]):
        n, m = tuple(lam[: self.rank]), tuple(lam[self.rank :])
        return el.homogeneous(n, m)

    def components(self, el) -> dict:
        out = {}
        for d, m in el.bidegrees():
            out[tuple(d) + tuple(m)] = el.homogeneous(d, m)
        return out

    def to_json(self, el) -> list:
        return el.to_json()


# ---------------------------------------------------------------------------
# broken lines


@dataclass
class Bend:
    point: tuple
    normal: tuple
    wall_ids: tuple
    sign: int
    exponent: tuple  # exponent after the bend


@dataclass
class BrokenLine:
    lam: tuple
    endpoint: tuple
    bends: list
    element: object = None
    elements: list = field(default_factory=list)

    def exponents(self) -> list:
        return [self.lam] + [b.exponent for b in self.bends]

    def bend_normals(self) -> list:
        return [b.normal for b in self.bends]

    def to_json(self, action) -> dict:
        return {
            "lambda": list(self.lam),
            "endpoint": [str(x) for x in self.endpoint],
            "bends": [
                {
                    "point": [str(x) for x in b.point],
                    "normal": list(b.normal),
                    "walls": list(b.wall_ids),
                    "sign": b.sign,
                    "exponent": list(b.exponent),
                }
                for b in self.bends
            ],
            "element": action.to_json(self.element) if self.element is not None else None,
        }


def _ray_hits(d: ScatteringDiagram, start: tuple, v: tuple) -> list:
    """Wall crossings of the open ray start + s v, s > 0, sorted by s."""
    found: dict = {}
    for w in d.walls:
        (n, c) = w.support.eqs[0]
        nv = dot(n, v)
        ns = dot(n, start)
        if nv == 0:
            if ns == c and w.support.status(start) != ph.OUTSIDE:
                raise NonGeneralPoint("ray runs inside a wall")
            continue
        s = (Fraction(c) - ns) / nv
        if s <= 0:
            continue
        pt = tuple(a + s * b for a, b in zip(start, v))
        st = w.support.status(pt)
        if st == ph.OUTSIDE:
            continue
        if st == ph.BOUNDARY:
            raise NonGeneralPoint("ray meets a joint")
        found.setdefault(s, []).append(w)
    out = []
    for s in sorted(found):
        ws = found[s]
        if len({w.normal for w in ws}) > 1:
            raise NonGeneralPoint("ray meets a joint")
        out.append((s, tuple(a + s * b for a, b in zip(start, v)), ws))
    return out


def _n_le(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _sum_functions(ws: list):
    f = ws[0].function
    for w in ws[1:]:
        f = f + w.function
    return f


def enumerate_broken_lines(
    d: ScatteringDiagram,
    action,
    lam: Sequence[int],
    endpoint: Sequence,
    order: Optional[int] = None,
    keep_zero: bool = False,
    finals: Optional[Sequence[Sequence[int]]] = None,
) -> list[BrokenLine]:
    """All broken lines with ends (lam, endpoint) up to N-degree `order`.

    Exponent sequences are found by tracing backward from the endpoint;
    attached elements are then computed forward and lines with a zero
    element are dropped unless keep_zero is set.  `finals` restricts the
    N-part of the last exponent.
    """
    lat = PrincipalLattice(d.b)
    r = lat.rank
    k = action.order if order is None else order
    lam = tuple(lam)
    if len(lam) != 2 * r:
        raise ThetaError("exponent must have length 2 * rank")
    if not any(lam):
        raise ThetaError("exponent must be nonzero")
    q0 = tuple(Fraction(x) for x in endpoint)
    if any(w.support.status(q0) != ph.OUTSIDE for w in d.walls):
        raise NonGeneralPoint("endpoint lies on a wall")
    n0, m0 = lat.split(lam)
    lines: list[list] = []

    def trace(n_cur: tuple, pt: tuple, rev: list):
        v = lat.direction(n_cur, m0)
        back = tuple(-x for x in v)
        if n_cur == n0:
            if any(v):
                _ray_hits(d, pt, back)  # certify the incoming ray avoids joints
            lines.append(list(reversed(rev)))
            return
        if not any(v):
            return
        for s, hit, ws in _ray_hits(d, pt, back):
            normal = ws[0].normal
            nv = dot(normal, v)
            j = 1
            while True:
                n_prev = tuple(a - j * b for a, b in zip(n_cur, normal))
                if not _n_le(n0, n_prev):
                    break
                v_prev = lat.direction(n_prev, m0)
                if dot(normal, v_prev) == 0:
                    raise NonGeneralPoint("segment runs parallel to a wall at a bend")
                sign = 1 if nv < 0 else -1
                bend = Bend(hit, normal, tuple(w.id for w in ws), sign, n_cur + m0)
                trace(n_prev, hit, rev + [(bend, _sum_functions(ws))])
                j += 1

    if finals is None:
        candidates = [tuple(a + b for a, b in zip(n0, extra)) for extra in _bounded_vectors(r, k - sum(n0))]
    else:
        candidates = [tuple(f) for f in finals if _n_le(n0, f) and sum(f) <= k]
    for n_final in candidates:
        trace(n_final, q0, [])

    out = []
    for seq in lines:
        a = action.monomial(lam)
        elems = [a]
        for bend, f in seq:
            a = action.component(action.act(f, bend.sign, a), bend.exponent)
            elems.append(a)
            if a.is_zero():
                break
        line = BrokenLine(lam, q0, [b for b, _ in seq], a, elems)
        if a.is_zero() and not keep_zero:
            continue
        out.append(line)
    out.sort(key=lambda L: (len(L.bends), [b.exponent for b in L.bends], [b.wall_ids for b in L.bends]))
    return out


def _bounded_vectors(r: int, total: int) -> list[tuple]:
    out = []

    def rec(prefix, rem):
        if len(prefix) == r:
            out.append(tuple(prefix))
            return
        for x in range(rem + 1):
            rec(prefix + [x], rem - x)

    if total < 0:
        return []
    rec([], total)
    return out


def theta_function(d, action, lam, endpoint, order=None):
    total = action.zero()
    for line in enumerate_broken_lines(d, action, lam, endpoint, order):
        total = total + line.element
    return total


def transport(d: ScatteringDiagram, action, element, start: Sequence, end: Sequence):
    """Apply the path-ordered automorphism along the straight path start -> end."""
    a = element
    for _, sign, f in crossings(d, start, end):
        a = action.act(f, sign, a)
    return a


def nudge(d: ScatteringDiagram, point: Sequence, rng: random.Random, tries: int = 50) -> tuple:
    """A nearby point in the same chamber (no wall between them)."""
    p = tuple(Fraction(x) for x in point)
    for _ in range(tries):
        v = tuple(Fraction(rng.randint(-50, 50), 100003) for _ in p)
        cand = tuple(a + b for a, b in zip(p, v))
        try:
            if not crossings(d, p, cand) and not any(w.support.status(cand) != ph.OUTSIDE for w in d.walls):
                return cand
        except NonGeneralPoint:
            continue
    raise NonGeneralPoint("could not nudge the endpoint")


def theta_with_retry(d, action, lam, endpoint, order=None, seed: int = 0, retries: int = 20):
    rng = random.Random(seed)
    q = tuple(Fraction(x) for x in endpoint)
    last = None
    for _ in range(retries):
        try:
            return theta_function(d, action, lam, q, order), q
        except NonGeneralPoint as exc:
            last = exc
            q = nudge(d, q, rng)
    raise NonGeneralPoint(f"endpoint not general after retries: {last}")


def cps_check(d, action, lam, q1, q2, order=None, seed: int = 0) -> dict:
    """Residual theta_{q2} - Phi_{q1 -> q2}(theta_{q1})."""
    t1, q1 = theta_with_retry(d, action, lam, q1, order, seed)
    t2, q2 = theta_with_retry(d, action, lam, q2, order, seed + 1)
    moved = None
    rng = random.Random(seed)
    for _ in range(20):
        try:
            moved = transport(d, action, t1, q1, q2)
            break
        except NonGeneralPoint:
            mid = tuple((a + b) / 2 + Fraction(rng.randint(-100, 100), 997) for a, b in zip(q1, q2))
            try:
                moved = transport(d, action, transport(d, action, t1, q1, mid), mid, q2)
                break
            except NonGeneralPoint:
                continue
    if moved is None:
        raise NonGeneralPoint("could not route the transport path")
    residual = t2 - moved
    return {"holds": residual.is_zero(), "residual": residual, "theta1": t1, "theta2": t2, "q1": q1, "q2": q2}


def in_slice(lat: PrincipalLattice, base: Sequence, pts: Sequence[Sequence]) -> bool:
    """Whether every point lies in base + pi*(N_R)."""
    cols = [tuple(Fraction(x) for x in lat.pi_star(tuple(1 if j == i else 0 for j in range(lat.rank)))) for i in range(lat.rank)]
    rank0 = _rank(cols)
    for p in pts:
        diff = tuple(Fraction(a) - Fraction(b) for a, b in zip(p, base))
        if any(diff) and _rank(cols + [diff]) != rank0:
            return False
    return True


def _rank(vs: list) -> int:
    rows = [list(v) for v in vs if any(v)]
    if not rows:
        return 0
    r = 0
    for col in range(len(rows[0])):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / rows[r][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


# ---------------------------------------------------------------------------
# Hall diagram for the A3 configuration and the counterexample driver


COUNTER_M = (-1, 1, -1)
COUNTER_THETA1 = (Fraction(-1, 10), Fraction(-1), Fraction(-5, 11))
COUNTER_THETA2 = (Fraction(1, 10), Fraction(-1), Fraction(-5, 11))


def hall_first_order_diagram(hall) -> ScatteringDiagram:
    """Initial walls e_i^perp with log 1_sst, plus first-order children of colliding pairs."""
    q = hall.quiver
    b, _ = forms(q)
    r = q.vertex_count
    walls = []
    logs = [hall.log_one_sst(i) for i in range(r)]
    for i in range(r):
        e = tuple(1 if j == i else 0 for j in range(r))
        walls.append(Wall(i, e, ph.hyperplane(e), logs[i], degree=e))
    first = [hall.kappa_simple(i).scale(ONE / (q_pow(1) - ONE)) for i in range(r)]
    nid = r
    for i in range(r):
        for j in range(r):
            if i == j or pair(b, _e(r, i), _e(r, j)) <= 0:
                continue
            n = tuple(x + y for x, y in zip(_e(r, i), _e(r, j)))
            ray = tuple(-x for x in p_star(b, n))
            # the child sweeps the joint e_i^perp cap e_j^perp along `ray`
            ei = _e(r, i)
            half = tuple(-x for x in ei) if dot(ei, ray) > 0 else ei
            support = Polyhedron(r, ((n, Fraction(0)),), ((half, Fraction(0)),))
            func = hall.bracket(first[i], first[j])
            walls.append(Wall(nid, n, support, func, degree=n, parents=(i, j)))
            nid += 1
    return ScatteringDiagram(hall.order, walls, hall, b, {"kind": "hall-first-order"})


def _e(r: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(r))


def counterexample_driver(sign: int = 1, quantum_order: int = 3, primes=None) -> dict:
    """Machine-checked steps (a)-(g) of the A3 Hall broken line counterexample."""
    from .hall import HallAlgebra, HallPrincipal
    from .scatter import build_initial_quantum, pipeline

    q = A3
    r = 3
    hall = HallAlgebra(q, order=3, primes=primes)
    mod = HallPrincipal(hall, sign)
    m = COUNTER_M
    lam = (0, 0, 0) + m
    target = (1, 1, 1)
    report: dict = {"convention": "standard" if sign == 1 else "flipped", "m": list(m)}

    # geometry: which bend sequences reach each endpoint in degree m + e1 + e2 + e3
    qd = build_initial_quantum(q, quantum_order)
    _, qspec = pipeline(qd, seed=11)
    qaction = QuantumAction(PrincipalLattice(qd.b), quantum_order)
    seqs = {}
    for name, th in (("theta1", COUNTER_THETA1), ("theta2", COUNTER_THETA2)):
        lines = enumerate_broken_lines(qspec, qaction, lam, th, keep_zero=True, finals=[target])
        seqs[name] = sorted(
            [list(map(list, L.bend_normals())) for L in lines if L.bends and L.bends[-1].exponent[:r] == target]
        )
    report["quantum_bend_sequences"] = seqs

    hd = hall_first_order_diagram(hall)
    haction = HallAction(mod)
    lat = PrincipalLattice(hd.b)
    hall_lines = {}
    finals = {}
    confined = True
    for name, th in (("theta1", COUNTER_THETA1), ("theta2", COUNTER_THETA2)):
        lines = enumerate_broken_lines(hd, haction, lam, th)
        for L in lines:
            if not in_slice(lat, th, [b.point for b in L.bends]):
                confined = False
        hits = [L for L in lines if L.bends and L.bends[-1].exponent[:r] == target]
        hall_lines[name] = sorted(list(map(list, L.bend_normals())) for L in hits)
        acc = mod.zero()
        for L in hits:
            acc = acc + L.element
        finals[name] = acc
    report["hall_bend_sequences"] = hall_lines
    report["slice_confined"] = confined
    expected = {"theta1": [[[0, 0, 1], [1, 0, 0], [0, 1, 0]]], "theta2": [[[0, 0, 1], [1, 1, 0]]]}
    report["bend_sequences_match"] = hall_lines == expected and seqs == expected

    k = [mod.lift(hall.kappa_simple(i)) for i in range(r)]
    zm = mod.monomial(m)
    br = mod.bracket
    c3 = (q_pow(1) - ONE) ** -3
    a1_formula = br(k[1], br(k[0], br(k[2], zm))).scale(c3)
    a2_formula = br(br(k[1], k[0]), br(k[2], zm)).scale(c3)
    a1, a2 = finals["theta1"], finals["theta2"]
    report["a_gamma1"] = a1.to_json()
    report["a_gamma2"] = a2.to_json()
    steps = {}
    steps["a"] = a1 == a1_formula and not a1.is_zero()
    steps["b"] = a2 == a2_formula and not a2.is_zero()
    jac = br(k[1], br(k[0], br(k[2], zm))) - br(k[0], br(k[1], br(k[2], zm)))
    steps["c"] = br(br(k[1], k[0]), br(k[2], zm)) == jac
    diff = a1 - a2
    steps["d"] = diff == br(k[0], br(k[1], br(k[2], zm))).scale(c3)

    k23_0 = ((0, 0, 1), (0, 1, 0))
    k23_id = ((0, 1, 1),)
    k123_00 = ((0, 0, 1), (0, 1, 0), (1, 0, 0))
    qm1 = q_pow(1) - ONE
    k2k3 = hall.mul(hall.kappa_simple(1), hall.kappa_simple(2))
    k3k2 = hall.mul(hall.kappa_simple(2), hall.kappa_simple(1))
    steps["e"] = k2k3 == hall.kappa(k23_0) + hall.kappa(k23_id, qm1) and k3k2 == hall.kappa(k23_0)
    inner = br(k[1], br(k[2], zm))
    x_el = hall.kappa(k23_0) - hall.kappa(k23_id)
    zx = mod.monomial(m, x_el)
    ratio = None
    if not inner.is_zero():
        probe = (m, k23_0)
        ratio = inner.terms[probe] / zx.terms[probe]
        if inner != zx.scale(ratio):
            ratio = None
    report["inner_pair_scalar"] = None if ratio is None else ratio.text()
    outer = br(k[0], zx)
    inner_coeff = outer.kappa_coeff(m, k123_00)
    coeff = diff.kappa_coeff(m, k123_00)
    report["residual_k123_00_coefficient"] = coeff.text()
    report["bracket_k123_00_coefficient"] = inner_coeff.text()
    steps["f"] = _has_factor(inner_coeff, qm1) and not coeff.is_zero()
    qt = PrincipalLattice(hd.b).algebra(3)
    it = mod.integrate_t(diff, qt)
    report["integral_of_difference"] = it.to_json()
    steps["g"] = it.is_zero()
    report["steps"] = steps
    report["ok"] = all(steps.values()) and report["bend_sequences_match"] and confined
    return report


def _has_factor(x: ScalarRF, f: ScalarRF) -> bool:
    """Whether x is nonzero and (x / f) has no pole at the root q = 1 of f."""
    if x.is_zero():
        return False
    y = x / f
    try:
        y.evaluate(1)
    except ZeroDivisionError:
        return False
    return True
