"""Scattering diagrams: walls, perturbation and completion, asymptotics,
specialization, path-ordered products, and a rank-2 order-by-order oracle."""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from typing import Iterable, Optional, Sequence

from . import polyhedra as ph
from .polyhedra import Polyhedron, dot, fm_witness, solve_affine
from .qtorus import QTAlgebra, QTElement, dilog_wall_function, qt_bracket, qt_exp, qt_log, qt_mul
from .quiver import QuiverSpec, basis_vector, forms, lattice_index, p_star, primitive
from .scalar import ScalarRF

SCHEME_COPY = "copy"
SCHEME_SUBSET = "subset"


class ScatterError(ValueError):
    pass


class DegenerateJoint(ScatterError):
    """Two walls meet in a non-generic way (touching boundaries, tight contact)."""


class NonGeneralPoint(ScatterError):
    pass


@dataclass
class Wall:
    id: int
    normal: tuple  # primitive, in N+
    support: Polyhedron  # {<normal,x> = c} plus inequalities, in M_R
    function: object
    degree: Optional[tuple] = None  # exponent of a homogeneous function
    leaves: int = 0  # bitmask of leaf ids below this wall (the tag)
    elements: int = 0  # bitmask of tag atoms; disjointness decides nonzero products
    parents: Optional[tuple] = None
    leaf: Optional[tuple] = None  # (vertex, weight, label) for leaves
    maxcopy: tuple = ()

    @property
    def offset(self) -> Fraction:
        return Fraction(self.support.eqs[0][1])

    @property
    def is_leaf(self) -> bool:
        return self.parents is None


@dataclass
class ScatteringDiagram:
    order: int
    walls: list
    coeff: object  # coefficient algebra handle
    b: tuple  # skew form of the quiver, used for p*
    meta: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.b)

    def p_star(self, n: Sequence[int]) -> tuple:
        return p_star(self.b, n)

    def wall(self, wid: int) -> Wall:
        return self._index()[wid]

    def _index(self):
        idx = self.meta.get("_index")
        if idx is None or len(idx) != len(self.walls):
            idx = {w.id: w for w in self.walls}
            self.meta["_index"] = idx
        return idx


# --------------------------------------------------------------------------
# construction


def quantum_algebra(q: QuiverSpec, order: int) -> QTAlgebra:
    b, _ = forms(q)
    return QTAlgebra(b, order)


def build_initial_quantum(q: QuiverSpec, order: int) -> ScatteringDiagram:
    b, _ = forms(q)
    alg = QTAlgebra(b, order)
    r = q.vertex_count
    walls = []
    for i in range(r):
        e = basis_vector(r, i)
        walls.append(Wall(i, e, ph.hyperplane(e), dilog_wall_function(alg, e)))
    return ScatteringDiagram(order, walls, alg, tuple(tuple(row) for row in b), {"kind": "initial"})


def _homogeneous_pieces(alg, func, normal) -> list[tuple[int, object]]:
    """Split a wall function into (weight w, homogeneous part at w*normal)."""
    pieces = []
    for n in sorted(func.terms, key=lambda e: sum(e)):
        w = sum(n) // sum(normal)
        if tuple(w * x for x in normal) != tuple(n):
            raise ScatterError("wall function is not supported on multiples of its normal")
        pieces.append((w, func.homogeneous(n)))
    return pieces


def _random_offsets(rng: random.Random, count: int) -> list[Fraction]:
    seen = set()
    out = []
    while len(out) < count:
        den = rng.randint(500, 1000)
        v = Fraction(rng.randint(-den, den), den)
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def perturb(
    d_in: ScatteringDiagram,
    order: Optional[int] = None,
    seed: int = 0,
    scheme: str = SCHEME_COPY,
    canonical: bool = True,
) -> ScatteringDiagram:
    """Replace each initial hyperplane by tagged generic translates.

    scheme "subset": one leaf per (i, w, J) with J a w-subset of {1..K},
    function w! g_{i,w}; tags multiply to zero when subsets overlap.
    scheme "copy": one leaf per (i, w, c) with c = 1..K//w, function g_{i,w};
    each leaf carries its own square-zero variable.  With canonical=True
    only tags that use copies 1..l for every (i, w) are ever formed.
    """
    k = d_in.order if order is None else order
    if scheme not in (SCHEME_COPY, SCHEME_SUBSET):
        raise ScatterError(f"unknown tag scheme {scheme!r}")
    if scheme == SCHEME_SUBSET and canonical:
        canonical = False
    rng = random.Random(seed)
    specs = []  # (vertex, normal, weight, label, function, element mask)
    for wall in d_in.walls:
        n = wall.normal
        if wall.support.ineqs or wall.offset != 0:
            raise ScatterError("perturbation expects full hyperplanes through the origin")
        support_i = [i for i, x in enumerate(n) if x]
        if len(support_i) != 1:
            raise ScatterError("perturbation expects walls e_i^perp")
        i = support_i[0]
        for w, piece in _homogeneous_pieces(d_in.coeff, wall.function, n):
            if w > k:
                continue
            if scheme == SCHEME_COPY:
                for c in range(1, k // w + 1):
                    specs.append((i, n, w, c, piece, None))
            else:
                for J in combinations(range(1, k + 1), w):
                    el = 0
                    for j in J:
                        el |= 1 << (i * k + j - 1)
                    specs.append((i, n, w, frozenset(J), piece.scale(factorial(w)), el))
    keys = sorted({(s[0], s[2]) for s in specs})
    key_pos = {kw: idx for idx, kw in enumerate(keys)}
    offsets_by_vertex: dict[int, list] = {}
    for s in specs:
        offsets_by_vertex.setdefault(s[0], []).append(s)
    offsets = {}
    for i in sorted(offsets_by_vertex):
        vals = _random_offsets(rng, len(offsets_by_vertex[i]))
        for s, v in zip(offsets_by_vertex[i], vals):
            offsets[id(s)] = v
    walls = []
    for lid, s in enumerate(specs):
        i, n, w, label, piece, el = s
        mc = [0] * len(keys)
        mc[key_pos[(i, w)]] = label if scheme == SCHEME_COPY else 1
        walls.append(
            Wall(
                lid,
                n,
                ph.hyperplane(n, offsets[id(s)]),
                piece,
                degree=tuple(w * x for x in n),
                leaves=1 << lid,
                elements=(1 << lid) if el is None else el,
                leaf=(i, w, label),
                maxcopy=tuple(mc),
            )
        )
    meta = {
        "kind": "perturbed",
        "scheme": scheme,
        "canonical": canonical,
        "seed": seed,
        "keys": keys,
        "leaf_count": len(walls),
    }
    if canonical:
        walls = [w for w in walls if _cost(w.maxcopy, keys) <= k]
    return ScatteringDiagram(k, walls, d_in.coeff, d_in.b, meta)


def _cost(maxcopy: tuple, keys: list) -> int:
    return sum(kw[1] * c for kw, c in zip(keys, maxcopy))


# --------------------------------------------------------------------------
# joints and children


def _restricted(ineqs, x0, basis):
    out = []
    for a, b in ineqs:
        coeffs = tuple(dot(a, v) for v in basis)
        rhs = Fraction(b) - dot(a, x0)
        out.append((coeffs, rhs))
    return out


def joint_point(w1: Wall, w2: Wall, rank: int) -> Optional[tuple]:
    """A relative-interior point of the codim-2 intersection, or None if empty.

    Raises DegenerateJoint when the walls meet but not in a codim-2 piece
    with nonempty relative interior.
    """
    (n1, c1), (n2, c2) = w1.support.eqs[0], w2.support.eqs[0]
    sol = solve_affine([(n1, c1), (n2, c2)], rank)
    if sol is None:
        return None
    x0, basis = sol
    if len(basis) != rank - 2:
        return None
    cons = []
    for coeffs, rhs in _restricted(w1.support.ineqs + w2.support.ineqs, x0, basis):
        if not any(coeffs):
            if rhs < 0:
                return None
            if rhs == 0:
                raise DegenerateJoint(f"walls {w1.id} and {w2.id} touch along a boundary")
            continue
        cons.append((coeffs, rhs))
    if not basis:
        return x0
    if len(basis) == 1:
        lo = hi = None
        for (c,), rhs in cons:
            v = rhs / c
            if c > 0:
                if hi is None or v < hi:
                    hi = v
            else:
                if lo is None or v > lo:
                    lo = v
        if lo is not None and hi is not None:
            if lo > hi:
                return None
            if lo == hi:
                raise DegenerateJoint(f"walls {w1.id} and {w2.id} meet in a point")
            y = (lo + hi) / 2
        elif lo is not None:
            y = lo + 1
        elif hi is not None:
            y = hi - 1
        else:
            y = Fraction(0)
        return tuple(p + y * v for p, v in zip(x0, basis[0]))
    y = fm_witness([(c, r, True) for c, r in cons], len(basis))
    if y is None:
        if fm_witness([(c, r, False) for c, r in cons], len(basis)) is not None:
            raise DegenerateJoint(f"walls {w1.id} and {w2.id} meet in a lower-dimensional set")
        return None
    pt = list(x0)
    for yk, v in zip(y, basis):
        pt = [p + yk * vi for p, vi in zip(pt, v)]
    return tuple(pt)


def child_support(w1: Wall, w2: Wall, b) -> tuple[tuple, Polyhedron, tuple]:
    """Support of the child wall: joint + R>=0 * (-p*(n1+n2)), exactly."""
    d1, d2 = w1.degree, w2.degree
    n = tuple(x + y for x, y in zip(d1, d2))
    r = tuple(-x for x in p_star(b, n))
    k1 = lattice_index(d1) // lattice_index(w1.normal)
    k2 = lattice_index(d2) // lattice_index(w2.normal)
    c1 = w1.offset * k1
    c2 = w2.offset * k2
    g = lattice_index(n)
    normal = tuple(x // g for x in n)
    eq = (normal, (c1 + c2) / g)
    d1r = dot(d1, r)
    if d1r == 0:
        raise ScatterError("child direction is parallel to a parent wall")
    ineqs = [(tuple(-x for x in d1), -c1) if d1r > 0 else (tuple(d1), c1)]
    for a, bb in w1.support.ineqs + w2.support.ineqs:
        alpha = Fraction(dot(a, r)) / d1r
        a2 = tuple(Fraction(x) - alpha * y for x, y in zip(a, d1))
        if not any(a2):
            continue
        ineqs.append((a2, Fraction(bb) - alpha * c1))
    poly = Polyhedron(len(n), (eq,), tuple(ineqs)).irredundant()
    return normal, poly, r


def _ordered(w1: Wall, w2: Wall, alg) -> tuple[Wall, Wall]:
    pb = alg.pairing(w1.degree, w2.degree)
    return (w1, w2) if pb >= 0 else (w2, w1)


def complete(d: ScatteringDiagram, check: bool = False) -> ScatteringDiagram:
    """Add child walls for every compatible pair until nothing new appears."""
    alg = d.coeff
    if not getattr(alg, "abelian_walls", False):
        raise ScatterError("completion needs coefficients with Abelian walls")
    meta = dict(d.meta)
    meta.pop("_index", None)
    canonical = meta.get("canonical", False)
    keys = meta.get("keys", [])
    k = d.order
    walls = list(d.walls)
    next_id = max((w.id for w in walls), default=-1) + 1
    # bucket walls by degree to skip pairs that exceed the order quickly
    by_degree: dict[int, list[Wall]] = {}
    for w in walls:
        by_degree.setdefault(sum(w.degree), []).append(w)
    i = 0
    while i < len(walls):
        a = walls[i]
        da = sum(a.degree)
        for deg in range(1, k - da + 1):
            for bw in by_degree.get(deg, ()):
                if bw.id >= a.id or (a.elements & bw.elements):
                    continue
                if alg.pairing(a.degree, bw.degree) == 0:
                    continue
                if canonical:
                    mc = tuple(max(x, y) for x, y in zip(a.maxcopy, bw.maxcopy))
                    if _cost(mc, keys) > k:
                        continue
                else:
                    mc = tuple(max(x, y) for x, y in zip(a.maxcopy, bw.maxcopy))
                pt = joint_point(a, bw, d.rank)
                if pt is None:
                    continue
                first, second = _ordered(a, bw, alg)
                normal, support, r = child_support(first, second, d.b)
                func = qt_bracket(first.function, second.function)
                if func.is_zero():
                    continue
                if check:
                    if support.status(pt) == ph.OUTSIDE:
                        raise ScatterError("child support misses its joint")
                    far = tuple(p + x for p, x in zip(pt, r))
                    if support.status(far) == ph.OUTSIDE:
                        raise ScatterError("child support is not unbounded along its ray")
                child = Wall(
                    next_id,
                    normal,
                    support,
                    func,
                    degree=tuple(x + y for x, y in zip(a.degree, bw.degree)),
                    leaves=a.leaves | bw.leaves,
                    elements=a.elements | bw.elements,
                    parents=(first.id, second.id),
                    maxcopy=mc,
                )
                next_id += 1
                walls.append(child)
                by_degree.setdefault(sum(child.degree), []).append(child)
        i += 1
    meta["kind"] = "completed"
    return ScatteringDiagram(k, walls, alg, d.b, meta)


def perturb_and_complete(
    d_in: ScatteringDiagram,
    seed: int = 0,
    scheme: str = SCHEME_COPY,
    canonical: bool = True,
    retries: int = 100,
    check: bool = False,
) -> ScatteringDiagram:
    """Perturb with a seeded generator, resampling on degenerate joints."""
    last = None
    for attempt in range(retries):
        s = seed if attempt == 0 else seed * 1000003 + attempt
        try:
            out = complete(perturb(d_in, d_in.order, s, scheme, canonical), check=check)
            out.meta["seed"] = seed
            out.meta["effective_seed"] = s
            out.meta["resamples"] = attempt
            return out
        except DegenerateJoint as exc:
            last = exc
    raise ScatterError(f"genericity resampling exceeded {retries} retries: {last}")


# --------------------------------------------------------------------------
# asymptotics and specialization


def asymptotic(d: ScatteringDiagram) -> ScatteringDiagram:
    """Replace supports by their recession cones; drop walls whose cone is not codim 1."""
    out = []
    dropped = 0
    for w in d.walls:
        cone = Polyhedron(w.support.dim, ((w.normal, Fraction(0)),), w.support.recession_cone().ineqs)
        cone = cone.irredundant()
        if cone.relint_point() is None:
            dropped += 1
            continue
        out.append(replace(w, support=cone))
    meta = dict(d.meta)
    meta.pop("_index", None)
    meta["kind"] = "asymptotic"
    meta["dropped_low_dimensional"] = dropped
    return ScatteringDiagram(d.order, out, d.coeff, d.b, meta)


def _bits(mask: int) -> Iterable[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _leaf_table(d: ScatteringDiagram) -> dict:
    return {w.id: w.leaf for w in d.walls if w.leaf is not None}


def tag_weight(d: ScatteringDiagram, w: Wall, leaves: dict) -> Fraction:
    """Specialization weight of a tagged wall (0 when it does not contribute)."""
    scheme = d.meta.get("scheme")
    k = d.order
    labels = [leaves[lid] for lid in _bits(w.leaves)]
    if scheme == SCHEME_SUBSET:
        used: dict[int, int] = {}
        for i, _, J in labels:
            used[i] = used.get(i, 0) + len(J)
        out = Fraction(1)
        for s in used.values():
            out /= factorial(s) * comb(k, s)
        return out
    counts: dict = {}
    copies: dict = {}
    for i, wt, c in labels:
        counts[(i, wt)] = counts.get((i, wt), 0) + 1
        copies.setdefault((i, wt), set()).add(c)
    out = Fraction(1)
    for key, l in counts.items():
        if d.meta.get("canonical"):
            if copies[key] != set(range(1, l + 1)):
                return Fraction(0)
            out /= factorial(l)
        else:
            out /= factorial(l) * comb(k // key[1], l)
    return out


def weight_vector(w: Wall, leaves: dict) -> tuple:
    """Per-vertex sorted tuple of leaf weights."""
    per: dict[int, list] = {}
    for lid in _bits(w.leaves):
        i, wt, _ = leaves[lid]
        per.setdefault(i, []).append(wt)
    return tuple(sorted((i, tuple(sorted(v))) for i, v in per.items()))


def specialize(d: ScatteringDiagram) -> ScatteringDiagram:
    """Weight each tagged wall, then merge walls with equal support and normal."""
    leaves = d.meta.get("leaf_table") or _leaf_table(d)
    groups: dict = {}
    order: list = []
    for w in d.walls:
        if w.leaves:
            wt = tag_weight(d, w, leaves)
            if wt == 0:
                continue
            f = w.function.scale(ScalarRF.of(wt))
        else:
            f = w.function
        key = ph.canonical_cone_key(w.normal, w.support)
        if key not in groups:
            groups[key] = [w, f]
            order.append(key)
        else:
            groups[key][1] = groups[key][1] + f
    out = []
    for nid, key in enumerate(order):
        w, f = groups[key]
        if f.is_zero():
            continue
        out.append(Wall(nid, w.normal, w.support, f))
    meta = {k: v for k, v in d.meta.items() if not k.startswith("_")}
    meta["kind"] = "specialized"
    return ScatteringDiagram(d.order, out, d.coeff, d.b, meta)


def asymptotic_tagged(d: ScatteringDiagram) -> ScatteringDiagram:
    """Asymptotic diagram that keeps the leaf table for later specialization."""
    table = _leaf_table(d)
    out = asymptotic(d)
    out.meta["leaf_table"] = table
    return out


def pipeline(
    d_in: ScatteringDiagram,
    seed: int = 0,
    scheme: str = SCHEME_COPY,
    canonical: bool = True,
) -> tuple[ScatteringDiagram, ScatteringDiagram]:
    """perturb -> complete -> asymptotic -> specialize; returns (completed, specialized)."""
    full = perturb_and_complete(d_in, seed, scheme, canonical)
    return full, specialize(asymptotic_tagged(full))


# --------------------------------------------------------------------------
# evaluation at points and along paths


def walls_containing(d: ScatteringDiagram, x: Sequence) -> list[tuple[Wall, str]]:
    out = []
    for w in d.walls:
        st = w.support.status(x)
        if st != ph.OUTSIDE:
            out.append((w, st))
    return out


def wall_function_at(d: ScatteringDiagram, theta: Sequence) -> object:
    """Sum of the functions of walls whose support contains theta."""
    theta = tuple(Fraction(x) for x in theta)
    hits = walls_containing(d, theta)
    normals = {w.normal for w, _ in hits}
    if len(normals) > 1:
        raise NonGeneralPoint("point lies on walls with different normals")
    if any(st == ph.BOUNDARY for _, st in hits):
        raise NonGeneralPoint("point lies on the boundary of a wall")
    total = d.coeff.zero()
    for w, _ in hits:
        total = total + w.function
    return total


def crossings(d: ScatteringDiagram, start: Sequence, end: Sequence) -> list[tuple[Fraction, int, object]]:
    """Wall crossings along the segment start->end as (parameter, sign, summed function)."""
    start = tuple(Fraction(x) for x in start)
    end = tuple(Fraction(x) for x in end)
    vel = tuple(e - s for s, e in zip(start, end))
    found: dict[Fraction, list] = {}
    for w in d.walls:
        (n, c) = w.support.eqs[0]
        nv = dot(n, vel)
        ns = dot(n, start)
        if nv == 0:
            if ns == c and w.support.status(start) != ph.OUTSIDE:
                raise NonGeneralPoint("path runs inside a wall")
            continue
        s = (Fraction(c) - ns) / nv
        if s < 0 or s > 1:
            continue
        pt = tuple(a + s * v for a, v in zip(start, vel))
        st = w.support.status(pt)
        if st == ph.OUTSIDE:
            continue
        if s == 0 or s == 1:
            raise NonGeneralPoint("path endpoint lies on a wall")
        if st == ph.BOUNDARY:
            raise NonGeneralPoint("path crosses a joint")
        found.setdefault(s, []).append((w, nv))
    out = []
    for s in sorted(found):
        group = found[s]
        normals = {w.normal for w, _ in group}
        if len(normals) > 1:
            raise NonGeneralPoint("path crosses a joint")
        w0, nv = group[0]
        sign = 1 if nv < 0 else -1  # sign <n, -gamma'>
        f = group[0][0].function
        for w, _ in group[1:]:
            f = f + w.function
        out.append((s, sign, f))
    return out


def path_ordered_product(
    d: ScatteringDiagram, start: Sequence, end: Sequence, seed: int = 0, retries: int = 20
) -> QTElement:
    """Ordered product of exp(g)^(+-1) along a straight path; later walls act on the left."""
    try:
        return _segment_product(d, start, end)
    except NonGeneralPoint as exc:
        if _on_support(d, start) or _on_support(d, end):
            raise
        last = exc
    rng = random.Random(seed)
    mid = tuple((Fraction(a) + Fraction(b)) / 2 for a, b in zip(start, end))
    span = max(1, max(abs(Fraction(a) - Fraction(b)) for a, b in zip(start, end)))
    for _ in range(retries):
        wp = tuple(m + span * Fraction(rng.randint(-100, 100), 997) for m in mid)
        try:
            first = _segment_product(d, start, wp)
            second = _segment_product(d, wp, end)
            return qt_mul(second, first)
        except NonGeneralPoint as exc:
            last = exc
    raise NonGeneralPoint(f"could not route path around joints: {last}")


def _on_support(d: ScatteringDiagram, x) -> bool:
    return bool(walls_containing(d, tuple(Fraction(v) for v in x)))


def _segment_product(d: ScatteringDiagram, start, end) -> QTElement:
    alg = d.coeff
    phi = alg.one()
    for _, sign, f in crossings(d, start, end):
        phi = qt_mul(qt_exp(f if sign > 0 else -f), phi)
    return phi


def loop_product(d: ScatteringDiagram, vertices: Sequence[Sequence]) -> QTElement:
    phi = d.coeff.one()
    pts = list(vertices) + [vertices[0]]
    for a, b in zip(pts, pts[1:]):
        phi = qt_mul(_segment_product(d, a, b), phi)
    return phi


# --------------------------------------------------------------------------
# consistency and equivalence


def _complement_basis(directions: list[tuple], rank: int) -> list[tuple]:
    """Integer vectors completing `directions` to a basis of Q^rank."""
    chosen = [tuple(Fraction(x) for x in v) for v in directions]
    out = []
    for i in range(rank):
        e = tuple(Fraction(1 if j == i else 0) for j in range(rank))
        if _rank(chosen + out + [e]) > _rank(chosen + out):
            out.append(e)
    return out


def _rank(vs: list) -> int:
    if not vs:
        return 0
    rows = [list(v) for v in vs]
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


def joint_sites(d: ScatteringDiagram, rng: random.Random, count: int) -> list[tuple[tuple, list]]:
    """Sample points on codim-2 strata (pairwise intersections and wall facets)."""
    sites = []
    r = d.rank
    walls = d.walls
    for a, b in combinations(walls, 2):
        if a.normal == b.normal:
            continue
        sol = solve_affine([a.support.eqs[0], b.support.eqs[0]], r)
        if sol is None:
            continue
        poly = Polyhedron(r, (a.support.eqs[0], b.support.eqs[0]), a.support.ineqs + b.support.ineqs)
        if poly.relint_point() is not None:
            sites.append(poly)
    for w in walls:
        for idx, (a, bb) in enumerate(w.support.ineqs):
            rest = tuple(x for j, x in enumerate(w.support.ineqs) if j != idx)
            poly = Polyhedron(r, (w.support.eqs[0], (a, bb)), rest)
            if poly.relint_point() is not None:
                sites.append(poly)
    if not sites:
        return []
    out = []
    for _ in range(count):
        poly = sites[rng.randrange(len(sites))]
        pt = poly.random_relint_point(rng)
        sol = poly.parametrize()
        out.append((pt, sol[1]))
    return out


def consistency_check(
    d: ScatteringDiagram, loops: int = 50, seed: int = 0, radius: Fraction = Fraction(1, 50)
) -> dict:
    """Path-ordered products around small loops at sampled joints."""
    rng = random.Random(seed)
    r = d.rank
    sites = joint_sites(d, rng, loops)
    if not sites:
        sites = [(tuple(Fraction(0) for _ in range(r)), [])]
    failures = 0
    checked = 0
    one = d.coeff.one()
    for pt, joint_dirs in sites:
        normal_dirs = _complement_basis(joint_dirs, r)
        if len(normal_dirs) < 2:
            continue
        u, v = normal_dirs[0], normal_dirs[1]
        for _ in range(20):
            eps = radius * Fraction(rng.randint(50, 150), 100)
            tw = Fraction(rng.randint(1, 97), 101)
            uu = tuple(a + tw * b for a, b in zip(u, v))
            vv = tuple(b - tw * a for a, b in zip(u, v))
            corners = [
                tuple(p + eps * (sa * a + sb * b) for p, a, b in zip(pt, uu, vv))
                for sa, sb in ((1, 1), (-1, 1), (-1, -1), (1, -1))
            ]
            try:
                phi = loop_product(d, corners)
            except NonGeneralPoint:
                continue
            checked += 1
            if phi != one:
                failures += 1
            break
    return {"loops": checked, "failures": failures, "consistent": failures == 0 and checked > 0}


def support_cell_points(d: ScatteringDiagram, rng: random.Random) -> list[tuple]:
    pts = []
    for w in d.walls:
        p = w.support.random_relint_point(rng)
        if p is not None:
            pts.append(p)
    return pts


def random_general_points(rank: int, rng: random.Random, count: int) -> list[tuple]:
    return [tuple(Fraction(rng.randint(-997, 997), rng.randint(1, 97)) for _ in range(rank)) for _ in range(count)]


def equivalent(
    d1: ScatteringDiagram, d2: ScatteringDiagram, seed: int = 0, random_points: int = 20
) -> dict:
    """Compare g_{x,D} at one interior point per support cell plus random points."""
    rng = random.Random(seed)
    pts = support_cell_points(d1, rng) + support_cell_points(d2, rng)
    pts += random_general_points(d1.rank, rng, random_points)
    mismatches = []
    checked = 0
    for x in pts:
        try:
            g1 = wall_function_at(d1, x)
            g2 = wall_function_at(d2, x)
        except NonGeneralPoint:
            continue
        checked += 1
        if g1 != g2:
            mismatches.append(x)
    return {"points": checked, "mismatches": mismatches, "equivalent": not mismatches and checked > 0}


def is_incoming(d: ScatteringDiagram, w: Wall) -> bool:
    """A cone wall is incoming when it contains p*(n) (the opposite of its flow)."""
    return w.support.contains(tuple(Fraction(x) for x in d.p_star(w.normal)))


# --------------------------------------------------------------------------
# rank-2 oracle


def _generic_square(rng: random.Random) -> list[tuple]:
    def f():
        return Fraction(rng.randint(1, 89), 97)

    return [(Fraction(1), f()), (-f(), Fraction(1)), (Fraction(-1), -f()), (f(), Fraction(-1))]


def rank2_direct(d_in: ScatteringDiagram, order: Optional[int] = None, seed: int = 0) -> ScatteringDiagram:
    """Order-by-order completion by central rays R>=0(-p*(n)) at the origin."""
    if d_in.rank != 2:
        raise ScatterError("rank2_direct needs a rank-2 lattice")
    k_max = d_in.order if order is None else order
    rng = random.Random(seed)
    alg_full = d_in.coeff.with_order(k_max)
    walls = [replace(w, function=alg_full.element(w.function.terms)) for w in d_in.walls]
    next_id = max((w.id for w in walls), default=-1) + 1
    for k in range(1, k_max + 1):
        alg_k = alg_full.with_order(k)
        dk = ScatteringDiagram(k, [replace(w, function=alg_k.element(w.function.terms)) for w in walls], alg_k, d_in.b)
        for _ in range(50):
            square = _generic_square(rng)
            try:
                phi = loop_product(dk, square)
                break
            except NonGeneralPoint:
                continue
        else:
            raise ScatterError("could not find a generic loop")
        err = qt_log(phi).degree_part(k)
        for n, c in err.sorted_terms():
            ray = tuple(-x for x in p_star(d_in.b, n))
            if not any(ray):
                raise ScatterError("obstruction in the kernel of p*")
            normal = primitive(n)
            support = _ray_support(normal, ray)
            sign = _loop_sign(square, normal, ray)
            func = alg_full.monomial(n, -c if sign > 0 else c)
            walls.append(Wall(next_id, normal, support, func))
            next_id += 1
        dk = ScatteringDiagram(k, [replace(w, function=alg_k.element(w.function.terms)) for w in walls], alg_k, d_in.b)
        if loop_product(dk, square) != alg_k.one():
            raise ScatterError(f"loop product not trivial at order {k}")
    d = ScatteringDiagram(k_max, walls, alg_full, d_in.b, {"kind": "rank2_direct"})
    return merge_walls(d)


def _ray_support(normal, ray) -> Polyhedron:
    # inside normal^perp the half-line along `ray` is cut out by <-ray, x> <= 0
    return Polyhedron(2, ((tuple(normal), Fraction(0)),), ((tuple(Fraction(-x) for x in ray), Fraction(0)),))


def _loop_sign(square, normal, ray) -> int:
    """sign <n, -gamma'> where the counterclockwise square meets the ray."""
    pts = list(square) + [square[0]]
    for a, b in zip(pts, pts[1:]):
        vel = tuple(y - x for x, y in zip(a, b))
        nv = dot(normal, vel)
        if nv == 0:
            continue
        s = -Fraction(dot(normal, a)) / nv
        if 0 < s < 1:
            pt = tuple(x + s * v for x, v in zip(a, vel))
            if dot(ray, pt) > 0:
                return 1 if nv < 0 else -1
    raise ScatterError("loop misses the ray")


def merge_walls(d: ScatteringDiagram) -> ScatteringDiagram:
    groups: dict = {}
    order = []
    for w in d.walls:
        key = ph.canonical_cone_key(w.normal, w.support)
        if key not in groups:
            groups[key] = [w, w.function]
            order.append(key)
        else:
            groups[key][1] = groups[key][1] + w.function
    out = []
    for nid, key in enumerate(order):
        w, f = groups[key]
        if not f.is_zero():
            out.append(Wall(nid, w.normal, w.support, f))
    meta = {k: v for k, v in d.meta.items() if not k.startswith("_")}
    return ScatteringDiagram(d.order, out, d.coeff, d.b, meta)


# --------------------------------------------------------------------------
# serialization


def diagram_to_json(d: ScatteringDiagram, include_tags: bool = True) -> dict:
    walls = []
    for w in d.walls:
        item = {
            "id": w.id,
            "normal": list(w.normal),
            "support": w.support.to_json(),
            "function": w.function.to_json(),
        }
        if include_tags and w.leaves:
            item["tag"] = [list(_leaf_json(d, lid)) for lid in _bits(w.leaves)]
        if w.parents is not None:
            item["parents"] = list(w.parents)
        walls.append(item)
    meta = {k: v for k, v in d.meta.items() if not k.startswith("_") and k not in ("leaf_table", "keys")}
    return {"order": d.order, "form": [list(r) for r in d.b], "meta": meta, "walls": walls}


def _leaf_json(d: ScatteringDiagram, lid: int):
    table = d.meta.get("leaf_table") or _leaf_table(d)
    i, w, label = table[lid]
    if isinstance(label, frozenset):
        label = sorted(label)
    return (i + 1, w, label)
