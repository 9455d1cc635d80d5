"""Tropical disks read off from completed perturbed diagrams, and their multiplicities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Callable, Optional, Sequence

from . import polyhedra as ph
from .polyhedra import dot
from .qtorus import QTAlgebra, QTElement, qt_bracket, qt_mul
from .quiver import lattice_index, p_star, pair, primitive
from .scalar import ONE, T_MINUS_TINV, ScalarRF, quantum_integer, r_k, r_prime, r_scl
from .scatter import (
    SCHEME_COPY,
    NonGeneralPoint,
    ScatteringDiagram,
    Wall,
    _bits,
    _leaf_table,
    asymptotic_tagged,
    tag_weight,
)


class TropicalError(ValueError):
    pass


@dataclass(frozen=True)
class WeightVector:
    """Per-vertex sorted leaf weights, e.g. ((0, (1, 1)), (1, (1, 2)))."""

    parts: tuple

    @classmethod
    def from_leaves(cls, leaves: Sequence[tuple]) -> "WeightVector":
        per: dict = {}
        for i, w in leaves:
            per.setdefault(i, []).append(w)
        return cls(tuple(sorted((i, tuple(sorted(v))) for i, v in per.items())))

    def length(self) -> int:
        return sum(len(v) for _, v in self.parts)

    def aut_order(self) -> int:
        out = 1
        for _, ws in self.parts:
            for w in set(ws):
                out *= factorial(ws.count(w))
        return out

    def n(self, rank: int) -> tuple:
        out = [0] * rank
        for i, ws in self.parts:
            out[i] += sum(ws)
        return tuple(out)

    def weights(self) -> list:
        return [w for _, ws in self.parts for w in ws]

    def r(self) -> ScalarRF:
        out = ONE
        for w in self.weights():
            out = out * r_k(w)
        return out

    def r_prime(self) -> ScalarRF:
        out = ONE
        for w in self.weights():
            out = out * r_prime(w)
        return out

    def r_scl(self, sign: str = "alternating") -> Fraction:
        out = Fraction(1)
        for w in self.weights():
            out *= r_scl(w, sign)
        return out

    def to_json(self) -> list:
        return [{"vertex": i + 1, "weights": list(ws)} for i, ws in self.parts]


@dataclass(frozen=True)
class DiskNode:
    """An edge of the disk together with the subtree it bounds.

    `end` is where the edge meets its parent vertex (or V_inf); `point` is
    the lower vertex for internal edges and None for unbounded leaf edges.
    """

    wall_id: int
    n: tuple
    end: tuple
    point: Optional[tuple]
    children: tuple = ()
    leaf: Optional[tuple] = None  # (vertex, weight, label)

    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class DiskType:
    root: DiskNode
    v_inf: tuple
    b: tuple
    ww: WeightVector

    def internal_nodes(self) -> list[DiskNode]:
        out = []

        def rec(node):
            if node.children:
                out.append(node)
                for c in node.children:
                    rec(c)

        rec(self.root)
        return out

    def leaves(self) -> list[DiskNode]:
        out = []

        def rec(node):
            if node.is_leaf():
                out.append(node)
            for c in node.children:
                rec(c)

        rec(self.root)
        return out

    def edges(self) -> list[DiskNode]:
        out = []

        def rec(node):
            out.append(node)
            for c in node.children:
                rec(c)

        rec(self.root)
        return out

    def vertex_count(self) -> int:
        return len(self.internal_nodes())

    def edge_weight(self, node: DiskNode) -> int:
        return lattice_index(p_star(self.b, node.n))

    def to_json(self) -> dict:
        edges = self.edges()
        ids = {id(e): k for k, e in enumerate(edges)}
        items = []
        for e in edges:
            ps = p_star(self.b, e.n)
            w = lattice_index(ps)
            items.append(
                {
                    "edge": ids[id(e)],
                    "wall": e.wall_id,
                    "n": list(e.n),
                    "weight": w,
                    "direction": [x // w for x in ps] if w else list(ps),
                    "end": [str(x) for x in e.end],
                    "vertex": None if e.point is None else [str(x) for x in e.point],
                    "children": [ids[id(c)] for c in e.children],
                    "leaf": None if e.leaf is None else [e.leaf[0] + 1, e.leaf[1]],
                }
            )
        return {"v_inf": [str(x) for x in self.v_inf], "weight_vector": self.ww.to_json(), "edges": items}


@dataclass(frozen=True)
class RibbonType:
    disk: DiskType
    flips: tuple  # one bool per internal node, in internal_nodes() order
    nu: int
    leaf_order: tuple  # (vertex, weight) in ribbon order

    def to_json(self) -> dict:
        return {
            "flips": [int(f) for f in self.flips],
            "nu": self.nu,
            "leaf_order": [[i + 1, w] for i, w in self.leaf_order],
        }


# ---------------------------------------------------------------------------
# extraction


def extract_disk(d: ScatteringDiagram, wall: Wall, x: Optional[Sequence] = None) -> DiskType:
    """Walk the ancestry of a wall back to the perturbed leaves."""
    if x is None:
        x = wall.support.relint_point()
        if x is None:
            raise TropicalError(f"wall {wall.id} has empty relative interior")
    x = tuple(Fraction(v) for v in x)
    if not wall.support.contains(x):
        raise TropicalError("disk endpoint is not on the wall")
    if wall.leaves == 0:
        raise TropicalError("wall lacks ancestry data")
    table = d.meta.get("leaf_table") or _leaf_table(d)
    root = _extract(d, wall, x)
    leaves = [table[lid] for lid in _bits(wall.leaves)]
    ww = WeightVector.from_leaves([(i, w) for i, w, _ in leaves])
    return DiskType(root, x, d.b, ww)


def _extract(d: ScatteringDiagram, wall: Wall, end: tuple) -> DiskNode:
    n = tuple(wall.degree)
    if wall.parents is None:
        if wall.leaf is None:
            raise TropicalError("wall lacks ancestry data")
        if wall.support.status(end) == ph.OUTSIDE:
            raise TropicalError("leaf edge does not meet its constraint hyperplane")
        return DiskNode(wall.id, n, end, None, (), wall.leaf)
    p1, p2 = d.wall(wall.parents[0]), d.wall(wall.parents[1])
    r = tuple(-x for x in p_star(d.b, n))
    (a1, c1) = p1.support.eqs[0]
    ar = dot(a1, r)
    if ar == 0:
        raise TropicalError("edge is parallel to a parent wall")
    s = (dot(a1, end) - Fraction(c1)) / ar
    if s < 0:
        raise TropicalError("parent joint lies ahead of the edge")
    v = tuple(e - s * ri for e, ri in zip(end, r))
    for p in (p1, p2):
        if p.support.status(v) == ph.OUTSIDE:
            raise TropicalError(f"vertex misses parent wall {p.id}")
    kids = (_extract(d, p1, v), _extract(d, p2, v))
    return DiskNode(wall.id, n, end, v, kids)


def check_disk(tau: DiskType) -> dict:
    """Balancing, trivalence and realization checks."""
    b = tau.b
    balanced = True
    trivalent = True
    realized = True
    for node in tau.internal_nodes():
        if len(node.children) != 2:
            trivalent = False
        flows = [tuple(-x for x in p_star(b, node.n))] + [tuple(p_star(b, c.n)) for c in node.children]
        total = [0] * len(b)
        for f in flows:
            w = lattice_index(f)
            if w == 0:
                balanced = False
                continue
            u = tuple(x // w for x in f)
            total = [t + w * ui for t, ui in zip(total, u)]
            if len({primitive(g) for g in flows if any(g)}) != 3:
                trivalent = False
        if any(total):
            balanced = False
        # realization: outgoing edge runs from the vertex toward its end along -p*(n)
        if not _nonneg_multiple(tuple(e - v for e, v in zip(node.end, node.point)), flows[0]):
            realized = False
        for c in node.children:
            if c.end != node.point:
                realized = False
    if tau.root.end != tau.v_inf:
        realized = False
    for leaf in tau.leaves():
        if leaf.leaf is None:
            realized = False
    return {"balanced": balanced, "trivalent": trivalent, "realized": realized}


def _nonneg_multiple(v: tuple, u: tuple) -> bool:
    k = next((i for i, x in enumerate(u) if x), None)
    if k is None:
        return not any(v)
    lam = Fraction(v[k]) / u[k]
    return lam >= 0 and all(Fraction(a) == lam * b for a, b in zip(v, u))


# ---------------------------------------------------------------------------
# multiplicities


def quantum_leaf(alg: QTAlgebra) -> Callable[[int, int], QTElement]:
    def leaf(i: int, w: int) -> QTElement:
        n = tuple(w if j == i else 0 for j in range(alg.dim))
        return alg.monomial(n, r_prime(w))

    return leaf


def _ordered_children(tau: DiskType, node: DiskNode) -> tuple:
    c1, c2 = node.children
    return (c1, c2) if pair(tau.b, c1.n, c2.n) >= 0 else (c2, c1)


def disk_mult(tau: DiskType, leaf_fn: Callable, bracket: Callable = qt_bracket):
    """Iterated-bracket value at the outgoing edge."""

    def rec(node):
        if node.is_leaf():
            i, w, _ = node.leaf
            return leaf_fn(i, w)
        if len(node.children) != 2:
            raise TropicalError("disk is not trivalent")
        a, b = _ordered_children(tau, node)
        return bracket(rec(a), rec(b))

    return rec(tau.root)


def ribbons(tau: DiskType) -> list[RibbonType]:
    nodes = tau.internal_nodes()
    pos = {id(n): k for k, n in enumerate(nodes)}
    out = []
    for flips in product((False, True), repeat=len(nodes)):
        order = []

        def rec(node):
            if node.is_leaf():
                order.append((node.leaf[0], node.leaf[1]))
                return
            a, b = _ordered_children(tau, node)
            if flips[pos[id(node)]]:
                a, b = b, a
            rec(a)
            rec(b)

        rec(tau.root)
        nu = (-1) ** sum(flips)
        out.append(RibbonType(tau, tuple(flips), nu, tuple(order)))
    return out


def ribbon_mults(tau: DiskType, leaf_fn: Callable, mul: Callable = qt_mul) -> list[tuple[RibbonType, object]]:
    """Each ribbon structure with nu times the ordered product of leaf functions."""
    out = []
    for rib in ribbons(tau):
        acc = None
        for i, w in rib.leaf_order:
            f = leaf_fn(i, w)
            acc = f if acc is None else mul(acc, f)
        out.append((rib, acc if rib.nu > 0 else -acc))
    return out


def vertex_mults(tau: DiskType) -> list[int]:
    return [abs(pair(tau.b, *(c.n for c in node.children))) for node in tau.internal_nodes()]


def refined_mults(tau: DiskType) -> ScalarRF:
    """R'_ww * prod_V [Mult(V)]_t."""
    out = tau.ww.r_prime()
    for m in vertex_mults(tau):
        out = out * quantum_integer(m)
    return out


def classical_mult(tau: DiskType, sign: str = "alternating") -> Fraction:
    out = tau.ww.r_scl(sign)
    for m in vertex_mults(tau):
        out *= m
    return out


def refined_disk_value(tau: DiskType, alg: QTAlgebra) -> QTElement:
    """The quantum bracket value predicted by the vertex formula."""
    nv = tau.vertex_count()
    c = refined_mults(tau) * T_MINUS_TINV**nv
    return alg.monomial(tau.root.n, c)


def leaf_normalization(d: ScatteringDiagram, tau: DiskType) -> int:
    """Factor relating a wall function to the disk multiplicity (prod w! for subset tags)."""
    if d.meta.get("scheme") == SCHEME_COPY:
        return 1
    out = 1
    for w in tau.ww.weights():
        out *= factorial(w)
    return out


def flag_form(rib: RibbonType, hall, qt: QTAlgebra) -> dict:
    """Hall route and product route for nu * I_t(R_ww * Flag(ribbon))."""
    hall_el = hall.one()
    for i, w in rib.leaf_order:
        for _ in range(w):
            hall_el = hall.mul(hall_el, hall.kappa_simple(i))
    hall_el = hall_el.scale(rib.disk.ww.r())
    via_hall = hall.integrate_t(hall_el, qt)
    via_product = qt.one()
    for i, w in rib.leaf_order:
        via_product = qt_mul(via_product, qt.monomial(tuple(w if j == i else 0 for j in range(qt.dim))))
    via_product = via_product.scale(rib.disk.ww.r_prime())
    if rib.nu < 0:
        via_hall, via_product, hall_el = -via_hall, -via_product, -hall_el
    return {"flag": hall_el, "hall_route": via_hall, "product_route": via_product, "agree": via_hall == via_product}


# ---------------------------------------------------------------------------
# assembly at a point


def _canonical_tag(d: ScatteringDiagram, w: Wall, table: dict) -> bool:
    copies: dict = {}
    for lid in _bits(w.leaves):
        i, wt, c = table[lid]
        copies.setdefault((i, wt), set()).add(c)
    return all(v == set(range(1, len(v) + 1)) for v in copies.values())


def disks_at(completed: ScatteringDiagram, theta: Sequence, asym: Optional[ScatteringDiagram] = None) -> list:
    """(wall, disk, coefficient) for every tagged wall whose asymptotic support contains theta."""
    theta = tuple(Fraction(x) for x in theta)
    asym = asym or asymptotic_tagged(completed)
    table = asym.meta["leaf_table"]
    out = []
    normals = set()
    canonical_copy = completed.meta.get("scheme") == SCHEME_COPY and completed.meta.get("canonical")
    for aw in asym.walls:
        st = aw.support.status(theta)
        if st == ph.OUTSIDE:
            continue
        if st == ph.BOUNDARY:
            raise NonGeneralPoint("point lies on the boundary of an asymptotic wall")
        normals.add(aw.normal)
        w = completed.wall(aw.id)
        tau = extract_disk(completed, w)
        if canonical_copy:
            if not _canonical_tag(completed, w, table):
                continue
            coeff = Fraction(1, tau.ww.aut_order())
        else:
            coeff = tag_weight(asym, aw, table) * leaf_normalization(completed, tau)
            if coeff == 0:
                continue
        out.append((w, tau, coeff))
    if len(normals) > 1:
        raise NonGeneralPoint("point lies on walls with different normals")
    return out


def n_theta(completed: ScatteringDiagram, theta: Sequence, method: str = "refined", asym=None) -> QTElement:
    """Sum over tropical disks ending at theta of Mult/|Aut(ww)|."""
    alg = completed.coeff
    total = alg.zero()
    leaf = quantum_leaf(alg)
    for w, tau, coeff in disks_at(completed, theta, asym):
        if method == "refined":
            m = refined_disk_value(tau, alg)
        elif method == "bracket":
            m = disk_mult(tau, leaf)
        elif method == "ribbon":
            m = alg.zero()
            for _, v in ribbon_mults(tau, leaf):
                m = m + v
        else:
            raise TropicalError(f"unknown multiplicity method {method!r}")
        total = total + m.scale(ScalarRF.of(coeff))
    return total


def hall_tropical_sum(completed: ScatteringDiagram, theta: Sequence, hall, asym=None) -> QTElement:
    """sum_ww 1/|Aut(ww)| sum_ribbons nu I_t(R_ww Flag(ribbon)) computed in the Hall algebra."""
    alg = completed.coeff
    total = alg.zero()
    cache: dict = {}
    for w, tau, coeff in disks_at(completed, theta, asym):
        for rib in ribbons(tau):
            key = rib.leaf_order
            if key not in cache:
                el = hall.one()
                for i, wt in key:
                    for _ in range(wt):
                        el = hall.mul(el, hall.kappa_simple(i))
                cache[key] = hall.integrate_t(el, alg)
            v = cache[key].scale(tau.ww.r() * ScalarRF.of(coeff * rib.nu))
            total = total + v
    return total


def disks_to_json(items: list) -> list[dict]:
    out = []
    for w, tau, coeff in items:
        checks = check_disk(tau)
        out.append(
            {
                "wall": w.id,
                "coefficient": str(coeff),
                "disk": tau.to_json(),
                "checks": checks,
                "vertex_mults": vertex_mults(tau),
                "refined": refined_mults(tau).text(),
                "ribbons": [r.to_json() for r in ribbons(tau)],
            }
        )
    return out
