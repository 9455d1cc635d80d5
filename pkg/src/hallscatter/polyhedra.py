"""Exact rational polyhedra given by equalities and inequalities.

Feasibility (with strict constraints) is decided by Fourier-Motzkin
elimination; a witness is recovered by back-substitution.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

Q = Fraction
QVec = tuple  # of Fraction/int

INSIDE = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"


def dot(a: Sequence, x: Sequence):
    return sum(ai * xi for ai, xi in zip(a, x) if ai and xi)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def normalize_constraint(a: Sequence, b) -> tuple[tuple[int, ...], Fraction]:
    """Scale (a, b) by a positive rational so that a is a primitive integer vector."""
    fa = [Fraction(x) for x in a]
    den = 1
    for x in fa:
        den = _lcm(den, x.denominator)
    ints = [int(x * den) for x in fa]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints), Fraction(b)
    return tuple(x // g for x in ints), Fraction(b) * den / g


def solve_affine(eqs: Sequence[tuple[Sequence, object]], dim: int):
    """Parametrize {x : <a,x> = c for (a,c) in eqs} as x0 + span(basis).

    Returns (x0, basis) with exact rationals, or None if inconsistent.
    """
    rows = [[Fraction(v) for v in a] + [Fraction(c)] for a, c in eqs]
    pivots: list[int] = []
    r = 0
    for col in range(dim):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(rows)):
        if rows[i][dim] != 0:
            return None
    x0 = [Fraction(0)] * dim
    for i, col in enumerate(pivots):
        x0[col] = rows[i][dim]
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * dim
        v[f] = Fraction(1)
        for i, col in enumerate(pivots):
            v[col] = -rows[i][f]
        basis.append(tuple(v))
    return tuple(x0), basis


# Fourier-Motzkin ---------------------------------------------------------

Constraint = tuple  # (coeffs tuple, bound Fraction, strict bool): coeffs . y (<|<=) bound


def _dedupe(cons: Iterable[Constraint]) -> list[Constraint]:
    best: dict = {}
    for a, b, s in cons:
        if not any(a):
            best.setdefault(("const",), []).append((a, b, s))
            continue
        na, nb = normalize_constraint(a, b)
        cur = best.get(na)
        if cur is None or nb < cur[1] or (nb == cur[1] and s and not cur[2]):
            best[na] = (na, nb, s)
    out = []
    for k, v in best.items():
        if k == ("const",):
            out.extend(v)
        else:
            out.append(v)
    return out


def fm_witness(cons: Sequence[Constraint], dim: int) -> Optional[tuple]:
    """Return a rational point satisfying all constraints, or None."""
    levels: list[list[Constraint]] = []
    cur = _dedupe([(tuple(Fraction(x) for x in a), Fraction(b), bool(s)) for a, b, s in cons])
    for k in range(dim - 1, -1, -1):
        levels.append(cur)
        pos, neg, rest = [], [], []
        for c in cur:
            ak = c[0][k]
            if ak > 0:
                pos.append(c)
            elif ak < 0:
                neg.append(c)
            else:
                rest.append((c[0][:k], c[1], c[2]))
        nxt = list(rest)
        for ap, bp, sp in pos:
            for an, bn, sn in neg:
                fp, fn = ap[k], -an[k]
                a = tuple(fn * x + fp * y for x, y in zip(ap[:k], an[:k]))
                nxt.append((a, fn * bp + fp * bn, sp or sn))
        cur = _dedupe(nxt)
    for a, b, s in cur:
        if (s and not b > 0) or (not s and b < 0):
            return None
    y: list[Fraction] = []
    for k in range(dim):
        level = levels[dim - 1 - k]
        lo, lo_s, hi, hi_s = None, False, None, False
        for a, b, s in level:
            ak = a[k]
            if ak == 0:
                continue
            rhs = (b - sum(a[i] * y[i] for i in range(k))) / ak
            if ak > 0:
                if hi is None or rhs < hi:
                    hi, hi_s = rhs, s
                elif rhs == hi:
                    hi_s = hi_s or s
            else:
                if lo is None or rhs > lo:
                    lo, lo_s = rhs, s
                elif rhs == lo:
                    lo_s = lo_s or s
        if lo is None and hi is None:
            v = Fraction(0)
        elif lo is None:
            v = hi - 1 if hi_s else hi
        elif hi is None:
            v = lo + 1 if lo_s else lo
        else:
            if lo > hi or (lo == hi and (lo_s or hi_s)):
                return None  # cannot happen for a feasible projection
            v = (lo + hi) / 2
        y.append(v)
    return tuple(y)


# Polyhedra ---------------------------------------------------------------


@dataclass(frozen=True)
class Polyhedron:
    dim: int
    eqs: tuple  # of (a, c): <a,x> = c
    ineqs: tuple  # of (a, b): <a,x> <= b

    def contains(self, x: Sequence) -> bool:
        return self.status(x) != OUTSIDE

    def status(self, x: Sequence) -> str:
        for a, c in self.eqs:
            if dot(a, x) != c:
                return OUTSIDE
        st = INSIDE
        for a, b in self.ineqs:
            v = dot(a, x)
            if v > b:
                return OUTSIDE
            if v == b:
                st = BOUNDARY
        return st

    def parametrize(self):
        return solve_affine(self.eqs, self.dim)

    def _param_constraints(self, strict: bool):
        sol = self.parametrize()
        if sol is None:
            return None
        x0, basis = sol
        cons = []
        for a, b in self.ineqs:
            coeffs = tuple(dot(a, v) for v in basis)
            cons.append((coeffs, Fraction(b) - dot(a, x0), strict))
        return x0, basis, cons

    def relint_point(self) -> Optional[tuple]:
        """A point with every inequality strict, or None if there is none."""
        data = self._param_constraints(True)
        if data is None:
            return None
        x0, basis, cons = data
        y = fm_witness(cons, len(basis))
        if y is None:
            return None
        return _lift(x0, basis, y)

    def is_nonempty(self) -> bool:
        data = self._param_constraints(False)
        if data is None:
            return False
        x0, basis, cons = data
        return fm_witness(cons, len(basis)) is not None

    def recession_cone(self) -> "Polyhedron":
        return Polyhedron(
            self.dim,
            tuple((a, Fraction(0)) for a, _ in self.eqs),
            tuple((a, Fraction(0)) for a, _ in self.ineqs),
        )

    def irredundant(self) -> "Polyhedron":
        """Drop inequalities implied by the rest (assumes nonempty relative interior)."""
        sol = self.parametrize()
        if sol is None:
            return self
        x0, basis = sol
        params = []
        for a, b in self.ineqs:
            coeffs = tuple(dot(a, v) for v in basis)
            rhs = Fraction(b) - dot(a, x0)
            if not any(coeffs):
                if rhs >= 0:
                    continue
            params.append(((a, b), coeffs, rhs))
        # merge parallel constraints keeping the tightest
        best: dict = {}
        order = []
        for item in params:
            _, coeffs, rhs = item
            if not any(coeffs):
                best[("empty",)] = item
                order.append(("empty",))
                continue
            key, nb = normalize_constraint(coeffs, rhs)
            if key not in best:
                order.append(key)
                best[key] = (item, nb)
            elif nb < best[key][1]:
                best[key] = (item, nb)
        items = []
        for k in order:
            v = best[k]
            items.append(v if k == ("empty",) else v[0])
        if len(basis) == 1:
            kept = _irredundant_1d(items)
        else:
            alive = list(range(len(items)))
            for idx in range(len(items)):
                others = [(items[j][1], items[j][2], False) for j in alive if j != idx]
                _, coeffs, rhs = items[idx]
                others.append((tuple(-x for x in coeffs), -rhs, True))
                if fm_witness(others, len(basis)) is None:
                    alive.remove(idx)
            kept = [items[i] for i in alive]
        return Polyhedron(self.dim, self.eqs, tuple(it[0] for it in kept))

    def translate(self, v: Sequence) -> "Polyhedron":
        return Polyhedron(
            self.dim,
            tuple((a, Fraction(c) + dot(a, v)) for a, c in self.eqs),
            tuple((a, Fraction(b) + dot(a, v)) for a, b in self.ineqs),
        )

    def random_relint_point(self, rng: random.Random, scale: int = 4) -> Optional[tuple]:
        """A pseudo-random point of the relative interior, or None."""
        base = self.relint_point()
        if base is None:
            return None
        sol = self.parametrize()
        x0, basis = sol
        pt = list(base)
        for _ in range(2 * max(1, len(basis))):
            if not basis:
                break
            d = [Fraction(rng.randint(-scale, scale)) for _ in basis]
            if not any(d):
                continue
            dirv = [sum(d[k] * basis[k][i] for k in range(len(basis))) for i in range(self.dim)]
            lo, hi = None, None
            for a, b in self.ineqs:
                av = dot(a, dirv)
                slack = Fraction(b) - dot(a, pt)
                if av > 0:
                    bound = slack / av
                    hi = bound if hi is None else min(hi, bound)
                elif av < 0:
                    bound = slack / av
                    lo = bound if lo is None else max(lo, bound)
            lo = Fraction(-scale) if lo is None else lo
            hi = Fraction(scale) if hi is None else hi
            frac = Fraction(rng.randint(1, 99), 100)
            s = lo + (hi - lo) * frac
            pt = [p + s * dv for p, dv in zip(pt, dirv)]
        return tuple(pt)

    def to_json(self) -> dict:
        return {
            "equalities": [{"a": [str(Fraction(x)) for x in a], "c": str(Fraction(c))} for a, c in self.eqs],
            "inequalities": [{"a": [str(Fraction(x)) for x in a], "b": str(Fraction(b))} for a, b in self.ineqs],
        }


def _irredundant_1d(items):
    lo_idx = hi_idx = None
    lo = hi = None
    kept_empty = []
    for idx, (_, coeffs, rhs) in enumerate(items):
        c = coeffs[0]
        if c == 0:
            kept_empty.append(items[idx])
            continue
        bound = rhs / c
        if c > 0:
            if hi is None or bound < hi:
                hi, hi_idx = bound, idx
        else:
            if lo is None or bound > lo:
                lo, lo_idx = bound, idx
    out = list(kept_empty)
    for idx in sorted(i for i in (lo_idx, hi_idx) if i is not None):
        out.append(items[idx])
    return out


def _lift(x0, basis, y):
    pt = list(x0)
    for yk, v in zip(y, basis):
        if yk:
            pt = [p + yk * vi for p, vi in zip(pt, v)]
    return tuple(pt)


def hyperplane(n: Sequence[int], c=0, ineqs: Sequence = ()) -> Polyhedron:
    return Polyhedron(
        len(n),
        ((tuple(n), Fraction(c)),),
        tuple((tuple(Fraction(x) for x in a), Fraction(b)) for a, b in ineqs),
    )


def canonical_cone_key(normal: Sequence[int], cone: Polyhedron) -> tuple:
    """Hashable description of an irredundant cone inside normal^perp."""
    p = next(i for i, x in enumerate(normal) if x != 0)
    rows = []
    for a, _ in cone.ineqs:
        f = Fraction(a[p]) / normal[p]
        red = tuple(Fraction(x) - f * y for x, y in zip(a, normal))
        if not any(red):
            continue
        na, _ = normalize_constraint(red, 0)
        rows.append(na)
    return tuple(normal), tuple(sorted(set(rows)))
