"""Composition Hall algebra of a Dynkin quiver, computed from finite-field counts.

Iso-classes are keyed by the multiset of dimension vectors of their
indecomposable summands.  Structure constants are counted over several
small primes and interpolated to polynomials in q = t^2.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Optional, Sequence

from . import ffield as ff
from .qtorus import QTAlgebra, QTElement
from .quiver import QuiverSpec, forms, is_dynkin, pair
from .scalar import ONE, ZERO, ScalarRF, from_q_poly, q_pow, r_k, t_pow

Key = tuple  # sorted tuple of root dimension vectors


class HallError(ValueError):
    pass


@dataclass(frozen=True)
class Rep:
    dims: tuple
    maps: tuple  # per arrow: matrix with dims[head] rows and dims[tail] cols


@dataclass(frozen=True)
class RepClass:
    dim_vector: tuple
    iso_key: Key
    witness: Rep


# ---------------------------------------------------------------------------
# roots and indecomposables


def tits_form(q: QuiverSpec, d: Sequence[int]) -> int:
    return sum(x * x for x in d) - sum(d[s] * d[t] for s, t in q.arrows)


def positive_roots(q: QuiverSpec, bound: int) -> list[tuple]:
    """Dimension vectors with Tits form 1 and coordinate sum <= bound."""
    n = q.vertex_count
    out = []
    for d in product(range(bound + 1), repeat=n):
        if 0 < sum(d) <= bound and tits_form(q, d) == 1 and _connected_support(q, d):
            out.append(tuple(d))
    return sorted(out, key=lambda d: (sum(d), d))


def _connected_support(q: QuiverSpec, d) -> bool:
    supp = {i for i, x in enumerate(d) if x}
    if not supp:
        return False
    start = next(iter(supp))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for s, t in q.arrows:
            for a, b in ((s, t), (t, s)):
                if a == v and b in supp and b not in seen:
                    seen.add(b)
                    stack.append(b)
    return seen == supp


def hom_dim(q: QuiverSpec, a: Rep, x: Rep, p: int) -> int:
    """dim Hom(a, x) over F_p."""
    n = q.vertex_count
    offs = []
    total = 0
    for v in range(n):
        offs.append(total)
        total += x.dims[v] * a.dims[v]
    if total == 0:
        return 0
    rows = []
    for arr, (s, t) in enumerate(q.arrows):
        xm, am = x.maps[arr], a.maps[arr]
        for i in range(x.dims[t]):
            for j in range(a.dims[s]):
                row = [0] * total
                # (X phi_s)[i][j] - (phi_t A)[i][j]
                for k in range(x.dims[s]):
                    c = xm[i][k]
                    if c:
                        idx = offs[s] + k * a.dims[s] + j
                        row[idx] = (row[idx] + c) % p
                for l in range(a.dims[t]):
                    c = am[l][j]
                    if c:
                        idx = offs[t] + i * a.dims[t] + l
                        row[idx] = (row[idx] - c) % p
                if any(row):
                    rows.append(row)
    return total - ff.rank(rows, total, p)


def end_dim(q: QuiverSpec, m: Rep, p: int) -> int:
    return hom_dim(q, m, m, p)


def direct_sum(q: QuiverSpec, reps: Sequence[Rep]) -> Rep:
    n = q.vertex_count
    dims = tuple(sum(r.dims[v] for r in reps) for v in range(n))
    maps = []
    for arr, (s, t) in enumerate(q.arrows):
        mat = [[0] * dims[s] for _ in range(dims[t])]
        ro = co = 0
        for r in reps:
            blk = r.maps[arr]
            for i in range(r.dims[t]):
                for j in range(r.dims[s]):
                    mat[ro + i][co + j] = blk[i][j]
            ro += r.dims[t]
            co += r.dims[s]
        maps.append(tuple(tuple(row) for row in mat))
    return Rep(dims, tuple(maps))


def find_indecomposable(q: QuiverSpec, d: tuple, primes: Sequence[int], seed: int = 0) -> Rep:
    """A 0/1 representation of dimension d that is a brick over every given prime."""
    rng = random.Random(hash((d, seed)) & 0xFFFFFFFF)
    shapes = [(d[t], d[s]) for s, t in q.arrows]

    def build(bits):
        maps, pos = [], 0
        for r, c in shapes:
            m = []
            for _ in range(r):
                m.append(tuple(bits[pos : pos + c]))
                pos += c
            maps.append(tuple(m))
        return Rep(d, tuple(maps))

    nbits = sum(r * c for r, c in shapes)
    for attempt in range(20000):
        bits = [rng.randint(0, 1) for _ in range(nbits)]
        cand = build(bits)
        if all(end_dim(q, cand, p) == 1 for p in primes):
            return cand
    raise HallError(f"no indecomposable found for dimension vector {d}")


# ---------------------------------------------------------------------------
# the algebra


class HallAlgebra:
    """Hall algebra of a Dynkin quiver, truncated at total dimension `order`."""

    abelian_walls = False

    def __init__(
        self,
        quiver: QuiverSpec,
        order: int = 4,
        primes: Optional[Sequence[int]] = None,
        dim_bound: int = 6,
        threads: int = 1,
    ):
        if not is_dynkin(quiver):
            raise HallError("Hall algebra backend supports Dynkin quivers only")
        if order > dim_bound:
            raise HallError(f"order {order} exceeds the dimension bound {dim_bound}")
        self.quiver = quiver
        self.order = order
        self.dim_bound = dim_bound
        self.primes = list(primes) if primes else ff.first_primes(14)
        self.threads = max(1, int(threads))
        self.b, self.chi = forms(quiver)
        self.roots = positive_roots(quiver, dim_bound)
        check_primes = self.primes[:6]
        self.indec = {r: find_indecomposable(quiver, r, check_primes) for r in self.roots}
        self._hom_matrix: dict = {}
        self._key_cache: dict = {}
        self._tally_cache: dict = {}
        self._poly_cache: dict = {}
        self._aut_cache: dict = {}
        self._classes_cache: dict = {}
        self.held_out_checks = 0

    # -- classes -----------------------------------------------------------

    def classes(self, d: Sequence[int]) -> list[Key]:
        d = tuple(d)
        if sum(d) > self.dim_bound:
            raise HallError(f"dimension {d} exceeds the bound {self.dim_bound}")
        if d in self._classes_cache:
            return self._classes_cache[d]
        roots = [r for r in self.roots if all(x <= y for x, y in zip(r, d))]
        out = []

        def rec(start, rem, acc):
            if not any(rem):
                out.append(tuple(sorted(acc)))
                return
            for idx in range(start, len(roots)):
                r = roots[idx]
                if all(x <= y for x, y in zip(r, rem)):
                    rec(idx, tuple(y - x for x, y in zip(r, rem)), acc + [r])

        rec(0, d, [])
        out = sorted(set(out))
        self._classes_cache[d] = out
        return out

    def rep_class(self, key: Key) -> RepClass:
        return RepClass(key_dim(key, self.quiver.vertex_count), key, self.witness(key))

    def witness(self, key: Key) -> Rep:
        n = self.quiver.vertex_count
        if not key:
            return Rep((0,) * n, tuple(((),) * 0 for _ in self.quiver.arrows))
        return direct_sum(self.quiver, [self.indec[r] for r in key])

    def enumerate_rep_classes(self, d: Sequence[int], p: Optional[int] = None) -> list[RepClass]:
        return [self.rep_class(k) for k in self.classes(d)]

    def simple_key(self, i: int, k: int = 1) -> Key:
        e = tuple(1 if j == i else 0 for j in range(self.quiver.vertex_count))
        return tuple([e] * k)

    # -- keys over F_p -----------------------------------------------------

    def _hom_table(self, dim: tuple, p: int):
        ck = (dim, p)
        if ck not in self._hom_matrix:
            roots = [r for r in self.roots if all(x <= y for x, y in zip(r, dim))]
            h = [[Fraction(hom_dim(self.quiver, self.indec[b], self.indec[g], p)) for g in roots] for b in roots]
            self._hom_matrix[ck] = (roots, _invert(h))
        return self._hom_matrix[ck]

    def iso_key(self, rep: Rep, p: int) -> Key:
        ck = (rep, p)
        hit = self._key_cache.get(ck)
        if hit is not None:
            return hit
        dims = rep.dims
        if not any(dims):
            return ()
        roots, inv = self._hom_table(dims, p)
        h = [hom_dim(self.quiver, self.indec[b], rep, p) for b in roots]
        mult = [sum(inv[i][j] * h[j] for j in range(len(h))) for i in range(len(h))]
        key = []
        for r, m in zip(roots, mult):
            if m.denominator != 1 or m < 0:
                raise HallError("inconsistent multiplicities while decomposing a representation")
            key.extend([r] * int(m))
        key = tuple(sorted(key))
        if key_dim(key, len(dims)) != dims:
            raise HallError("decomposition does not match the dimension vector")
        self._key_cache[ck] = key
        return key

    # -- counting ----------------------------------------------------------

    def subrep_tally(self, mkey: Key, a: tuple, p: int) -> dict:
        """Counts of subrepresentations of dim a, keyed by (iso(N), iso(M/N))."""
        ck = (mkey, a, p)
        if ck in self._tally_cache:
            return self._tally_cache[ck]
        m = _mod(self.witness(mkey), p)
        q = self.quiver
        n = q.vertex_count
        dims = m.dims
        b = tuple(x - y for x, y in zip(dims, a))
        if any(x < 0 for x in b):
            self._tally_cache[ck] = {}
            return {}
        tally: dict = {}
        live_arrows = [(i, s, t) for i, (s, t) in enumerate(q.arrows) if dims[s] and dims[t]]
        if not live_arrows:
            count = 1
            for v in range(n):
                count *= ff.gaussian_binomial(dims[v], a[v], p)
            ka = _semisimple_key(a)
            kb = _semisimple_key(b)
            tally[(ka, kb)] = count
            self._tally_cache[ck] = tally
            return tally
        choice: list = [None] * n
        order = list(range(n))

        def stable(v):
            for i, s, t in live_arrows:
                if (s == v and choice[t] is not None) or (t == v and choice[s] is not None) or (s == v == t):
                    rows_s, piv_s = choice[s]
                    rows_t, piv_t = choice[t]
                    mat = m.maps[i]
                    for u in rows_s:
                        if not ff.in_span(ff.matvec(mat, u, p), rows_t, piv_t, p):
                            return False
            return True

        def rec(idx):
            if idx == n:
                sub, quo = self._sub_and_quotient(m, choice, p)
                k = (self.iso_key(sub, p), self.iso_key(quo, p))
                tally[k] = tally.get(k, 0) + 1
                return
            v = order[idx]
            for sp in ff.subspaces(dims[v], a[v], p):
                choice[v] = sp
                if stable(v):
                    rec(idx + 1)
            choice[v] = None

        rec(0)
        self._tally_cache[ck] = tally
        return tally

    def _sub_and_quotient(self, m: Rep, choice, p: int) -> tuple[Rep, Rep]:
        q = self.quiver
        n = q.vertex_count
        comps = [tuple(c for c in range(m.dims[v]) if c not in choice[v][1]) for v in range(n)]
        sub_maps, quo_maps = [], []
        for i, (s, t) in enumerate(q.arrows):
            mat = m.maps[i]
            rows_s, piv_s = choice[s]
            rows_t, piv_t = choice[t]
            cols = [ff.coords_in(ff.matvec(mat, u, p), rows_t, piv_t) if m.dims[t] else () for u in rows_s]
            sub_maps.append(tuple(tuple(cols[j][r] for j in range(len(rows_s))) for r in range(len(rows_t))))
            qcols = []
            for c in comps[s]:
                e = [0] * m.dims[s]
                e[c] = 1
                img = ff.matvec(mat, e, p) if m.dims[t] else ()
                qcols.append(ff.quotient_coords(img, rows_t, piv_t, p, comps[t]) if m.dims[t] else ())
            quo_maps.append(tuple(tuple(qcols[j][r] for j in range(len(comps[s]))) for r in range(len(comps[t]))))
        sub = Rep(tuple(len(choice[v][0]) for v in range(n)), tuple(sub_maps))
        quo = Rep(tuple(len(comps[v]) for v in range(n)), tuple(quo_maps))
        return sub, quo

    def hall_number(self, mkey: Key, akey: Key, bkey: Key, p: int) -> int:
        a = key_dim(akey, self.quiver.vertex_count)
        return self.subrep_tally(mkey, a, p).get((akey, bkey), 0)

    def _interpolate(self, fn, degree: int) -> ScalarRF:
        need = degree + 2
        if need > len(self.primes):
            self.primes = ff.first_primes(need)
        pts = self.primes[:need]
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                vals = list(pool.map(fn, pts))
        else:
            vals = [fn(p) for p in pts]
        coeffs = lagrange(pts[:-1], vals[:-1])
        held = sum(Fraction(c) * pts[-1] ** k for k, c in enumerate(coeffs))
        if held != vals[-1]:
            raise HallError("interpolated count fails at the held-out prime")
        self.held_out_checks += 1
        return from_q_poly(coeffs)

    def hall_poly(self, mkey: Key, akey: Key, bkey: Key) -> ScalarRF:
        ck = (mkey, akey, bkey)
        if ck not in self._poly_cache:
            n = self.quiver.vertex_count
            a = key_dim(akey, n)
            b = key_dim(bkey, n)
            deg = sum(x * y for x, y in zip(a, b))
            self._poly_cache[ck] = self._interpolate(lambda p: self.hall_number(mkey, akey, bkey, p), deg)
        return self._poly_cache[ck]

    def aut_count(self, key: Key, p: int) -> int:
        """|Aut M| over F_p from dim End and the semisimple quotient of End."""
        e = end_dim(self.quiver, _mod(self.witness(key), p), p)
        mult: dict = {}
        for r in key:
            mult[r] = mult.get(r, 0) + 1
        out = p ** (e - sum(m * m for m in mult.values()))
        for m in mult.values():
            out *= ff.gl_order(m, p)
        return out

    def aut_order(self, key: Key) -> ScalarRF:
        if key not in self._aut_cache:
            e = end_dim(self.quiver, _mod(self.witness(key), 2), 2)
            self._aut_cache[key] = self._interpolate(lambda p: self.aut_count(key, p), e)
        return self._aut_cache[key]

    def flag_count(self, quotients: Sequence[Key], mkey: Key, p: int) -> int:
        """Number of filtrations 0 = M_0 < ... < M_k = M with M_i/M_{i-1} iso to quotients[i-1]."""
        n = self.quiver.vertex_count
        total = tuple(sum(x) for x in zip(*[key_dim(k, n) for k in quotients])) if quotients else (0,) * n
        if total != key_dim(mkey, n):
            raise HallError("dimension mismatch in flag count")
        if len(quotients) <= 1:
            return 1 if (not quotients or tuple(quotients[0]) == tuple(mkey)) else 0
        first = quotients[0]
        a = key_dim(first, n)
        out = 0
        for (ka, kb), c in self.subrep_tally(mkey, a, p).items():
            if ka == first:
                out += c * self.flag_count(quotients[1:], kb, p)
        return out

    # -- elements ----------------------------------------------------------

    def zero(self) -> "HallElement":
        return HallElement(self, {})

    def one(self) -> "HallElement":
        return HallElement(self, {(): ONE})

    def delta(self, key: Key, coeff=ONE) -> "HallElement":
        return HallElement(self, {tuple(key): ScalarRF.of(coeff)}).truncated()

    def kappa(self, key: Key, coeff=ONE) -> "HallElement":
        return self.delta(key, ScalarRF.of(coeff) * self.aut_order(tuple(key)))

    def kappa_simple(self, i: int, k: int = 1) -> "HallElement":
        return self.kappa(self.simple_key(i, k))

    def mul(self, x: "HallElement", y: "HallElement") -> "HallElement":
        out: dict = {}
        n = self.quiver.vertex_count
        for ka, ca in x.terms.items():
            da = key_dim(ka, n)
            for kb, cb in y.terms.items():
                db = key_dim(kb, n)
                d = tuple(u + v for u, v in zip(da, db))
                if sum(d) > self.order:
                    continue
                c = ca * cb
                if not ka:
                    _acc(out, kb, c)
                    continue
                if not kb:
                    _acc(out, ka, c)
                    continue
                for mk in self.classes(d):
                    g = self.hall_poly(mk, ka, kb)
                    if not g.is_zero():
                        _acc(out, mk, c * g)
        return HallElement(self, {k: v for k, v in out.items() if not v.is_zero()})

    def bracket(self, x: "HallElement", y: "HallElement") -> "HallElement":
        return self.mul(x, y) - self.mul(y, x)

    def log_one_sst(self, i: int, order: Optional[int] = None) -> "HallElement":
        """sum_k R_k kappa_i^k with kappa_i^k = q^{-k(k-1)/2} kappa_{k S_i}."""
        k_max = self.order if order is None else order
        out = self.zero()
        for k in range(1, k_max + 1):
            out = out + self.kappa_simple(i, k).scale(r_k(k) * q_pow(-k * (k - 1) // 2))
        return out

    def exp(self, x: "HallElement") -> "HallElement":
        if () in x.terms:
            raise HallError("exponential needs an element without degree-0 part")
        out = self.one()
        power = self.one()
        for k in range(1, self.order + 1):
            power = self.mul(power, x)
            if power.is_zero():
                break
            out = out + power.scale(ScalarRF.of(Fraction(1, factorial(k))))
        return out

    def integrate_t(self, x: "HallElement", qt: Optional[QTAlgebra] = None) -> QTElement:
        """delta_M -> t^{chi(d,d)} z^d / |Aut M|."""
        qt = qt or QTAlgebra(self.b, self.order)
        out = qt.zero()
        n = self.quiver.vertex_count
        for key, c in x.terms.items():
            d = key_dim(key, n)
            e = pair(self.chi, d, d)
            out = out + qt.monomial(d, c * t_pow(e) / self.aut_order(key))
        return out

    def integrate_classical(self, x: "HallElement", qt: Optional[QTAlgebra] = None) -> dict:
        """I_t followed by t -> 1; raises ZeroDivisionError where that limit is a pole."""
        return {n: c.at_one() for n, c in self.integrate_t(x, qt).terms.items()}

    def class_label(self, key: Key) -> str:
        if not key:
            return "0"
        return "+".join("".join(str(x) for x in r) for r in key)


class HallElement:
    __slots__ = ("alg", "terms")

    def __init__(self, alg: HallAlgebra, terms: dict):
        self.alg = alg
        self.terms = terms

    def truncated(self) -> "HallElement":
        n = self.alg.quiver.vertex_count
        return HallElement(
            self.alg, {k: v for k, v in self.terms.items() if sum(key_dim(k, n)) <= self.alg.order and not v.is_zero()}
        )

    def __add__(self, other: "HallElement") -> "HallElement":
        if other.alg is not self.alg:
            raise HallError("elements of different Hall algebras")
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return HallElement(self.alg, {k: v for k, v in out.items() if not v.is_zero()})

    def __neg__(self):
        return HallElement(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "HallElement":
        c = ScalarRF.of(c)
        if c.is_zero():
            return self.alg.zero()
        return HallElement(self.alg, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, HallElement):
            return self.alg.mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, HallElement):
            return NotImplemented
        return self.alg is other.alg and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, key: Key) -> ScalarRF:
        return self.terms.get(tuple(key), ZERO)

    def kappa_coeff(self, key: Key) -> ScalarRF:
        """Coefficient in the kappa basis: delta-coefficient / |Aut|."""
        return self.coeff(key) / self.alg.aut_order(tuple(key))

    def homogeneous(self, d: Sequence[int]) -> "HallElement":
        n = self.alg.quiver.vertex_count
        d = tuple(d)
        return HallElement(self.alg, {k: v for k, v in self.terms.items() if key_dim(k, n) == d})

    def degrees(self) -> set:
        n = self.alg.quiver.vertex_count
        return {key_dim(k, n) for k in self.terms}

    def to_json(self) -> list[dict]:
        n = self.alg.quiver.vertex_count
        items = sorted(self.terms.items(), key=lambda kv: (sum(key_dim(kv[0], n)), kv[0]))
        return [
            {"class": [list(r) for r in k], "dim": list(key_dim(k, n)), "coeff": v.text()} for k, v in items
        ]

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"[{v}]d[{self.alg.class_label(k)}]" for k, v in sorted(self.terms.items()))


# ---------------------------------------------------------------------------
# principal coefficients: elements sum z^m x_m with a_d z^m = q^{-s<d,m>} z^m a_d


class HallPrincipal:
    """Normal-ordered elements z^m * x of the Hall algebra twisted by the dual lattice.

    sign=+1 uses a_d z^m = q^{-<d,m>} z^m a_d; sign=-1 the opposite pairing.
    """

    def __init__(self, hall: HallAlgebra, sign: int = 1):
        if sign not in (1, -1):
            raise HallError("sign must be +1 or -1")
        self.hall = hall
        self.sign = sign

    def element(self, terms: dict) -> "PrinElement":
        return PrinElement(self, {k: v for k, v in terms.items() if not v.is_zero()})

    def zero(self) -> "PrinElement":
        return PrinElement(self, {})

    def monomial(self, m: Sequence[int], x: Optional[HallElement] = None) -> "PrinElement":
        x = x if x is not None else self.hall.one()
        return self.element({(tuple(m), k): v for k, v in x.terms.items()})

    def lift(self, x: HallElement) -> "PrinElement":
        n = self.hall.quiver.vertex_count
        return self.monomial((0,) * n, x)

    def commute_factor(self, d: Sequence[int], m: Sequence[int]) -> ScalarRF:
        return q_pow(-self.sign * sum(a * b for a, b in zip(d, m)))

    def principal_commute(self, x: HallElement, m: Sequence[int]) -> "PrinElement":
        """Normal-ordered form of x * z^m for homogeneous x."""
        degs = x.degrees()
        if len(degs) > 1:
            raise HallError("principal_commute needs a homogeneous element")
        if not degs:
            return self.zero()
        d = next(iter(degs))
        return self.monomial(m, x.scale(self.commute_factor(d, m)))

    def mul(self, x: "PrinElement", y: "PrinElement") -> "PrinElement":
        n = self.hall.quiver.vertex_count
        out: dict = {}
        for (m1, k1), c1 in x.terms.items():
            d1 = key_dim(k1, n)
            for (m2, k2), c2 in y.terms.items():
                f = self.commute_factor(d1, m2)
                prod = self.hall.mul(self.hall.delta(k1), self.hall.delta(k2))
                m = tuple(a + b for a, b in zip(m1, m2))
                for k, v in prod.terms.items():
                    _acc(out, (m, k), c1 * c2 * f * v)
        return PrinElement(self, {k: v for k, v in out.items() if not v.is_zero()})

    def bracket(self, x: "PrinElement", y: "PrinElement") -> "PrinElement":
        return self.mul(x, y) - self.mul(y, x)

    def ad_exp(self, g: HallElement, a: "PrinElement", sign: int = 1) -> "PrinElement":
        """exp(ad(sign*g)) applied to a, truncated by the Hall order."""
        gl = self.lift(g.scale(sign))
        out = a
        term = a
        for k in range(1, self.hall.order + 1):
            term = self.bracket(gl, term).scale(ScalarRF.of(Fraction(1, k)))
            if term.is_zero():
                break
            out = out + term
        return out

    def integrate_t(self, x: "PrinElement", qt: QTAlgebra) -> QTElement:
        """z^m kappa_M -> z^{(0,m)} t^{chi(d,d)} z^{(d,0)} in the principal quantum torus."""
        hall = self.hall
        n = hall.quiver.vertex_count
        out = qt.zero()
        for (m, key), c in x.terms.items():
            d = key_dim(key, n)
            zm = qt.monomial((0,) * n + tuple(m))
            zd = qt.monomial(tuple(d) + (0,) * n, c * t_pow(pair(hall.chi, d, d)) / hall.aut_order(key))
            out = out + zm * zd
        return out


class PrinElement:
    __slots__ = ("mod", "terms")

    def __init__(self, mod: HallPrincipal, terms: dict):
        self.mod = mod
        self.terms = terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return PrinElement(self.mod, {k: v for k, v in out.items() if not v.is_zero()})

    def __neg__(self):
        return PrinElement(self.mod, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PrinElement":
        c = ScalarRF.of(c)
        if c.is_zero():
            return self.mod.zero()
        return PrinElement(self.mod, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, PrinElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def homogeneous(self, d: Sequence[int], m: Sequence[int]) -> "PrinElement":
        n = self.mod.hall.quiver.vertex_count
        d, m = tuple(d), tuple(m)
        return PrinElement(
            self.mod, {k: v for k, v in self.terms.items() if k[0] == m and key_dim(k[1], n) == d}
        )

    def bidegrees(self) -> set:
        n = self.mod.hall.quiver.vertex_count
        return {(key_dim(k, n), m) for m, k in self.terms}

    def kappa_coeff(self, m: Sequence[int], key: Key) -> ScalarRF:
        return self.terms.get((tuple(m), tuple(key)), ZERO) / self.mod.hall.aut_order(tuple(key))

    def to_json(self) -> list[dict]:
        n = self.mod.hall.quiver.vertex_count
        items = sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]))
        return [
            {"m": list(m), "class": [list(r) for r in k], "dim": list(key_dim(k, n)), "coeff": v.text()}
            for (m, k), v in items
        ]

    def __repr__(self):
        if not self.terms:
            return "0"
        hall = self.mod.hall
        return " + ".join(f"[{v}]z^{m}d[{hall.class_label(k)}]" for (m, k), v in sorted(self.terms.items()))


# ---------------------------------------------------------------------------
# helpers


def key_dim(key: Key, n: int) -> tuple:
    d = [0] * n
    for r in key:
        for i, x in enumerate(r):
            d[i] += x
    return tuple(d)


def _semisimple_key(d: Sequence[int]) -> Key:
    n = len(d)
    out = []
    for i, x in enumerate(d):
        e = tuple(1 if j == i else 0 for j in range(n))
        out.extend([e] * x)
    return tuple(sorted(out))


def _mod(rep: Rep, p: int) -> Rep:
    return Rep(rep.dims, tuple(tuple(tuple(x % p for x in row) for row in m) for m in rep.maps))


def _acc(d: dict, k, v) -> None:
    cur = d.get(k)
    d[k] = v if cur is None else cur + v


def _invert(h: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(h)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(h)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [row[n:] for row in a]


def lagrange(xs: Sequence[int], ys: Sequence[int]) -> list[Fraction]:
    """Coefficients (constant first) of the interpolating polynomial."""
    n = len(xs)
    coeffs = [Fraction(0)] * n
    for i in range(n):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xs[j] * basis[k + 1]
            denom *= xs[i] - xs[j]
        for k in range(n):
            coeffs[k] += Fraction(ys[i]) * basis[k] / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


# ---------------------------------------------------------------------------
# stability walls of a Dynkin quiver, an independent description of the
# consistent quantum diagram


def subrep_dimensions(hall: HallAlgebra, key: Key, p: int = 2) -> list[tuple]:
    """Dimension vectors of proper nonzero subrepresentations."""
    n = hall.quiver.vertex_count
    d = key_dim(key, n)
    out = []
    for a in product(*[range(x + 1) for x in d]):
        if not any(a) or a == d:
            continue
        if hall.subrep_tally(key, a, p):
            out.append(a)
    return out


def stability_diagram(hall: HallAlgebra, order: Optional[int] = None):
    """Walls {<alpha,x> = 0, <beta,x> <= 0 for subrepresentation dims beta} with -Li(-z^alpha)."""
    from .polyhedra import Polyhedron
    from .qtorus import dilog_wall_function
    from .quiver import primitive
    from .scatter import ScatteringDiagram, Wall

    k = hall.order if order is None else order
    qt = QTAlgebra(hall.b, k)
    n = hall.quiver.vertex_count
    walls = []
    for idx, root in enumerate(r for r in hall.roots if sum(r) <= k):
        subs = subrep_dimensions(hall, (root,))
        poly = Polyhedron(n, ((root, Fraction(0)),), tuple((s, Fraction(0)) for s in subs)).irredundant()
        walls.append(Wall(idx, primitive(root), poly, dilog_wall_function(qt, primitive(root))))
    return ScatteringDiagram(k, walls, qt, hall.b, {"kind": "stability"})
