"""Truncated quantum torus algebras z^a z^b = t^{B(a,b)} z^{a+b}."""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from .quiver import lattice_index
from .scalar import ONE, ZERO, ScalarRF, T_MINUS_TINV, parse_scalar, r_prime, t_pow

Exp = tuple[int, ...]


class QTError(ValueError):
    pass


class QTAlgebra:
    """Quantum torus on Z^dim with skew form `form`, truncated by degree.

    The degree of an exponent is the sum of its first `graded_rank`
    coordinates; terms of degree above `order` are discarded.
    """

    # [z^{kn}, z^{ln}] = 0 because B(kn, ln) = 0
    abelian_walls = True

    def __init__(self, form: Sequence[Sequence[int]], order: int, graded_rank: int | None = None):
        self.form = tuple(tuple(int(x) for x in row) for row in form)
        self.dim = len(self.form)
        for i in range(self.dim):
            if len(self.form[i]) != self.dim:
                raise QTError("form must be square")
            for j in range(self.dim):
                if self.form[i][j] != -self.form[j][i]:
                    raise QTError("form must be skew-symmetric")
        if order < 0:
            raise QTError("order must be non-negative")
        self.order = int(order)
        self.graded_rank = self.dim if graded_rank is None else int(graded_rank)
        self._nz = [
            [(j, self.form[i][j]) for j in range(self.dim) if self.form[i][j]] for i in range(self.dim)
        ]

    @property
    def key(self):
        return (self.form, self.order, self.graded_rank)

    def with_order(self, order: int) -> "QTAlgebra":
        return QTAlgebra(self.form, order, self.graded_rank)

    def __eq__(self, other):
        return isinstance(other, QTAlgebra) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def pairing(self, a: Exp, b: Exp) -> int:
        s = 0
        for i, ai in enumerate(a):
            if ai:
                for j, f in self._nz[i]:
                    if b[j]:
                        s += ai * f * b[j]
        return s

    def degree(self, a: Exp) -> int:
        return sum(a[: self.graded_rank])

    # constructors
    def zero(self) -> "QTElement":
        return QTElement(self, {})

    def one(self) -> "QTElement":
        return QTElement(self, {(0,) * self.dim: ONE})

    def monomial(self, n: Sequence[int], coeff=ONE) -> "QTElement":
        n = tuple(int(x) for x in n)
        if len(n) != self.dim:
            raise QTError(f"exponent length {len(n)} does not match rank {self.dim}")
        c = ScalarRF.of(coeff)
        if c.is_zero() or self.degree(n) > self.order:
            return self.zero()
        return QTElement(self, {n: c})

    def element(self, terms: Mapping[Exp, ScalarRF]) -> "QTElement":
        out = {}
        for n, c in terms.items():
            n = tuple(n)
            c = ScalarRF.of(c)
            if not c.is_zero() and self.degree(n) <= self.order:
                out[n] = c
        return QTElement(self, out)

    def from_json(self, items: Iterable[Mapping]) -> "QTElement":
        return self.element({tuple(it["n"]): parse_scalar(it["coeff"]) for it in items})


class QTElement:
    __slots__ = ("alg", "terms")

    def __init__(self, alg: QTAlgebra, terms: dict):
        self.alg = alg
        self.terms = terms

    def _check(self, other: "QTElement") -> None:
        if not isinstance(other, QTElement):
            raise QTError("operand is not a quantum torus element")
        if other.alg is not self.alg and other.alg != self.alg:
            if other.alg.form != self.alg.form:
                raise QTError("mismatched forms")
            raise QTError("mismatched truncation order")

    def __add__(self, other: "QTElement") -> "QTElement":
        self._check(other)
        out = dict(self.terms)
        for n, c in other.terms.items():
            v = out.get(n)
            v = c if v is None else v + c
            if v.is_zero():
                out.pop(n, None)
            else:
                out[n] = v
        return QTElement(self.alg, out)

    def __neg__(self) -> "QTElement":
        return QTElement(self.alg, {n: -c for n, c in self.terms.items()})

    def __sub__(self, other: "QTElement") -> "QTElement":
        return self + (-other)

    def scale(self, c) -> "QTElement":
        c = ScalarRF.of(c)
        if c.is_zero():
            return self.alg.zero()
        return QTElement(self.alg, {n: v * c for n, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ScalarRF)):
            return self.scale(other)
        return qt_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, ScalarRF)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, QTElement):
            return NotImplemented
        return self.alg == other.alg and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, n: Sequence[int]) -> ScalarRF:
        return self.terms.get(tuple(n), ZERO)

    def homogeneous(self, n: Sequence[int]) -> "QTElement":
        n = tuple(n)
        return QTElement(self.alg, {n: self.terms[n]} if n in self.terms else {})

    def degree_part(self, d: int) -> "QTElement":
        return QTElement(self.alg, {n: c for n, c in self.terms.items() if self.alg.degree(n) == d})

    def min_degree(self) -> int | None:
        if not self.terms:
            return None
        return min(self.alg.degree(n) for n in self.terms)

    def truncate(self, order: int) -> "QTElement":
        alg = self.alg.with_order(order)
        return alg.element(self.terms)

    def sorted_terms(self) -> list[tuple[Exp, ScalarRF]]:
        return sorted(self.terms.items(), key=lambda kv: (self.alg.degree(kv[0]), kv[0]))

    def to_json(self) -> list[dict]:
        return [{"n": list(n), "coeff": c.text()} for n, c in self.sorted_terms()]

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"[{c}]z^{n}" for n, c in self.sorted_terms())


def qt_mul(a: QTElement, b: QTElement) -> QTElement:
    a._check(b)
    alg = a.alg
    out: dict = {}
    k = alg.order
    deg = alg.degree
    for n1, c1 in a.terms.items():
        d1 = deg(n1)
        for n2, c2 in b.terms.items():
            if d1 + deg(n2) > k:
                continue
            n = tuple(x + y for x, y in zip(n1, n2))
            e = alg.pairing(n1, n2)
            c = c1 * c2
            if e:
                c = c * t_pow(e)
            v = out.get(n)
            out[n] = c if v is None else v + c
    return QTElement(alg, {n: c for n, c in out.items() if not c.is_zero()})


def qt_bracket(a: QTElement, b: QTElement) -> QTElement:
    """Commutator ab - ba, computed termwise as (t^B - t^-B) z^{a+b}."""
    a._check(b)
    alg = a.alg
    out: dict = {}
    for n1, c1 in a.terms.items():
        d1 = alg.degree(n1)
        for n2, c2 in b.terms.items():
            if d1 + alg.degree(n2) > alg.order:
                continue
            e = alg.pairing(n1, n2)
            if e == 0:
                continue
            n = tuple(x + y for x, y in zip(n1, n2))
            c = c1 * c2 * (t_pow(e) - t_pow(-e))
            v = out.get(n)
            out[n] = c if v is None else v + c
    return QTElement(alg, {n: c for n, c in out.items() if not c.is_zero()})


def qt_poisson(a: QTElement, b: QTElement) -> QTElement:
    """{a,b} = [a,b]/(t - t^-1)."""
    return qt_bracket(a, b).scale(T_MINUS_TINV.inverse())


def _check_nilpotent(g: QTElement) -> None:
    for n in g.terms:
        if g.alg.degree(n) <= 0:
            raise QTError("exponential needs an element without degree-0 part")


def qt_exp(g: QTElement) -> QTElement:
    _check_nilpotent(g)
    alg = g.alg
    out = alg.one()
    power = alg.one()
    if g.is_zero():
        return out
    lo = g.min_degree()
    k = 1
    while k * lo <= alg.order:
        power = qt_mul(power, g)
        if power.is_zero():
            break
        out = out + power.scale(ScalarRF.of(Fraction(1, factorial(k))))
        k += 1
    return out


def qt_log(u: QTElement) -> QTElement:
    alg = u.alg
    zero_exp = (0,) * alg.dim
    if u.coeff(zero_exp) != ONE:
        raise QTError("logarithm needs degree-0 part equal to 1")
    x = u - alg.one()
    _check_nilpotent(x)
    out = alg.zero()
    if x.is_zero():
        return out
    lo = x.min_degree()
    power = alg.one()
    k = 1
    while k * lo <= alg.order:
        power = qt_mul(power, x)
        if power.is_zero():
            break
        sign = 1 if k % 2 == 1 else -1
        out = out + power.scale(ScalarRF.of(Fraction(sign, k)))
        k += 1
    return out


def qt_conjugate(phi: QTElement, phi_inv: QTElement, a: QTElement) -> QTElement:
    return qt_mul(qt_mul(phi, a), phi_inv)


def dilog_wall_function(alg: QTAlgebra, n: Sequence[int]) -> QTElement:
    """-Li(-z^n; t) = sum_k R'_k z^{kn}, truncated at the algebra's order."""
    n = tuple(int(x) for x in n)
    if any(x < 0 for x in n[: alg.graded_rank]) or alg.degree(n) <= 0:
        raise QTError("dilogarithm exponent must lie in the positive cone")
    if lattice_index(n) != 1:
        raise QTError("dilogarithm exponent must be primitive")
    terms = {}
    k = 1
    while k * alg.degree(n) <= alg.order:
        terms[tuple(k * x for x in n)] = r_prime(k)
        k += 1
    return QTElement(alg, terms)
