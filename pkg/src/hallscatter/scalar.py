"""Exact rational functions in the quantum parameter t, with q = t^2.

Values are kept as reduced fractions of integer polynomials (backed by
FLINT), so equality is a structural comparison.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

from flint import fmpq, fmpz_poly

Number = Union[int, Fraction]

_ONE = fmpz_poly([1])
_ZERO = fmpz_poly([])


def _normalize(num: fmpz_poly, den: fmpz_poly) -> tuple[fmpz_poly, fmpz_poly]:
    if den.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if num.is_zero():
        return _ZERO, _ONE
    g = num.gcd(den)
    if g != _ONE:
        num = num // g
        den = den // g
    if den.coeffs()[-1] < 0:
        num, den = -num, -den
    return num, den


class ScalarRF:
    """Element of Q(t), stored as a reduced p(t)/q(t) with positive leading denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: fmpz_poly, den: fmpz_poly = _ONE, *, reduced: bool = False):
        if not reduced:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def of(cls, value: "ScalarRF | Number") -> "ScalarRF":
        if isinstance(value, ScalarRF):
            return value
        if isinstance(value, int):
            return cls(fmpz_poly([value]), _ONE, reduced=True)
        if isinstance(value, Fraction):
            return cls(fmpz_poly([value.numerator]), fmpz_poly([value.denominator]))
        raise TypeError(f"cannot coerce {type(value).__name__} to ScalarRF")

    # arithmetic
    def __add__(self, other):
        try:
            o = ScalarRF.of(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return ScalarRF(self.num + o.num, self.den)
        return ScalarRF(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return ScalarRF(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        try:
            o = ScalarRF.of(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return ScalarRF.of(other) - self

    def __mul__(self, other):
        try:
            o = ScalarRF.of(other)
        except TypeError:
            return NotImplemented
        if self.num.is_zero() or o.num.is_zero():
            return ZERO
        return ScalarRF(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "ScalarRF":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return ScalarRF(self.den, self.num)

    def __truediv__(self, other):
        try:
            o = ScalarRF.of(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return ScalarRF.of(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return ScalarRF(self.num**k, self.den**k, reduced=True)

    # comparisons
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ScalarRF.of(other)
        if not isinstance(other, ScalarRF):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(int(c) for c in self.num.coeffs()), tuple(int(c) for c in self.den.coeffs())))
        return self._hash

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    # evaluation
    def evaluate(self, value: Number) -> Fraction:
        v = fmpq(Fraction(value).numerator, Fraction(value).denominator)
        d = self.den(v)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at t={value}")
        r = self.num(v) / d
        return Fraction(int(r.p), int(r.q))

    def at_one(self) -> Fraction:
        """The classical specialization t -> 1, defined only off poles."""
        return self.evaluate(1)

    def is_polynomial_in_t(self) -> bool:
        return self.den.degree() == 0 and self.den.coeffs()[0] == 1

    def text(self) -> str:
        return f"{_poly_text(self.num)}/{_poly_text(self.den)}"

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"ScalarRF({self.text()!r})"


def _poly_text(p: fmpz_poly) -> str:
    coeffs = [int(c) for c in p.coeffs()]
    if not coeffs:
        return "(0)"
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if k == 0:
            mono = str(a)
        else:
            base = "t" if k == 1 else f"t^{k}"
            mono = base if a == 1 else f"{a}*{base}"
        parts.append((sign, mono))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, mono in parts[1:]:
        out += f" {sign} {mono}"
    return f"({out})"


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(t(?:\^(\d+))?)?")


def _parse_poly(text: str) -> fmpz_poly:
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    s = s.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r}")
        sign, digits, tpart, power = m.groups()
        if not digits and not tpart:
            raise ValueError(f"cannot parse polynomial {text!r}")
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        k = 0 if not tpart else (int(power) if power else 1)
        coeffs[k] = coeffs.get(k, 0) + c
        pos = m.end()
    top = max(coeffs)
    return fmpz_poly([coeffs.get(k, 0) for k in range(top + 1)])


def parse_scalar(text: str) -> ScalarRF:
    """Inverse of ScalarRF.text()."""
    depth = 0
    split = None
    for idx, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            split = idx
    if split is None:
        return ScalarRF(_parse_poly(text))
    return ScalarRF(_parse_poly(text[:split]), _parse_poly(text[split + 1 :]))


ZERO = ScalarRF(_ZERO, _ONE, reduced=True)
ONE = ScalarRF(_ONE, _ONE, reduced=True)
T = ScalarRF(fmpz_poly([0, 1]), _ONE, reduced=True)


@lru_cache(maxsize=512)
def t_pow(k: int) -> ScalarRF:
    if k >= 0:
        return ScalarRF(fmpz_poly([0] * k + [1]), _ONE, reduced=True)
    return ScalarRF(_ONE, fmpz_poly([0] * (-k) + [1]), reduced=True)


def q_pow(k: int) -> ScalarRF:
    return t_pow(2 * k)


Q = q_pow(1)


def from_q_poly(coeffs: list[Number]) -> ScalarRF:
    """Polynomial in q given by coefficients (constant term first)."""
    out = ZERO
    for k, c in enumerate(coeffs):
        if c:
            out = out + ScalarRF.of(c) * q_pow(k)
    return out


@lru_cache(maxsize=256)
def quantum_integer(a: int) -> ScalarRF:
    """[a]_t = (t^a - t^-a)/(t - t^-1)."""
    if a == 0:
        return ZERO
    n = abs(a)
    out = ZERO
    for k in range(-n + 1, n, 2):
        out = out + t_pow(k)
    return out if a > 0 else -out


@lru_cache(maxsize=256)
def r_k(k: int) -> ScalarRF:
    """(-1)^(k-1) / (k (q^k - 1))."""
    if k <= 0:
        raise ValueError("k must be positive")
    sign = 1 if k % 2 == 1 else -1
    return ScalarRF.of(sign) / (ScalarRF.of(k) * (q_pow(k) - 1))


@lru_cache(maxsize=256)
def r_prime(k: int) -> ScalarRF:
    """(-1)^(k-1) / (k (t^k - t^-k))."""
    if k <= 0:
        raise ValueError("k must be positive")
    sign = 1 if k % 2 == 1 else -1
    return ScalarRF.of(sign) / (ScalarRF.of(k) * (t_pow(k) - t_pow(-k)))


SCL_ALTERNATING = "alternating"  # (-1)^k / k^2
SCL_DILOG = "dilog"  # (-1)^(k-1) / k^2, the coefficients of -Li_2(-x)


def r_scl(k: int, sign: str = SCL_ALTERNATING) -> Fraction:
    if k <= 0:
        raise ValueError("k must be positive")
    if sign == SCL_ALTERNATING:
        return Fraction((-1) ** k, k * k)
    if sign == SCL_DILOG:
        return Fraction((-1) ** (k - 1), k * k)
    raise ValueError(f"unknown sign convention {sign!r}")


T_MINUS_TINV = T - t_pow(-1)
