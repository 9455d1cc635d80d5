"""Small dense linear algebra over prime fields, plus subspace enumeration."""
from __future__ import annotations

from itertools import combinations, product
from typing import Iterator, Sequence

Matrix = tuple  # tuple of row tuples, entries in range(p)


def zeros(rows: int, cols: int) -> Matrix:
    return tuple(tuple(0 for _ in range(cols)) for _ in range(rows))


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def reduce(m: Sequence[Sequence[int]], p: int) -> Matrix:
    return tuple(tuple(x % p for x in row) for row in m)


def matmul(a: Matrix, b: Matrix, p: int, inner: int | None = None) -> Matrix:
    if inner is None:
        inner = len(b)
    cols = len(b[0]) if b else 0
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(inner)) % p for j in range(cols)) for i in range(len(a))
    )


def matvec(a: Matrix, v: Sequence[int], p: int) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) % p for row in a)


def rank(rows: list[list[int]], ncols: int, p: int) -> int:
    m = [list(r) for r in rows]
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][col] % p:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][col], p - 2, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def nullspace(rows: list[list[int]], ncols: int, p: int) -> list[tuple]:
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][col] % p:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][col], p - 2, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, col in enumerate(pivots):
            v[col] = (-m[i][f]) % p
        out.append(tuple(v))
    return out


def det(m: Matrix, p: int) -> int:
    n = len(m)
    a = [list(r) for r in m]
    d = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] % p), None)
        if piv is None:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            d = -d
        d = d * a[col][col] % p
        inv = pow(a[col][col], p - 2, p)
        for i in range(col + 1, n):
            if a[i][col]:
                f = a[i][col] * inv % p
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[col])]
    return d % p


def subspaces(n: int, k: int, p: int) -> Iterator[tuple[tuple, tuple]]:
    """All k-dimensional subspaces of F_p^n as (rref rows, pivot columns)."""
    if k == 0:
        yield (), ()
        return
    for pivots in combinations(range(n), k):
        free_slots = [(r, c) for r in range(k) for c in range(pivots[r] + 1, n) if c not in pivots]
        for vals in product(range(p), repeat=len(free_slots)):
            rows = [[0] * n for _ in range(k)]
            for r, c in enumerate(pivots):
                rows[r][c] = 1
            for (r, c), v in zip(free_slots, vals):
                rows[r][c] = v
            yield tuple(tuple(row) for row in rows), pivots


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def gl_order(n: int, q: int) -> int:
    out = 1
    for i in range(n):
        out *= q**n - q**i
    return out


def in_span(v: Sequence[int], rows: tuple, pivots: tuple, p: int) -> bool:
    w = list(v)
    for row, c in zip(rows, pivots):
        f = w[c]
        if f:
            w = [(x - f * y) % p for x, y in zip(w, row)]
    return not any(w)


def coords_in(v: Sequence[int], rows: tuple, pivots: tuple) -> tuple:
    """Coordinates of a vector known to lie in the row space of an RREF basis."""
    return tuple(v[c] for c in pivots)


def quotient_coords(v: Sequence[int], rows: tuple, pivots: tuple, p: int, comp: tuple) -> tuple:
    """Image of v in F^n / rowspace, in the basis of standard vectors at columns `comp`."""
    w = list(v)
    for row, c in zip(rows, pivots):
        f = w[c]
        if f:
            w = [(x - f * y) % p for x, y in zip(w, row)]
    return tuple(w[c] for c in comp)


def first_primes(count: int) -> list[int]:
    out = []
    n = 2
    while len(out) < count:
        if all(n % d for d in out if d * d <= n):
            out.append(n)
        n += 1
    return out
