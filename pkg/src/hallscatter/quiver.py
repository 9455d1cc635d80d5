"""Quivers, their lattices, and the bilinear forms derived from arrow counts."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

Vec = tuple[int, ...]


class QuiverError(ValueError):
    """Raised for malformed or unsupported quiver input."""


@dataclass(frozen=True)
class QuiverSpec:
    vertex_count: int
    arrows: tuple[tuple[int, int], ...]  # 0-based (tail, head)
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise QuiverError("vertex_count must be positive")
        for idx, (s, t) in enumerate(self.arrows):
            if not (0 <= s < self.vertex_count and 0 <= t < self.vertex_count):
                raise QuiverError(f"arrow {idx} has an endpoint out of range")
            if s == t:
                raise QuiverError(f"arrow {idx} is a loop at vertex {s + 1}")
        seen: dict[tuple[int, int], int] = {}
        for idx, (s, t) in enumerate(self.arrows):
            if (t, s) in seen:
                raise QuiverError(
                    f"arrows {seen[(t, s)]} and {idx} form an oriented 2-cycle"
                )
            seen.setdefault((s, t), idx)
        if self.labels and len(self.labels) != self.vertex_count:
            raise QuiverError("labels must have one entry per vertex")

    @property
    def rank(self) -> int:
        return self.vertex_count

    def arrow_count(self, i: int, j: int) -> int:
        return sum(1 for a in self.arrows if a == (i, j))

    def adjacency(self) -> list[list[int]]:
        n = self.vertex_count
        a = [[0] * n for _ in range(n)]
        for s, t in self.arrows:
            a[s][t] += 1
        return a

    def to_json(self) -> str:
        data: dict = {
            "vertices": self.vertex_count,
            "arrows": [[s + 1, t + 1] for s, t in self.arrows],
        }
        if self.labels:
            data["labels"] = list(self.labels)
        return json.dumps(data, sort_keys=True)


def make_quiver(n: int, arrows: Sequence[Sequence[int]], labels: Sequence[str] = ()) -> QuiverSpec:
    """Build a quiver from 1-based arrow pairs."""
    return QuiverSpec(n, tuple((int(s) - 1, int(t) - 1) for s, t in arrows), tuple(labels))


def parse_quiver(text: str) -> QuiverSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QuiverError(f"syntax error: {exc}") from exc
    if not isinstance(data, dict) or "vertices" not in data:
        raise QuiverError("expected an object with a 'vertices' field")
    n = data["vertices"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise QuiverError("'vertices' must be an integer")
    arrows = data.get("arrows", [])
    if not isinstance(arrows, list):
        raise QuiverError("'arrows' must be a list")
    pairs = []
    for idx, a in enumerate(arrows):
        if (
            not isinstance(a, list)
            or len(a) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in a)
        ):
            raise QuiverError(f"arrow {idx} must be a pair of integers")
        pairs.append(a)
    labels = data.get("labels", [])
    if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
        raise QuiverError("'labels' must be a list of strings")
    # out-of-range indices become negative or too large; QuiverSpec reports them
    return make_quiver(n, pairs, labels)


def load_quiver(path: str) -> QuiverSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_quiver(fh.read())


def forms(q: QuiverSpec) -> tuple[list[list[int]], list[list[int]]]:
    """Return (B, chi) as integer matrices indexed [i][j] = form(e_i, e_j)."""
    a = q.adjacency()
    n = q.vertex_count
    b = [[a[j][i] - a[i][j] for j in range(n)] for i in range(n)]
    chi = [[(1 if i == j else 0) - a[i][j] for j in range(n)] for i in range(n)]
    return b, chi


def pair(form: Sequence[Sequence[int]], u: Sequence[int], v: Sequence[int]) -> int:
    return sum(u[i] * form[i][j] * v[j] for i in range(len(u)) for j in range(len(v)) if u[i] and v[j])


def p_star(b: Sequence[Sequence[int]], n: Sequence[int]) -> Vec:
    """The map n -> B(., n) into the dual lattice."""
    if len(n) != len(b):
        raise QuiverError(f"dimension mismatch: {len(n)} vs {len(b)}")
    return tuple(sum(b[i][j] * n[j] for j in range(len(n))) for i in range(len(b)))


def dual_pair(n: Sequence, m: Sequence):
    return sum(x * y for x, y in zip(n, m))


def degree(n: Sequence[int]) -> int:
    return sum(n)


def is_positive(n: Sequence[int]) -> bool:
    return all(x >= 0 for x in n) and any(x != 0 for x in n)


def basis_vector(rank: int, i: int, scale: int = 1) -> Vec:
    return tuple(scale if j == i else 0 for j in range(rank))


def vec_add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u: Sequence) -> tuple:
    return tuple(c * a for a in u)


def lattice_index(n: Sequence[int]) -> int:
    from math import gcd

    g = 0
    for x in n:
        g = gcd(g, int(x))
    return g


def primitive(n: Sequence[int]) -> Vec:
    g = lattice_index(n)
    if g == 0:
        raise QuiverError("zero vector has no primitive part")
    return tuple(int(x) // g for x in n)


def is_dynkin(q: QuiverSpec) -> bool:
    """Positive definiteness of the symmetrized Euler form (ADE test)."""
    from fractions import Fraction

    _, chi = forms(q)
    n = q.vertex_count
    m = [[Fraction(chi[i][j] + chi[j][i]) for j in range(n)] for i in range(n)]
    # Gaussian elimination; positive definite iff every pivot is positive
    for k in range(n):
        if m[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return True


A2 = make_quiver(2, [[1, 2]])
A3 = make_quiver(3, [[1, 2], [3, 2]])
KRONECKER = make_quiver(2, [[1, 2], [1, 2]])
