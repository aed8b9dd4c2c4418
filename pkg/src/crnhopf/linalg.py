"""Exact linear algebra over the rationals (tiny dense matrices)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = to_fractions(rows)
    if not a:
        return a, []
    nrow, ncol = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, nrow) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(nrow):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrow:
            break
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], ncol: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{v : A v = 0}``, one vector per free column."""
    if not rows:
        if ncol is None:
            raise ValueError("ncol required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncol)] for i in range(ncol)]
    ncol = len(rows[0])
    a, pivots = rref(rows)
    free = [c for c in range(ncol) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncol
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -a[i][f]
        basis.append(v)
    return basis


def row_basis(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    """Basis of the row space (nonzero rows of the RREF)."""
    a, pivots = rref(rows)
    return a[: len(pivots)]


def primitive(v: Sequence[Fraction]) -> list[int]:
    """Smallest integer multiple of ``v`` with the same direction."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return ints
    return [x // g for x in ints]


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve a square nonsingular system exactly."""
    n = len(a)
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("singular system")
    return [red[i][n] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*a)]


def inverse(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in red]
