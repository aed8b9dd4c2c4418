"""Mass-action polynomial vector fields with exact rational coefficients.

A polynomial is a ``dict`` mapping exponent tuples to coefficients. The
field keeps a dense numeric copy (exponent matrix plus coefficient matrix)
for the integrator kernels.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Mapping, Sequence

import numpy as np

from .dsl import NetworkSource

__all__ = [
    "Poly",
    "PolynomialVectorField",
    "JacobianMatrix",
    "build_vector_field",
    "poly_eval",
    "poly_diff",
    "poly_add",
    "poly_scale",
    "poly_mul",
    "poly_str",
    "verify_conservation",
]

Poly = dict  # exponent tuple -> coefficient


def poly_add(*ps: Mapping) -> Poly:
    out: Poly = {}
    for p in ps:
        for e, c in p.items():
            out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}


def poly_scale(p: Mapping, s) -> Poly:
    return {e: c * s for e, c in p.items() if c * s != 0}


def poly_mul(p: Mapping, q: Mapping) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def poly_diff(p: Mapping, i: int) -> Poly:
    out: Poly = {}
    for e, c in p.items():
        if e[i]:
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            out[e2] = out.get(e2, 0) + c * e[i]
    return {e: c for e, c in out.items() if c != 0}


def _is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def poly_eval(p: Mapping, x: Sequence):
    """Direct monomial sum. Exact for rational ``x``; otherwise follows the
    arithmetic of the inputs (floats, mpmath numbers)."""
    total = 0
    for e, c in p.items():
        term = c
        for xi, k in zip(x, e):
            if k:
                term = term * xi**k
        total = total + term
    return total


def poly_str(p: Mapping, names: Sequence[str]) -> str:
    if not p:
        return "0"
    parts = []
    for e in sorted(p, reverse=True):
        c = p[e]
        mono = "*".join(f"{n}^{k}" if k > 1 else n for n, k in zip(names, e) if k)
        cs = str(c)
        if mono:
            parts.append(f"{cs}*{mono}" if cs not in ("1",) else mono)
            if cs == "-1":
                parts[-1] = "-" + mono
        else:
            parts.append(cs)
    s = " + ".join(parts)
    return s.replace("+ -", "- ")


class JacobianMatrix:
    """``entries[k][i]`` is the exact partial derivative of component k in x_i."""

    def __init__(self, entries: Sequence[Sequence[Poly]]):
        self.entries = tuple(tuple(row) for row in entries)
        self.n = len(self.entries)

    def __getitem__(self, ki):
        k, i = ki
        return self.entries[k][i]

    def evaluate(self, x: Sequence):
        if isinstance(x, np.ndarray) or any(isinstance(v, float) for v in x):
            x = np.asarray(x, dtype=float)
            return np.array([[float(poly_eval(p, x)) for p in row] for row in self.entries])
        return [[poly_eval(p, x) for p in row] for row in self.entries]

    def trace_poly(self) -> Poly:
        return poly_add(*(self.entries[k][k] for k in range(self.n)))


class PolynomialVectorField:
    """Right-hand side of the mass-action ODE of a network."""

    def __init__(self, components: Sequence[Poly], species: Sequence[str], network: NetworkSource | None = None):
        self.components = tuple(dict(c) for c in components)
        self.species = tuple(species)
        self.n = len(self.species)
        self.network = network
        monos = sorted({e for c in self.components for e in c})
        if not monos:
            monos = [tuple([0] * self.n)]
        self.monomials = tuple(monos)
        self.E = np.array(self.monomials, dtype=np.int64).reshape(len(monos), self.n)
        self.C = np.array([[float(c.get(e, 0)) for e in monos] for c in self.components], dtype=float)
        self._jac: JacobianMatrix | None = None

    def __repr__(self) -> str:
        return f"PolynomialVectorField({self.to_strings()})"

    def to_strings(self) -> list[str]:
        return [f"d{s}/dt = {poly_str(c, self.species)}" for s, c in zip(self.species, self.components)]

    @property
    def max_degree(self) -> int:
        return max(sum(e) for e in self.monomials)

    def evaluate(self, x: Sequence):
        """Exact rational evaluation for rational input, float otherwise."""
        if len(x) != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {len(x)}")
        if isinstance(x, np.ndarray) or any(isinstance(v, float) for v in x):
            x = np.asarray(x, dtype=float)
            mon = np.prod(x[None, :] ** self.E, axis=1)
            return self.C @ mon
        return [poly_eval(c, x) for c in self.components]

    __call__ = evaluate

    def jacobian(self) -> JacobianMatrix:
        if self._jac is None:
            self._jac = JacobianMatrix([[poly_diff(c, i) for i in range(self.n)] for c in self.components])
        return self._jac

    def jacobian_at(self, x):
        """Numeric Jacobian (float) at a positive point."""
        x = np.asarray(x, dtype=float)
        mon = np.prod(x[None, :] ** self.E, axis=1)
        # d/dx_i x^e = e_i x^e / x_i, valid on the open orthant
        return (self.C * mon[None, :]) @ (self.E / x[None, :])

    def scaled(self, s) -> "PolynomialVectorField":
        """Field multiplied by ``s`` (``s = -1`` reverses time)."""
        return PolynomialVectorField([poly_scale(c, s) for c in self.components], self.species, self.network)

    def dot(self, d: Sequence) -> Poly:
        return poly_add(*(poly_scale(c, Fraction(di)) for c, di in zip(self.components, d) if di != 0))


def build_vector_field(net: NetworkSource) -> PolynomialVectorField:
    """Sum over edges of ``k * x^y (y' - y)``, exact."""
    comps: list[Poly] = [{} for _ in net.species]
    for r in net.reactions:
        for k, dk in enumerate(r.vector):
            if dk:
                comps[k][r.reactant] = comps[k].get(r.reactant, 0) + r.rate * dk
    comps = [{e: c for e, c in p.items() if c != 0} for p in comps]
    return PolynomialVectorField(comps, net.species, net)


def verify_conservation(field: PolynomialVectorField, d: Sequence) -> bool:
    """True iff ``d . f`` is the zero polynomial."""
    if len(d) != field.n:
        raise ValueError("dimension mismatch")
    return not field.dot(d)
