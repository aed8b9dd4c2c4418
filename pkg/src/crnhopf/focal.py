"""Hopf analysis on the equilibrium curve: planar jets, focal values and
criticality.

The planar reduction restricts the field to the (two-dimensional)
stoichiometric class through a point, using an integer basis ``V`` of S and
the left inverse ``P = (V^T V)^{-1} V^T``. Focal values come from the
Poincare--Lyapunov function method. With trace-free linear part
``A = [[p, q], [r, -p]]`` the quadratic form

    H = sgn(r) (r u^2 - 2 p u v - q v^2) / 2

is a first integral of ``u' = A u``; one solves degree by degree for
``V = H + V_3 + V_4 + ...`` with ``dV/dt = L_1 H^2 + L_2 H^3 + L_3 H^4 + ...``.
Everything stays in the coefficient field of the jet, so rational centers
give exact rational focal values. For ``A = [[0, -1], [1, 0]]`` the form is
``(u^2 + v^2)/2`` and ``r' = alpha r^3`` gives ``L_1 = 4 alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import linalg
from .equilibria import EquilibriumCurve, ExponentSum, trace_on_curve, trace_roots, toric_equilibrium_curve
from .network import structure_report
from .polyfield import PolynomialVectorField, build_vector_field

__all__ = [
    "NORMALIZATION",
    "NotHopfCandidate",
    "PlanarJet",
    "HopfPoint",
    "planar_reduction",
    "focal_values",
    "hopf_classify",
    "focal_sign_map",
    "SignMapRow",
    "sign_map_csv",
    "hopf_locus_sign_map",
    "jet_from_polys",
    "FocusTarget",
    "focus_data",
    "solve_focus_conditions",
]

NORMALIZATION = (
    "V = H + O(|u|^3) with H = sgn(r)(r u^2 - 2p u v - q v^2)/2 the quadratic first integral of the "
    "trace-free linear part [[p, q], [r, -p]] in S-basis coordinates; dV/dt = L1 H^2 + L2 H^3 + L3 H^4 + ...; "
    "free resonant coefficient (u^k term at each even degree k) set to zero. Only signs and zero sets are "
    "coordinate independent."
)

MP_DPS = 30
MAX_JET_DEGREE = 7

BiPoly = dict  # (i, j) -> coefficient of u^i v^j


class NotHopfCandidate(ValueError):
    pass


def _is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def _converter(kind: str):
    if kind == "exact":
        return Fraction
    if kind == "mp":
        return lambda v: mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)
    if kind == "float":
        return float
    raise ValueError(f"unknown number kind {kind!r}")


# --- bivariate truncated polynomials ---------------------------------------


def _bmul(p: BiPoly, q: BiPoly, deg: int) -> BiPoly:
    out: BiPoly = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            if i1 + j1 + i2 + j2 <= deg:
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
    return out


def _homog(p: BiPoly, k: int, zero) -> list:
    """Coefficients of the degree-k part, index j <-> u^(k-j) v^j."""
    return [p.get((k - j, j), zero) for j in range(k + 1)]


@dataclass
class PlanarJet:
    """Taylor jet of the class-restricted field around a point.

    ``components[c][(i, j)]`` is the coefficient of ``u^i v^j`` in the c-th
    reduced coordinate; ``linear`` is the 2x2 linear part.
    """

    center: tuple
    basis: tuple[tuple[int, ...], ...]
    components: tuple[BiPoly, BiPoly]
    linear: tuple[tuple, tuple]
    kind: str
    degree: int = MAX_JET_DEGREE
    trace: object = 0

    @property
    def omega_squared(self):
        (a, b), (c, d) = self.linear
        return a * d - b * c

    @property
    def omega(self) -> float:
        return math.sqrt(float(self.omega_squared))

    def evaluate(self, u: float, v: float) -> tuple[float, float]:
        return tuple(
            sum(float(c) * u**i * v**j for (i, j), c in comp.items()) for comp in self.components
        )


def jet_from_polys(components: Sequence[BiPoly], kind: str = "exact", degree: int = MAX_JET_DEGREE) -> PlanarJet:
    """Wrap an explicit planar polynomial field (used by oracles and tests)."""
    conv = _converter(kind)
    comps = tuple({k: conv(v) if not _is_exact(v) or kind != "exact" else Fraction(v) for k, v in c.items()} for c in components)
    zero = conv(0)
    lin = (
        (comps[0].get((1, 0), zero), comps[0].get((0, 1), zero)),
        (comps[1].get((1, 0), zero), comps[1].get((0, 1), zero)),
    )
    tr = lin[0][0] + lin[1][1]
    return PlanarJet((), (), comps, lin, kind, degree, tr)


def _point_kind(point) -> str:
    return "exact" if all(_is_exact(v) for v in point) else "mp"


def planar_reduction(
    field: PolynomialVectorField,
    point: Sequence,
    *,
    kind: str | None = None,
    degree: int = MAX_JET_DEGREE,
    trace_tol: float = 1e-9,
    basis: Sequence[Sequence[int]] | None = None,
) -> PlanarJet:
    """Reduce the field to its two-dimensional class through ``point``.

    ``kind`` is ``'exact'`` (rational point), ``'mp'`` (mpmath floats with
    30 digits) or ``'float'``; by default exact whenever the point is
    rational.
    """
    if basis is None:
        if field.network is None:
            raise ValueError("field has no network; pass an S basis")
        basis = structure_report(field.network).stoichiometric_basis
    basis = tuple(tuple(int(v) for v in b) for b in basis)
    if len(basis) != 2:
        raise NotHopfCandidate(f"stoichiometric subspace has dimension {len(basis)}, need 2")
    kind = kind or _point_kind(point)
    if kind == "exact" and not all(_is_exact(v) for v in point):
        raise ValueError("exact reduction needs a rational point")
    conv = _converter(kind)
    old_dps = mpmath.mp.dps
    if kind == "mp":
        mpmath.mp.dps = max(old_dps, MP_DPS)
    try:
        n = field.n
        vt = [[Fraction(b[i]) for i in range(n)] for b in basis]  # 2 x n
        gram = linalg.matmul(vt, linalg.transpose(vt))
        proj = linalg.matmul(linalg.inverse(gram), vt)  # 2 x n
        projc = [[conv(v) for v in row] for row in proj]
        pc = [conv(v) if not isinstance(v, Fraction) or kind != "exact" else v for v in point]
        if kind == "exact":
            pc = [Fraction(v) for v in point]
        zero, one = conv(0), conv(1)
        # x_i = p_i + V_i0 u + V_i1 v
        lin_forms = [{(0, 0): pc[i], (1, 0): conv(basis[0][i]), (0, 1): conv(basis[1][i])} for i in range(n)]
        lin_forms = [{k: c for k, c in f.items() if c != 0} for f in lin_forms]
        max_e = [max((e[i] for e in field.monomials), default=0) for i in range(n)]
        powers: list[list[BiPoly]] = []
        for i in range(n):
            pw = [{(0, 0): one}]
            for _ in range(max_e[i]):
                pw.append(_bmul(pw[-1], lin_forms[i], degree))
            powers.append(pw)
        mono_cache: dict[tuple, BiPoly] = {}
        for e in field.monomials:
            acc: BiPoly = {(0, 0): one}
            for i, k in enumerate(e):
                if k:
                    acc = _bmul(acc, powers[i][k], degree)
            mono_cache[e] = acc
        full: list[BiPoly] = []
        for comp in field.components:
            out: BiPoly = {}
            for e, c in comp.items():
                cc = conv(c) if kind != "exact" else Fraction(c)
                for key, v in mono_cache[e].items():
                    out[key] = out.get(key, zero) + cc * v
            full.append(out)
        reduced = []
        for r in range(2):
            out: BiPoly = {}
            for i in range(n):
                w = projc[r][i]
                if w == 0:
                    continue
                for key, v in full[i].items():
                    out[key] = out.get(key, zero) + w * v
            reduced.append(out)
        const = max(abs(float(reduced[r].get((0, 0), 0))) for r in range(2))
        scale = max(1.0, max(abs(float(v)) for v in pc))
        if const > 1e-8 * scale ** field.max_degree:
            raise NotHopfCandidate(f"point is not an equilibrium (|f| = {const:.3e})")
        for r in range(2):
            reduced[r].pop((0, 0), None)
            reduced[r] = {k: v for k, v in reduced[r].items() if v != 0}
        lin = (
            (reduced[0].get((1, 0), zero), reduced[0].get((0, 1), zero)),
            (reduced[1].get((1, 0), zero), reduced[1].get((0, 1), zero)),
        )
        tr = lin[0][0] + lin[1][1]
        det = lin[0][0] * lin[1][1] - lin[0][1] * lin[1][0]
        jscale = max(abs(float(v)) for row in lin for v in row) or 1.0
        if abs(float(tr)) > trace_tol * max(1.0, jscale):
            raise NotHopfCandidate(f"trace {float(tr):.3e} is not zero")
        if not det > 0:
            raise NotHopfCandidate(f"determinant {float(det):.3e} is not positive")
        return PlanarJet(tuple(pc), basis, (reduced[0], reduced[1]), lin, kind, degree, tr)
    finally:
        mpmath.mp.dps = old_dps


# --- Lyapunov function recursion -------------------------------------------


def _gauss_solve(a: list[list], b: list) -> list:
    """Gaussian elimination with partial pivoting over any field type."""
    n = len(a)
    m = [list(row) + [bi] for row, bi in zip(a, b)]
    for c in range(n):
        piv = max(range(c, n), key=lambda i: abs(m[i][c]))
        if m[piv][c] == 0:
            raise ZeroDivisionError("singular system in focal recursion")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] * inv
            if f != 0:
                for j in range(c, n + 1):
                    m[i][j] = m[i][j] - f * m[c][j]
    x = [0] * n
    for i in range(n - 1, -1, -1):
        s = m[i][n]
        for j in range(i + 1, n):
            s = s - m[i][j] * x[j]
        x[i] = s / m[i][i]
    return x


def _lie_matrix(k: int, lin, zero) -> list[list]:
    """Matrix of V -> grad V . (A u) on homogeneous degree-k polynomials."""
    (a11, a12), (a21, a22) = lin
    mat = [[zero] * (k + 1) for _ in range(k + 1)]
    for j in range(k + 1):
        i = k - j  # basis monomial u^i v^j
        # d/du (u^i v^j) * (a11 u + a12 v) + d/dv (...) * (a21 u + a22 v)
        if i:
            mat[j][j] = mat[j][j] + i * a11
            mat[j + 1][j] = mat[j + 1][j] + i * a12
        if j:
            mat[j - 1][j] = mat[j - 1][j] + j * a21
            mat[j][j] = mat[j][j] + j * a22
    return mat


def _grad_dot(vk: list, k: int, g: tuple[list, list], m: int, zero) -> list:
    """Coefficients of grad(V_k) . (g_m^u, g_m^v), degree k + m - 1."""
    deg = k + m - 1
    out = [zero] * (deg + 1)
    gu, gv = g
    for j, c in enumerate(vk):
        if c == 0:
            continue
        i = k - j
        if i:
            for jj, gc in enumerate(gu):
                if gc != 0:
                    out[j + jj] = out[j + jj] + c * i * gc
        if j:
            for jj, gc in enumerate(gv):
                if gc != 0:
                    out[j - 1 + jj] = out[j - 1 + jj] + c * j * gc
    return out


def focal_values(jet: PlanarJet, depth: int = 3) -> list:
    """First ``depth`` focal values (``depth <= 3``), normalised per
    :data:`NORMALIZATION`."""
    if not 1 <= depth <= 3:
        raise ValueError("depth must be 1, 2 or 3")
    if jet.degree < 2 * depth + 1:
        raise ValueError(f"jet degree {jet.degree} too small for depth {depth}")
    old_dps = mpmath.mp.dps
    if jet.kind == "mp":
        mpmath.mp.dps = max(old_dps, MP_DPS)
    try:
        return _focal(jet, depth)
    finally:
        mpmath.mp.dps = old_dps


def _focal(jet: PlanarJet, depth: int) -> list:
    conv = _converter(jet.kind)
    zero = conv(0)
    (a11, a12), (a21, a22) = jet.linear
    half = (a11 + a22) / 2
    lin = ((a11 - half, a12), (a21, a22 - half))  # drop a residual trace
    p, q, r = lin[0][0], lin[0][1], lin[1][0]
    sgn = 1 if r > 0 else -1
    h2 = [sgn * r / 2, -sgn * p, -sgn * q / 2]
    kmax = 2 * depth + 2
    g = {m: (_homog(jet.components[0], m, zero), _homog(jet.components[1], m, zero)) for m in range(2, kmax)}
    vs: dict[int, list] = {2: h2}
    hpow = {1: h2}

    def hpower(e):
        if e not in hpow:
            prev = hpower(e - 1)
            out = [zero] * (2 * e + 1)
            for i, c in enumerate(prev):
                for j, d in enumerate(h2):
                    out[i + j] = out[i + j] + c * d
            hpow[e] = out
        return hpow[e]

    etas = []
    for k in range(3, kmax + 1):
        rhs = [zero] * (k + 1)
        for j in range(2, k):
            m = k - j + 1
            if m < 2:
                continue
            contrib = _grad_dot(vs[j], j, g[m], m, zero)
            rhs = [x - y for x, y in zip(rhs, contrib)]
        mat = _lie_matrix(k, lin, zero)
        if k % 2:
            vs[k] = _gauss_solve(mat, rhs)
            continue
        kern = hpower(k // 2)
        aug = [row + [-kern[i]] for i, row in enumerate(mat)]
        j0 = next(i for i, c in enumerate(kern) if c != 0)
        constraint = [zero] * (k + 2)
        constraint[j0] = conv(1)
        sol = _gauss_solve(aug + [constraint], rhs + [zero])
        vs[k] = sol[: k + 1]
        etas.append(sol[k + 1])
    return etas[:depth]


@dataclass
class HopfPoint:
    t_star: float
    omega: float
    focal: list
    criticality: str
    trace_derivative: float
    point: tuple
    kind: str
    normalization: str = NORMALIZATION

    @property
    def first_focal(self):
        return self.focal[0] if self.focal else None

    def to_json(self) -> dict:
        from .report import rational_repr

        return {
            "tStar": rational_repr(self.t_star),
            "omega": self.omega,
            "focalValues": [rational_repr(v) for v in self.focal],
            "criticality": self.criticality,
            "traceDerivative": rational_repr(self.trace_derivative),
            "point": [rational_repr(v) for v in self.point],
            "arithmetic": self.kind,
            "normalization": self.normalization,
        }


def _curve_point(curve: EquilibriumCurve, t, kind: str):
    if kind == "exact":
        return curve.point(Fraction(t))
    conv = _converter(kind)
    base = [conv(Fraction(b)) if isinstance(b, Fraction) or isinstance(b, int) else conv(b) for b in curve.base]
    tt = conv(t) if not isinstance(t, Fraction) else conv(t)
    out = []
    for b, e in zip(base, curve.exponents):
        if e.denominator == 1:
            out.append(b * tt ** int(e))
        else:
            out.append(b * tt ** conv(e))
    return tuple(out)


def hopf_classify(
    field: PolynomialVectorField,
    curve: EquilibriumCurve,
    t_star,
    *,
    depth: int = 3,
    zero_tol: float = 1e-12,
    kind: str | None = None,
) -> HopfPoint:
    """Focal values at the trace root ``t_star`` up to the first nonzero one.

    ``t_star`` given as a :class:`~fractions.Fraction` with a rational
    curve yields exact arithmetic.
    """
    exact_ok = curve.exact and isinstance(t_star, (int, Fraction)) and all(e.denominator == 1 for e in curve.exponents)
    kind = kind or ("exact" if exact_ok else "mp")
    old_dps = mpmath.mp.dps
    mpmath.mp.dps = max(old_dps, MP_DPS)
    try:
        point = _curve_point(curve, t_star, kind)
    finally:
        mpmath.mp.dps = old_dps
    jet = planar_reduction(field, point, kind=kind)
    tr = trace_on_curve(field, curve)
    dtr = tr.derivative()(t_star)
    vals: list = []
    crit = "degenerate-to-depth-3"
    for k in range(1, depth + 1):
        vals = focal_values(jet, k)
        v = vals[-1]
        nonzero = v != 0 if kind == "exact" else abs(float(v)) > zero_tol
        if nonzero:
            crit = "supercritical" if v < 0 else "subcritical"
            break
    else:
        crit = f"degenerate-to-depth-{depth}"
    return HopfPoint(
        t_star=t_star,
        omega=jet.omega,
        focal=list(vals),
        criticality=crit,
        trace_derivative=dtr,
        point=tuple(point),
        kind=kind,
    )


@dataclass
class SignMapRow:
    a: Fraction
    b: Fraction
    roots: list
    signs: list

    def csv_fields(self) -> list[str]:
        t1 = f"{self.roots[0]:.15g}" if len(self.roots) > 0 else ""
        s1 = str(self.signs[0]) if len(self.signs) > 0 else ""
        t2 = f"{self.roots[1]:.15g}" if len(self.roots) > 1 else ""
        s2 = str(self.signs[1]) if len(self.signs) > 1 else ""
        return [f"{float(self.a):.15g}", f"{float(self.b):.15g}", t1, s1, t2, s2]


def _sign(v, tol) -> int:
    fv = float(v)
    if abs(fv) <= tol:
        return 0
    return 1 if fv > 0 else -1


def focal_sign_map(
    family: Callable,
    a_range: tuple,
    b_range: tuple,
    grid: tuple[int, int],
    *,
    kind: str = "mp",
    zero_tol: float = 0.0,
    curve_hint: EquilibriumCurve | None = None,
) -> list[SignMapRow]:
    """Sign of L1 at each trace root over a rectangular (a, b) grid.

    ``family(a, b)`` returns a network; grid points are exact rationals
    spaced uniformly including both ends.
    """
    na, nb = grid
    alo, ahi = (Fraction(v) for v in a_range)
    blo, bhi = (Fraction(v) for v in b_range)
    rows = []
    for i in range(na):
        a = alo + (ahi - alo) * i / max(1, na - 1)
        for j in range(nb):
            b = blo + (bhi - blo) * j / max(1, nb - 1)
            if a <= 0 or b <= 0:
                rows.append(SignMapRow(a, b, [], []))
                continue
            net = family(a, b)
            fld = build_vector_field(net)
            curve = curve_hint if curve_hint is not None else toric_equilibrium_curve(fld)
            ts = trace_on_curve(fld, curve)
            roots = trace_roots(ts) if ts else []
            signs = []
            for t in roots:
                try:
                    hp = focal_values(planar_reduction(fld, _mp_point(curve, t, kind), kind=kind), 1)
                    signs.append(_sign(hp[0], zero_tol))
                except NotHopfCandidate:
                    signs.append(0)
            rows.append(SignMapRow(a, b, list(roots), signs))
    return rows


def _mp_point(curve, t, kind):
    old = mpmath.mp.dps
    mpmath.mp.dps = max(old, MP_DPS)
    try:
        return _curve_point(curve, t, kind)
    finally:
        mpmath.mp.dps = old


def _single_trace_coefficient(family: Callable, a: Fraction, b: Fraction):
    fld = build_vector_field(family(a, b))
    curve = toric_equilibrium_curve(fld)
    ts = trace_on_curve(fld, curve)
    if len(ts.terms) > 1:
        raise ValueError("trace on the curve has several terms; use focal_sign_map")
    return (ts.terms[0][0] if ts else Fraction(0)), fld, curve


def hopf_locus_sign_map(
    family: Callable,
    a_range: tuple,
    b_range: tuple,
    grid: tuple[int, int],
    *,
    kind: str = "mp",
    zero_tol: float = 0.0,
    b_tol: float = 1e-13,
) -> list[SignMapRow]:
    """Sign of L1 along the Hopf locus of a family whose curve trace is one monomial.

    Such a trace vanishes for every ``t`` or for none, so the Hopf set is a
    curve in the (a, b) plane. For each of the ``grid[0]`` values of ``a``
    the zeros in ``b`` of the trace coefficient are bracketed on a
    ``grid[1]`` point grid and bisected; rows report ``t = 1``.
    """
    na, nb = grid
    alo, ahi = (Fraction(v) for v in a_range)
    blo, bhi = (Fraction(v) for v in b_range)
    rows = []
    for i in range(na):
        a = alo + (ahi - alo) * i / max(1, na - 1)
        bs = [blo + (bhi - blo) * j / max(1, nb - 1) for j in range(nb)]
        bs = [b for b in bs if b > 0]
        if a <= 0 or not bs:
            rows.append(SignMapRow(a, Fraction(0), [], []))
            continue
        vals = [_single_trace_coefficient(family, a, b)[0] for b in bs]
        found = False
        for (b1, v1), (b2, v2) in zip(zip(bs, vals), zip(bs[1:], vals[1:])):
            if v1 == 0 or (v1 > 0) == (v2 > 0):
                if v1 != 0:
                    continue
                b_star = b1
            else:
                lo, hi, vlo = b1, b2, v1
                while hi - lo > b_tol * max(1, abs(hi)):
                    mid = Fraction((lo + hi) / 2).limit_denominator(10**16)
                    vm = _single_trace_coefficient(family, a, mid)[0]
                    if vm == 0:
                        lo = hi = mid
                        break
                    if (vm > 0) == (vlo > 0):
                        lo, vlo = mid, vm
                    else:
                        hi = mid
                b_star = Fraction((lo + hi) / 2).limit_denominator(10**16)
            _, fld, curve = _single_trace_coefficient(family, a, b_star)
            try:
                l1 = focal_values(planar_reduction(fld, _mp_point(curve, 1, kind), kind=kind), 1)[0]
                rows.append(SignMapRow(a, b_star, [1.0], [_sign(l1, zero_tol)]))
            except NotHopfCandidate:
                rows.append(SignMapRow(a, b_star, [1.0], [0]))
            found = True
        if not found:
            rows.append(SignMapRow(a, Fraction(0), [], []))
    return rows


def sign_map_csv(rows: Sequence[SignMapRow]) -> str:
    lines = ["a,b,t1,signL1_1,t2,signL1_2"]
    for r in rows:
        lines.append(",".join(r.csv_fields()))
    return "\n".join(lines) + "\n"


# --- degenerate foci in a two-parameter family ------------------------------


@dataclass
class FocusTarget:
    """A point ``(a, b, t)`` of a family together with the trace and focal
    values of its equilibrium at curve parameter ``t``."""

    a: object
    b: object
    t: object
    trace: object
    focal: list
    iterations: int = 0

    def floats(self) -> tuple[float, float, float]:
        return float(self.a), float(self.b), float(self.t)

    def to_json(self) -> dict:
        return {
            "a": float(self.a),
            "b": float(self.b),
            "t": float(self.t),
            "trace": float(self.trace),
            "focalValues": [float(v) for v in self.focal],
            "normalization": NORMALIZATION,
        }


def _mp_to_fraction(x) -> Fraction:
    x = mpmath.mpf(x)
    man, exp = x.man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


def focus_data(family: Callable, a, b, t, *, depth: int = 2, curve: EquilibriumCurve | None = None):
    """Trace and the first ``depth`` focal values at ``(a, b, t)`` in mp
    arithmetic. ``curve`` is used when the equilibrium curve does not depend
    on (a, b); otherwise it is recomputed and must be rational."""
    old = mpmath.mp.dps
    mpmath.mp.dps = max(old, MP_DPS)
    try:
        net = family(_mp_to_fraction(a), _mp_to_fraction(b))
        fld = build_vector_field(net)
        cur = curve if curve is not None else toric_equilibrium_curve(fld)
        if not cur.exact:
            raise NotHopfCandidate("equilibrium curve is not rational; pass it explicitly")
        point = _curve_point(cur, mpmath.mpf(t), "mp")
        jet = planar_reduction(fld, point, kind="mp", degree=2 * depth + 1, trace_tol=math.inf)
        vals = focal_values(jet, depth)
        return jet.trace, vals
    finally:
        mpmath.mp.dps = old


def solve_focus_conditions(
    family: Callable,
    guess: Sequence,
    targets: Sequence = (0, 0, 0),
    *,
    curve: EquilibriumCurve | None = None,
    tol: float = 1e-18,
    max_iter: int = 30,
    fd_step: float = 1e-12,
) -> FocusTarget:
    """Newton in ``(a, b, t)`` for ``(trace, L1, L2) = targets``.

    Derivatives by forward differences in mp arithmetic; iteration stops
    once the relative Newton step drops below ``tol``. With zero targets
    this locates the point where the first three Hopf conditions degenerate.
    """
    old = mpmath.mp.dps
    mpmath.mp.dps = max(old, MP_DPS)
    try:
        tgt = [mpmath.mpf(v) for v in targets]
        z = [mpmath.mpf(v) for v in guess]

        def resid(v):
            tr, (l1, l2) = focus_data(family, v[0], v[1], v[2], depth=2, curve=curve)
            return [tr - tgt[0], l1 - tgt[1], l2 - tgt[2]]

        r = resid(z)
        scales = [max(abs(v), mpmath.mpf(1e-3)) for v in z]
        for it in range(1, max_iter + 1):
            J = mpmath.matrix(3, 3)
            for j in range(3):
                h = fd_step * scales[j]
                zp = list(z)
                zp[j] += h
                rp = resid(zp)
                for i in range(3):
                    J[i, j] = (rp[i] - r[i]) / h
            step = mpmath.lu_solve(J, mpmath.matrix([-v for v in r]))
            # natural monotonicity test: the residual is measured through
            # J^-1, since its components live on very different scales
            n0 = mpmath.norm(step)
            lam = mpmath.mpf(1)
            while True:
                zn = [z[i] + lam * step[i] for i in range(3)]
                if all(v > 0 for v in zn):
                    try:
                        rn = resid(zn)
                        if mpmath.norm(mpmath.lu_solve(J, mpmath.matrix(rn))) <= (1 - lam / 4) * n0 or n0 == 0:
                            break
                    except NotHopfCandidate:
                        pass
                lam /= 2
                if lam < 1e-6:
                    raise NotHopfCandidate("Newton for the focus conditions stalled")
            z, r = zn, rn
            rel = max(abs(lam * step[i]) / scales[i] for i in range(3))
            if rel <= tol or mpmath.norm(mpmath.matrix(r)) == 0:
                break
        else:
            raise NotHopfCandidate(f"no convergence (residual {float(mpmath.norm(mpmath.matrix(r))):.3e})")
        tr, vals = focus_data(family, z[0], z[1], z[2], depth=3, curve=curve)
        return FocusTarget(z[0], z[1], z[2], tr, list(vals), it)
    finally:
        mpmath.mp.dps = old
