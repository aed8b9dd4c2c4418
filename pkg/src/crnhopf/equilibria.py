"""Toric curve of positive equilibria, the Jacobian trace along it, and the
positive roots of that trace."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from numbers import Rational
from typing import Sequence

import numpy as np

from . import linalg
from .network import StructureReport, deficiency_one_applicable, structure_report
from .polyfield import PolynomialVectorField, poly_eval

__all__ = [
    "EquilibriumCurve",
    "ExponentSum",
    "CurveError",
    "toric_equilibrium_curve",
    "trace_on_curve",
    "trace_roots",
    "equilibrium_at_class",
    "find_equilibrium_in_class",
]


class CurveError(RuntimeError):
    pass


def _exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def _pow(base, t, e: Fraction):
    """``base * t**e`` staying exact when possible."""
    if e == 0:
        return base
    if _exact(base) and _exact(t) and Fraction(e).denominator == 1:
        return base * Fraction(t) ** int(e)
    return float(base) * float(t) ** float(e)


@dataclass(frozen=True)
class EquilibriumCurve:
    """``t -> (x*_1 t^d_1, ..., x*_n t^d_n)``, normalised so ``x(1) = x*``."""

    base: tuple
    exponents: tuple[Fraction, ...]

    @property
    def exact(self) -> bool:
        return all(_exact(v) for v in self.base)

    def point(self, t):
        return tuple(_pow(b, t, e) for b, e in zip(self.base, self.exponents))

    __call__ = point

    def point_float(self, t) -> np.ndarray:
        return np.array([float(b) * float(t) ** float(e) for b, e in zip(self.base, self.exponents)])

    def contains(self, p: Sequence, tol: float = 1e-10) -> bool:
        """Whether ``log p - log x*`` is parallel to the exponent vector."""
        lr = np.log(np.asarray(p, dtype=float)) - np.log(np.array([float(b) for b in self.base]))
        d = np.array([float(e) for e in self.exponents])
        s = lr.dot(d) / d.dot(d)
        return bool(np.linalg.norm(lr - s * d) <= tol * max(1.0, np.linalg.norm(lr)))

    def parameter_of(self, p: Sequence) -> float:
        lr = np.log(np.asarray(p, dtype=float)) - np.log(np.array([float(b) for b in self.base]))
        d = np.array([float(e) for e in self.exponents])
        return float(math.exp(lr.dot(d) / d.dot(d)))

    def reparametrized(self, base: Sequence, exponents: Sequence | None = None) -> "EquilibriumCurve":
        """Same set, new base point (must lie on the curve) and scaling of d."""
        ex = tuple(Fraction(e) for e in (exponents if exponents is not None else self.exponents))
        if not self.contains([float(b) for b in base]):
            raise CurveError("new base point is not on the curve")
        return EquilibriumCurve(tuple(base), ex)

    def to_json(self) -> dict:
        from .report import rational_repr

        return {"basePoint": [rational_repr(b) for b in self.base], "exponents": [rational_repr(e) for e in self.exponents]}


class ExponentSum:
    """Finite sum ``sum_p alpha_p t^p`` with distinct sorted rational exponents."""

    def __init__(self, terms):
        acc: dict[Fraction, object] = {}
        for c, p in terms:
            p = Fraction(p)
            acc[p] = acc.get(p, 0) + c
        self.terms = tuple((acc[p], p) for p in sorted(acc) if acc[p] != 0)

    @property
    def exact(self) -> bool:
        return all(_exact(c) for c, _ in self.terms)

    def __call__(self, t):
        if _exact(t) and self.exact and all(p.denominator == 1 for _, p in self.terms):
            return sum((c * Fraction(t) ** int(p) for c, p in self.terms), Fraction(0))
        return sum(float(c) * float(t) ** float(p) for c, p in self.terms)

    def derivative(self) -> "ExponentSum":
        return ExponentSum([(c * p, p - 1) for c, p in self.terms if p != 0])

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExponentSum):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return " + ".join(f"({c})*t^{p}" for c, p in self.terms) or "0"

    def to_json(self) -> list:
        from .report import rational_repr

        return [{"coefficient": rational_repr(c), "exponent": rational_repr(p)} for c, p in self.terms]


# --- equilibrium search -----------------------------------------------------


def _s_projector(report: StructureReport) -> np.ndarray:
    b = np.array(report.stoichiometric_basis, dtype=float).T  # n x r
    return np.linalg.solve(b.T @ b, b.T)


def find_equilibrium_in_class(
    field: PolynomialVectorField,
    report: StructureReport,
    x0: Sequence[float],
    *,
    max_iter: int = 200,
    tol: float = 1e-13,
    target: Sequence[float] | None = None,
) -> np.ndarray:
    """Damped Newton in log coordinates for a positive equilibrium in the
    stoichiometric class of ``x0`` (or the class with conservation values
    ``target``, using ``x0`` only as the starting point).

    Each rate residual is measured relative to the size of that
    component's monomial terms, so that drifting toward a boundary
    equilibrium (where the terms themselves vanish) is not convergence. The
    stacked system (rates plus conservation rows) is overdetermined but
    consistent and is solved in the least-squares sense.
    """
    n = field.n
    cons = np.array([[float(v) for v in c] for c in report.conservation_basis]).reshape(-1, n)
    x0 = np.asarray(x0, dtype=float)
    target = cons @ x0 if target is None else np.asarray(target, dtype=float)
    cscale = max(1.0, float(np.abs(target).max())) if target.size else 1.0
    absC = np.abs(field.C)

    def resid(u):
        x = np.exp(u)
        mon = np.prod(x[None, :] ** field.E, axis=1)
        w = absC @ mon
        w = np.where(w > 0, w, 1.0)
        return np.concatenate([(field.C @ mon) / w, (cons @ x - target) / cscale]), w

    u = np.log(x0)
    r, w = resid(u)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        for _ in range(max_iter):
            nr = np.linalg.norm(r)
            if nr <= tol:
                return np.exp(u)
            x = np.exp(u)
            mon = np.prod(x[None, :] ** field.E, axis=1)
            # exact derivative of f_k / w_k in log coordinates
            jf = (field.C * mon[None, :]) @ field.E
            jw = (absC * mon[None, :]) @ field.E
            jr = (jf - r[:n, None] * jw) / w[:, None]
            jac = np.vstack([jr, cons * x[None, :] / cscale])
            if not np.all(np.isfinite(jac)):
                raise CurveError("Newton for the equilibrium left the representable range")
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
            lam = 1.0
            while lam > 1e-10:
                un = u + lam * step
                rn, wn = resid(un)
                if np.all(np.isfinite(rn)) and np.linalg.norm(rn) < nr:
                    break
                lam *= 0.5
            else:
                if nr <= 1e-9:
                    return np.exp(u)
                raise CurveError("Newton for the equilibrium stalled")
            u, r, w = un, rn, wn
    if np.linalg.norm(r) <= 1e-9:
        return np.exp(u)
    raise CurveError(f"Newton for the equilibrium did not converge (relative residual {np.linalg.norm(r):.3e})")


def _snap_rational(field: PolynomialVectorField, x: np.ndarray, d: Sequence[Fraction]):
    """Look for an exact rational point on the curve through ``x``."""
    for i, di in enumerate(d):
        if di == 0:
            continue
        t = x[i] ** (-1.0 / float(di))
        cand = [xj * t ** float(dj) for xj, dj in zip(x, d)]
        for den in (1, 2**6 * 3**3 * 5**2, 10**6):
            p = [Fraction(c).limit_denominator(den) for c in cand]
            if all(v > 0 for v in p) and all(v == 0 for v in field.evaluate(p)):
                return tuple(p)
    return None


def toric_equilibrium_curve(
    field: PolynomialVectorField, report: StructureReport | None = None
) -> EquilibriumCurve:
    """Positive equilibria as a curve; needs rank n-1 and the deficiency-one
    hypotheses."""
    if report is None:
        if field.network is None:
            raise CurveError("structure report or network required")
        report = structure_report(field.network)
    if field.network is not None:
        app = deficiency_one_applicable(field.network, report)
        if not app:
            raise CurveError("hypothesis violation: " + "; ".join(app.failed))
    if report.rank != field.n - 1:
        raise CurveError(f"hypothesis violation: rank {report.rank} != n - 1 = {field.n - 1}")
    d = tuple(Fraction(v) for v in report.conservation_basis[0])
    x = find_equilibrium_in_class(field, report, np.ones(field.n))
    exact = _snap_rational(field, x, d)
    base = exact if exact is not None else tuple(float(v) for v in x)
    return EquilibriumCurve(base, d)


def trace_on_curve(field: PolynomialVectorField, curve: EquilibriumCurve) -> ExponentSum:
    """``tr J(x(t))`` as an exponent sum in ``t``."""
    tr = field.jacobian().trace_poly()
    terms = []
    for e, c in tr.items():
        coef = poly_eval({e: c}, curve.base)
        if not _exact(coef):
            coef = float(coef)
        p = sum((Fraction(ei) * di for ei, di in zip(e, curve.exponents)), Fraction(0))
        terms.append((coef, p))
    out = ExponentSum(terms)
    if not out.exact:
        big = max(abs(float(c)) for c, _ in out.terms) if out.terms else 0.0
        out = ExponentSum([(c, p) for c, p in out.terms if abs(float(c)) > 1e-14 * big])
    return out


# --- univariate polynomials over Q, coefficient lists low -> high ----------


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _pderiv(p):
    return _trim([i * c for i, c in enumerate(p)][1:])


def _pdivmod(a, b):
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        f = r[-1] / b[-1]
        q[k] = f
        for i, bc in enumerate(b):
            r[i + k] -= f * bc
        r = _trim(r)
    return _trim(q), r


def _pgcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a] if a else a


def _peval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _square_free(p):
    """Yun's algorithm: list of (factor, multiplicity)."""
    out = []
    dp = _pderiv(p)
    a0 = _pgcd(p, dp)
    b, _ = _pdivmod(p, a0)
    c, _ = _pdivmod(dp, a0)
    d = [ci - bi for ci, bi in zip(c + [0] * len(b), _pderiv(b) + [0] * len(c))]
    d = _trim(d)
    i = 1
    while len(b) > 1:
        a = _pgcd(b, d) if d else b
        if len(a) > 1:
            out.append((a, i))
        b, _ = _pdivmod(b, a)
        c, _ = _pdivmod(d, a) if d else ([], [])
        db = _pderiv(b)
        n = max(len(c), len(db))
        d = _trim([(c[k] if k < len(c) else 0) - (db[k] if k < len(db) else 0) for k in range(n)])
        i += 1
    return out


def _sturm(p):
    seq = [p, _pderiv(p)]
    while len(seq[-1]) > 1:
        _, r = _pdivmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return seq


def _sign_changes(seq, x):
    vals = [_peval(s, x) for s in seq]
    vals = [v for v in vals if v != 0]
    return sum(1 for u, v in zip(vals, vals[1:]) if (u > 0) != (v > 0))


def _positive_roots_exact(p) -> list[float]:
    """Positive roots of a square-free polynomial over Q (Sturm isolation)."""
    p = _trim(p)
    if len(p) <= 1:
        return []
    bound = 1 + max(abs(c / p[-1]) for c in p[:-1])
    seq = _sturm(p)
    lo, hi = Fraction(0), Fraction(bound)
    if _peval(p, lo) == 0:
        # root at zero is not positive; nudge
        lo = Fraction(1, 10**30)
    stack = [(lo, hi)]
    isolated = []
    while stack:
        a, b = stack.pop()
        k = _sign_changes(seq, a) - _sign_changes(seq, b)
        if k == 0:
            continue
        if k == 1:
            isolated.append((a, b))
            continue
        m = (a + b) / 2
        if _peval(p, m) == 0:
            isolated.append((m, m))
            m2 = m + (b - a) / 1024
            stack.append((a, m - (b - a) / 1024))
            stack.append((m2, b))
            continue
        stack.extend([(a, m), (m, b)])
    roots = []
    for a, b in sorted(isolated):
        if a == b:
            roots.append(float(a))
            continue
        fa = _peval(p, a)
        for _ in range(200):
            if b - a <= Fraction(1, 2**60) * b:
                break
            m = Fraction(float((a + b) / 2)) if (a + b) / 2 != 0 else (a + b) / 2
            if not (a < m < b):
                m = (a + b) / 2
            fm = _peval(p, m)
            if fm == 0:
                a = b = m
                break
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b = m
        roots.append(float((a + b) / 2))
    return roots


def _positive_roots_float(coeffs: list[float]) -> list[tuple[float, int]]:
    c = np.array(coeffs[::-1], dtype=float)
    r = np.roots(c)
    big = max(1.0, np.abs(r).max() if r.size else 1.0)
    cand = sorted(float(z.real) for z in r if abs(z.imag) <= 1e-7 * big and z.real > 0)
    out: list[list] = []
    for z in cand:
        if out and abs(z - out[-1][0]) <= 1e-6 * max(1.0, z):
            out[-1][1] += 1
            out[-1][0] = (out[-1][0] * (out[-1][1] - 1) + z) / out[-1][1]
        else:
            out.append([z, 1])
    poly = np.poly1d(c)
    res = []
    for z, mult in out:
        q = poly.deriv(mult - 1) if mult > 1 else poly
        dq = q.deriv()
        for _ in range(50):
            dz = dq(z)
            if dz == 0:
                break
            step = q(z) / dz
            z -= step
            if abs(step) <= 1e-16 * abs(z):
                break
        res.append((float(z), mult))
    return res


def trace_roots(ts: ExponentSum, *, with_multiplicity: bool = False):
    """Positive roots of an exponent sum, listed with multiplicity.

    Returns roots repeated according to multiplicity, or ``(root, mult)``
    pairs when ``with_multiplicity`` is set.
    """
    if not ts:
        raise ValueError("identically zero exponent sum")
    terms = ts.terms
    if len(terms) == 1:
        return []
    pmin = terms[0][1]
    q = lcm(*[(p - pmin).denominator for _, p in terms])
    pairs: list[tuple[float, int]] = []
    if len(terms) == 2:
        (c1, p1), (c2, p2) = terms
        ratio = -c1 / c2
        if ratio > 0:
            dp = p2 - p1
            if _exact(ratio) and dp.denominator == 1 and dp.numerator == 1:
                pairs.append((float(ratio), 1))
            else:
                pairs.append((float(ratio) ** (1.0 / float(dp)), 1))
    else:
        deg = [int((p - pmin) * q) for _, p in terms]
        coeffs = [0] * (max(deg) + 1)
        for (c, _), k in zip(terms, deg):
            coeffs[k] = c
        if ts.exact:
            poly = [Fraction(c) for c in coeffs]
            for factor, mult in _square_free(poly):
                for u in _positive_roots_exact(factor):
                    pairs.append((u ** q if q != 1 else u, mult))
        else:
            for u, mult in _positive_roots_float([float(c) for c in coeffs]):
                pairs.append((u ** q if q != 1 else u, mult))
    pairs.sort()
    if with_multiplicity:
        return pairs
    return [r for r, m in pairs for _ in range(m)]


def equilibrium_at_class(curve: EquilibriumCurve, d_pos: Sequence, c: float):
    """Solve ``d_pos . x(t) = c`` for ``t``; returns ``(t, x(t))``."""
    d_pos = np.array([float(v) for v in d_pos])
    if np.any(d_pos <= 0) or c <= 0:
        raise ValueError("need a positive class vector and positive level")
    w = d_pos * np.array([float(b) for b in curve.base])
    e = np.array([float(v) for v in curve.exponents])
    if np.all(e <= 0):
        e = -e
        flip = True
    else:
        flip = False
    if np.any(e < 0):
        raise ValueError("curve exponents must share a sign for a monotone class map")

    def phi(s):
        return float(w @ np.exp(e * s)) - c

    def dphi(s):
        return float((w * e) @ np.exp(e * s))

    lo, hi = -1.0, 1.0
    while phi(lo) > 0:
        lo *= 2
    while phi(hi) < 0:
        hi *= 2
    s = 0.5 * (lo + hi)
    for _ in range(200):
        f = phi(s)
        if f > 0:
            hi = s
        else:
            lo = s
        ds = dphi(s)
        s_new = s - f / ds if ds > 0 else 0.5 * (lo + hi)
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 1e-16 * max(1.0, abs(s)) or hi - lo <= 1e-16 * max(1.0, abs(s)):
            s = s_new
            break
        s = s_new
    t = math.exp(-s if flip else s)
    return t, curve.point_float(t)
