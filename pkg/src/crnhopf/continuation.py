"""Pseudo-arclength continuation of limit cycles.

A branch is followed in the unknowns ``(s, T, p)``: section coordinate of
the anchor, period and the continuation parameter (a class level or a model
parameter). The extended system is the shooting residual of
:mod:`crnhopf.dynamics` plus the arclength condition. All three unknowns are
scaled by their starting magnitudes, so step bounds are dimensionless.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import dynamics as dyn
from .dsl import NetworkSource
from .network import structure_report
from .polyfield import PolynomialVectorField, build_vector_field

__all__ = [
    "ContinuationError",
    "ClassLevelFamily",
    "ParameterFamily",
    "BranchPoint",
    "Fold",
    "CycleBranch",
    "continue_cycles",
    "detect_folds",
    "export_branch",
    "LedgerStep",
    "ThreeCycleReport",
    "three_cycle_search",
]

H_MIN, H_MAX = 1e-5, 1e-1


class ContinuationError(RuntimeError):
    def __init__(self, msg: str, last: "BranchPoint | None" = None):
        super().__init__(msg)
        self.last = last


class ClassLevelFamily:
    """Cycles of one field across the classes ``d . x = c``."""

    name = "c"

    def __init__(self, field: PolynomialVectorField, d: Sequence):
        self.base_field = field
        self.d = tuple(d)
        self.report = structure_report(field.network)

    def field(self, p: float) -> PolynomialVectorField:
        return self.base_field

    def frame(self, p: float, orientation=None) -> dyn.ClassFrame:
        return dyn.class_frame(self.base_field, self.d, p, report=self.report, orientation=orientation)


class ParameterFamily:
    """Cycles in a fixed class while a rate parameter varies.

    ``builder(p)`` returns the network at parameter value ``p``.
    """

    def __init__(self, builder: Callable[[float], NetworkSource], d: Sequence, c: float, name: str = "p"):
        self.builder = builder
        self.d = tuple(d)
        self.c = float(c)
        self.name = name
        self._cache: dict[float, PolynomialVectorField] = {}

    def field(self, p: float) -> PolynomialVectorField:
        key = float(p)
        if key not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = build_vector_field(self.builder(key))
        return self._cache[key]

    def frame(self, p: float, orientation=None) -> dyn.ClassFrame:
        f = self.field(p)
        return dyn.class_frame(f, self.d, self.c, orientation=orientation)


@dataclass
class BranchPoint:
    param: float
    cycle: dyn.LimitCycle
    tangent: np.ndarray  # scaled (s, T, p)
    sigma: float

    @property
    def mu(self) -> float:
        return self.cycle.mu


@dataclass
class Fold:
    param: float
    mu: float
    s: float
    period: float
    index: int  # branch point preceding the fold

    def to_json(self) -> dict:
        return {"param": self.param, "multiplier": self.mu, "sectionCoordinate": self.s, "period": self.period}


@dataclass
class CycleBranch:
    param_name: str
    points: list[BranchPoint]
    folds: list[Fold] = dc_field(default_factory=list)
    hopf_endpoint: float | None = None
    termination: str = ""
    family: object = None
    scales: np.ndarray | None = None

    @property
    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    @property
    def multipliers(self) -> np.ndarray:
        return np.array([p.mu for p in self.points])

    @property
    def cycles(self) -> list[dyn.LimitCycle]:
        return [p.cycle for p in self.points]

    def __len__(self) -> int:
        return len(self.points)


class _System:
    """Extended shooting system in scaled unknowns ``v = (s, T, p) / scales``."""

    def __init__(self, family, scales, int_tol, kernel):
        self.family = family
        self.scales = np.asarray(scales, dtype=float)
        self.int_tol = int_tol
        self.kernel = kernel
        self.orientation = None

    def _frame(self, p):
        fr = self.family.frame(p, orientation=self.orientation)
        return fr

    def residual(self, v, jac=True):
        s, T, p = v * self.scales
        f = self.family.field(p)
        fr = self._frame(p)
        if not (0 < s < fr.s_max) or T <= 0:
            raise dyn.NewtonDivergence(f"iterate outside the admissible region (s={s:.4g}, T={T:.4g})")
        x0, xT, phi = dyn._shoot(f, fr, s, T, self.kernel, self.int_tol, variational=jac)
        g = fr.proj @ (xT - x0)
        if not jac:
            return g, None, fr, x0, xT, phi
        gs = fr.proj @ (phi @ fr.w - fr.w)
        gT = fr.proj @ f.evaluate(xT)
        hp = 1e-6 * max(abs(p), 1e-3)
        gp = (self._g(s, T, p + hp) - self._g(s, T, p - hp)) / (2 * hp)
        J = np.column_stack([gs, gT, gp]) * self.scales[None, :]
        return g, J, fr, x0, xT, phi

    def _g(self, s, T, p):
        f = self.family.field(p)
        fr = self._frame(p)
        x0, xT, _ = dyn._shoot(f, fr, s, T, self.kernel, self.int_tol, variational=False)
        return fr.proj @ (xT - x0)


def _null_vector(J: np.ndarray, ref: np.ndarray | None) -> np.ndarray:
    _, _, vt = np.linalg.svd(J)
    tau = vt[-1]
    tau = tau / np.linalg.norm(tau)
    if ref is not None and tau @ ref < 0:
        tau = -tau
    return tau


def _correct(sys: _System, v_pred, tau, tol, max_iter=8):
    """Newton on [G(v); tau . (v - v_pred)] = 0; returns (v, iterations, data)."""
    v = v_pred.copy()
    for it in range(1, max_iter + 1):
        g, J, fr, x0, xT, phi = sys.residual(v)
        closure = float(np.linalg.norm(xT - x0))
        scale = max(1.0, float(np.abs(fr.x_eq).max()))
        A = np.vstack([J, tau])
        rhs = -np.concatenate([g, [tau @ (v - v_pred)]])
        dv = np.linalg.solve(A, rhs)
        v = v + dv
        if closure <= tol * scale and np.linalg.norm(dv) <= 1e-9 * max(1.0, np.linalg.norm(v)):
            break
        if np.linalg.norm(dv) > 0.5:
            raise dyn.NewtonDivergence("corrector step too large")
    else:
        g, J, fr, x0, xT, phi = sys.residual(v)
        closure = float(np.linalg.norm(xT - x0))
        if closure > tol * max(1.0, float(np.abs(fr.x_eq).max())):
            raise dyn.NewtonDivergence(f"corrector did not converge (closure {closure:.2e})")
    g, J, fr, x0, xT, phi = sys.residual(v)
    return v, it, (J, fr, x0, xT, phi)


def _make_cycle(sys: _System, v, data, samples=257) -> dyn.LimitCycle:
    J, fr, x0, xT, phi = data
    s, T, p = v * sys.scales
    f = sys.family.field(p)
    times, orbit = dyn._dense_orbit(f, x0, T, samples, sys.int_tol, sys.kernel)
    return dyn.LimitCycle(
        level=fr.level, anchor=x0, s=float(s), period=float(T), mu=dyn._monodromy_mu(fr, phi),
        multipliers=np.linalg.eigvals(phi), closure=float(np.linalg.norm(xT - x0)), frame=fr,
        times=times, orbit=orbit, species=tuple(f.species),
    )


def continue_cycles(
    family,
    start: dyn.LimitCycle,
    p0: float,
    p_range: tuple[float, float],
    *,
    direction: int = 1,
    h0: float = 1e-2,
    h_min: float = H_MIN,
    h_max: float = H_MAX,
    max_points: int = 400,
    tol: float = 1e-8,
    int_tol: float = 1e-12,
    hopf_fraction: float = 2e-3,
    stop_at_folds: int | None = None,
    close_loops: bool = True,
    refine_folds: bool = True,
    kernel: str | None = None,
) -> CycleBranch:
    """Follow the cycle ``start`` (at parameter ``p0``) through ``p_range``.

    ``direction`` orients the initial tangent toward increasing (``+1``) or
    decreasing parameter. Termination: leaving the range, amplitude
    collapsing onto the equilibrium (Hopf endpoint), the branch closing on
    itself, ``stop_at_folds`` folds seen, ``max_points``, or step underflow.
    """
    lo, hi = sorted(float(v) for v in p_range)
    if not lo <= p0 <= hi:
        raise ValueError("start parameter outside the range")
    scales = np.array([abs(start.s), start.period, max(abs(p0), 1e-3)])
    sys = _System(family, scales, int_tol, kernel)
    sys.orientation = start.frame.w
    v = np.array([start.s, start.period, p0]) / scales
    try:
        _, J, fr, *_ = sys.residual(v)
    except dyn.DynamicsError as exc:
        raise ContinuationError(f"first correction failed: {exc}") from exc
    tau = _null_vector(J, None)
    if tau[2] * direction < 0:
        tau = -tau
    pts = [BranchPoint(float(p0), start, tau, 0.0)]
    branch = CycleBranch(family.name, pts, family=family, scales=scales)
    h = float(h0)
    easy = 0
    sigma = 0.0
    x_scale = max(1.0, float(np.abs(start.frame.x_eq).max()))
    while True:
        if len(pts) >= max_points:
            branch.termination = "max-points"
            break
        if h < h_min:
            branch.termination = "step-underflow"
            break
        prev = pts[-1]
        v_prev = np.array([prev.cycle.s, prev.cycle.period, prev.param]) / scales
        v_pred = v_prev + h * prev.tangent
        sys.orientation = prev.cycle.frame.w
        try:
            v_new, iters, data = _correct(sys, v_pred, prev.tangent, tol)
        except (dyn.DynamicsError, np.linalg.LinAlgError, ValueError, ArithmeticError):
            h *= 0.5
            easy = 0
            continue
        J = data[0]
        tau = _null_vector(J, prev.tangent)
        if np.linalg.norm(v_new - v_prev) > 2.0 * h or tau @ prev.tangent < 0.5:
            # too far from the predictor or a sharp turn: shorten
            h *= 0.5
            easy = 0
            continue
        s, T, p = v_new * scales
        cyc = _make_cycle(sys, v_new, data)
        sigma += float(np.linalg.norm(v_new - v_prev))
        pts.append(BranchPoint(float(p), cyc, tau, sigma))
        if not lo <= p <= hi:
            branch.termination = "range-end"
            break
        if cyc.amplitude <= hopf_fraction * x_scale:
            branch.hopf_endpoint = _hopf_extrapolate(pts)
            branch.termination = "hopf"
            break
        folds_seen = sum(1 for a, b in zip(pts, pts[1:]) if a.tangent[2] * b.tangent[2] < 0)
        if stop_at_folds is not None and folds_seen >= stop_at_folds:
            branch.termination = "folds"
            break
        if close_loops and folds_seen >= 2 and len(pts) > 4:
            v0 = np.array([pts[0].cycle.s, pts[0].cycle.period, pts[0].param]) / scales
            if np.linalg.norm(v_new - v0) <= 1.5 * h and tau @ pts[0].tangent > 0:
                branch.termination = "closed"
                break
        if iters <= 3:
            easy += 1
            if easy >= 3:
                h = min(2 * h, h_max)
                easy = 0
        else:
            easy = 0
    branch.folds = detect_folds(branch, refine=refine_folds, kernel=kernel, tol=tol, int_tol=int_tol)
    return branch


def _hopf_extrapolate(pts: list[BranchPoint]) -> float:
    """Parameter where amplitude^2, linear in p near a Hopf point, reaches zero."""
    tail = pts[-3:]
    p = np.array([bp.param for bp in tail])
    a2 = np.array([bp.cycle.amplitude ** 2 for bp in tail])
    if len(tail) < 2 or np.ptp(p) == 0:
        return float(p[-1])
    slope, icpt = np.polyfit(p, a2, 1)
    if slope == 0:
        return float(p[-1])
    est = -icpt / slope
    # keep the estimate next to the last point; a wild value means the
    # tail is not yet in the square-root regime
    return float(est) if abs(est - p[-1]) <= abs(p[-1] - p[0]) else float(p[-1])


def detect_folds(
    branch: CycleBranch,
    *,
    refine: bool = True,
    tol: float = 1e-8,
    int_tol: float = 1e-12,
    kernel: str | None = None,
) -> list[Fold]:
    """Fold points of ``branch``: sign changes of the parameter component of
    the tangent, placed by a quadratic fit of ``p(sigma)`` and, when the
    family is available, refined by bisection in arclength."""
    pts = branch.points
    folds: list[Fold] = []
    if len(pts) < 3:
        return folds
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        if a.tangent[2] * b.tangent[2] >= 0:
            continue
        j = min(max(i, 1), len(pts) - 2)
        sig = np.array([pts[k].sigma for k in (j - 1, j, j + 1)])
        par = np.array([pts[k].param for k in (j - 1, j, j + 1)])
        c2, c1, c0 = np.polyfit(sig, par, 2)
        s_f = -c1 / (2 * c2) if c2 != 0 else 0.5 * (a.sigma + b.sigma)
        fold = Fold(float(np.polyval([c2, c1, c0], s_f)), 0.5 * (a.mu + b.mu), 0.5 * (a.cycle.s + b.cycle.s),
                    0.5 * (a.cycle.period + b.cycle.period), i)
        if refine and branch.family is not None and branch.scales is not None:
            try:
                fold = _refine_fold(branch, i, tol, int_tol, kernel)
            except (dyn.DynamicsError, np.linalg.LinAlgError):
                pass
        folds.append(fold)
    return folds


def _refine_fold(branch, i, tol, int_tol, kernel, iters=40) -> Fold:
    a, b = branch.points[i], branch.points[i + 1]
    scales = branch.scales
    sys = _System(branch.family, scales, int_tol, kernel)
    sys.orientation = a.cycle.frame.w
    va = np.array([a.cycle.s, a.cycle.period, a.param]) / scales
    lo, hi = 0.0, float(b.sigma - a.sigma)
    sign_a = np.sign(a.tangent[2])
    best = None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v, _, data = _correct(sys, va + mid * a.tangent, a.tangent, tol)
        tau = _null_vector(data[0], a.tangent)
        best = (v, data)
        if np.sign(tau[2]) == sign_a:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-7:
            break
    v, data = best
    s, T, p = v * scales
    mu = dyn._monodromy_mu(data[1], data[4])
    return Fold(float(p), float(mu), float(s), float(T), i)


# --- export -----------------------------------------------------------------


def export_branch(branch: CycleBranch, path, *, orbits: bool = True, gnuplot: bool = False) -> Path:
    """Write ``<path>.csv`` (one row per branch point), per-cycle orbit CSVs
    under ``<path>_orbits/`` and a JSON manifest ``<path>.json``."""
    if not branch.points:
        raise ValueError("cannot export an empty branch")
    path = Path(path)
    if path.suffix:
        path = path.with_suffix("")
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(branch.points[0].cycle.anchor)
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([branch.param_name, "period", "multiplier", "stability"] + [f"x{i + 1}" for i in range(n)])
        for bp in branch.points:
            cy = bp.cycle
            wr.writerow(
                [f"{bp.param:.15g}", f"{cy.period:.15g}", f"{cy.mu:.15g}", cy.stability]
                + [f"{v:.15g}" for v in cy.anchor]
            )
    orbit_files = []
    if orbits:
        odir = Path(str(path) + "_orbits")
        for k, bp in enumerate(branch.points):
            p = dyn.export_cycle(bp.cycle, odir / f"orbit_{k:04d}.csv")
            orbit_files.append(str(p.relative_to(path.parent)))
    manifest = {
        "parameter": branch.param_name,
        "points": len(branch.points),
        "branch": csv_path.name,
        "orbits": orbit_files,
        "folds": [f.to_json() for f in branch.folds],
        "hopfEndpoint": branch.hopf_endpoint,
        "termination": branch.termination,
    }
    path.with_suffix(".json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if gnuplot:
        _gnuplot(branch, path, orbit_files)
    return csv_path


def _gnuplot(branch, path: Path, orbit_files):
    name = branch.param_name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{name}'",
        "set ylabel 'period'",
        f"plot '{path.with_suffix('.csv').name}' using 1:2 with linespoints",
        "pause -1",
    ]
    if orbit_files:
        lines += ["set xlabel 'x1'", "set ylabel 'x2'"]
        plots = ", ".join(f"'{f}' using 2:3 with lines notitle" for f in orbit_files[:: max(1, len(orbit_files) // 20)])
        lines += [f"plot {plots}", "pause -1"]
    path.with_suffix(".gp").write_text("\n".join(lines) + "\n")


# --- three nested cycles near a degenerate focus ----------------------------


@dataclass
class LedgerStep:
    step: str
    targets: tuple[float, float, float]
    point: tuple[float, float, float]
    trace: float
    focal: list
    expected: str
    holds: bool

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "targets": list(self.targets),
            "point": list(self.point),
            "trace": self.trace,
            "focalValues": self.focal,
            "expected": self.expected,
            "holds": self.holds,
        }


@dataclass
class ThreeCycleReport:
    success: bool
    ledger: list[LedgerStep]
    attempts: list[dict]
    cycles: list[dyn.LimitCycle]
    degenerate: "object | None" = None
    message: str = ""

    @property
    def ledger_ok(self) -> bool:
        return all(s.holds for s in self.ledger)

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "message": self.message,
            "degeneratePoint": self.degenerate.to_json() if self.degenerate is not None else None,
            "ledger": [s.to_json() for s in self.ledger],
            "attempts": self.attempts,
            "cycles": [c.to_json() for c in self.cycles],
        }


def _quad_form(jet, vec) -> float:
    (a11, a12), (a21, a22) = jet.linear
    half = (a11 + a22) / 2
    p, q, r = float(a11 - half), float(a12), float(a21)
    sgn = 1.0 if r > 0 else -1.0
    u, v = vec
    return sgn * (r * u * u - 2 * p * u * v - q * v * v) / 2


def three_cycle_search(
    family: Callable,
    guess: Sequence[float],
    d: Sequence,
    *,
    curve=None,
    amplitude: float = 0.05,
    ratio: float = 4.0,
    shrink: float = 0.25,
    attempts: int = 6,
    grid: int = 90,
    int_tol: float = 1e-13,
    kernel: str | None = None,
) -> ThreeCycleReport:
    """Scripted perturbation from the point where trace, L1 and L2 vanish.

    The targets are chosen so that ``tau + L1 H + L2 H^2 + L3 H^3`` has the
    roots ``H3 = h``, ``H2 = h/ratio``, ``H1 = h/ratio^2`` (``H`` being the
    quadratic form of the focal normalization). Steps: move along L1 = 0 to
    L2 > 0, then along the trace surface to L1 < 0, then off it to trace > 0;
    the sign ledger is checked after every step. ``h`` starts from
    ``amplitude`` (relative size of the outer cycle) and shrinks by
    ``shrink`` when fewer than three cycles are resolved.
    """
    from .focal import planar_reduction, solve_focus_conditions
    import mpmath

    ledger: list[LedgerStep] = []
    tried: list[dict] = []
    try:
        deg = solve_focus_conditions(family, guess, (0, 0, 0), curve=curve)
    except Exception as exc:  # noqa: BLE001 - reported, not hidden
        return ThreeCycleReport(False, [], [], [], None, f"degenerate point not found: {exc}")
    l3 = float(deg.focal[2])
    ledger.append(LedgerStep("start", (0.0, 0.0, 0.0), deg.floats(), float(deg.trace), [float(v) for v in deg.focal],
                             "L3 < 0", l3 < 0))
    if l3 >= 0:
        return ThreeCycleReport(False, ledger, [], [], deg, "third focal value is not negative")

    # scale of H along the section ray at the degenerate point
    a0, b0, t0 = deg.floats()
    net0 = family(Fraction(a0), Fraction(b0))
    f0 = build_vector_field(net0)
    x0 = curve.point_float(t0)
    fr0 = dyn.class_frame(f0, d, float(np.dot([float(v) for v in d], x0)), x_eq=x0)
    old = mpmath.mp.dps
    mpmath.mp.dps = 30
    try:
        jet0 = planar_reduction(f0, [mpmath.mpf(v) for v in x0], kind="mp", degree=3, trace_tol=1e-6)
    finally:
        mpmath.mp.dps = old
    V = np.array(jet0.basis, dtype=float).T
    Pw = np.linalg.solve(V.T @ V, V.T @ fr0.w)
    h_unit = abs(_quad_form(jet0, Pw))
    scale = float(np.abs(x0).max())

    h_rel = amplitude
    for k in range(attempts):
        s3 = h_rel * scale
        H3 = h_unit * s3**2
        Hs = (H3 / ratio**2, H3 / ratio, H3)
        s1, s2, _ = (math.sqrt(H / h_unit) for H in Hs)
        e2 = -l3 * sum(Hs)
        e1 = l3 * (Hs[0] * Hs[1] + Hs[0] * Hs[2] + Hs[1] * Hs[2])
        e0 = -l3 * Hs[0] * Hs[1] * Hs[2]
        rec = {"outerRelativeAmplitude": h_rel, "targets": {"L2": e2, "L1": e1, "trace": e0}}
        steps = [
            ("i: along L1 = 0", (0.0, 0.0, e2), lambda tr, L: L[1] > 0 and L[2] < 0, "L2 > 0"),
            ("ii: along trace = 0", (0.0, e1, e2), lambda tr, L: L[0] < 0 and L[1] > 0, "L1 < 0"),
            ("iii: off the trace surface", (e0, e1, e2), lambda tr, L: tr > 0 and L[0] < 0, "trace > 0"),
        ]
        z = deg.floats()
        step_ledger = []
        ok = True
        for name, tg, check, expected in steps:
            try:
                pt = solve_focus_conditions(family, z, tg, curve=curve)
            except Exception as exc:  # noqa: BLE001
                rec["failure"] = f"{name}: {exc}"
                ok = False
                break
            L = [float(v) for v in pt.focal]
            holds = bool(check(float(pt.trace), L))
            step_ledger.append(LedgerStep(name, tuple(float(v) for v in tg), pt.floats(), float(pt.trace), L, expected, holds))
            if not holds:
                rec["failure"] = f"{name}: sign ledger violated"
                ok = False
                break
            z = pt.floats()
        rec["ledger"] = [s.to_json() for s in step_ledger]
        if not ok:
            tried.append(rec)
            h_rel *= shrink
            continue
        a, b, t = z
        fld = build_vector_field(family(Fraction(a), Fraction(b)))
        xe = curve.point_float(t)
        fr = dyn.class_frame(fld, d, float(np.dot([float(v) for v in d], xe)), x_eq=xe)
        lo, hi = s1 / 4, min(4 * s3, 0.99 * fr.s_max)
        try:
            cycles = dyn.scan_cycles(fld, fr, np.geomspace(lo, hi, grid), int_tol=int_tol, kernel=kernel)
        except dyn.DynamicsError as exc:
            cycles = []
            rec["failure"] = f"scan: {exc}"
        rec["predictedSectionCoordinates"] = [s1, s2, s3]
        rec["foundSectionCoordinates"] = [c.s for c in cycles]
        rec["foundStability"] = [c.stability for c in cycles]
        tried.append(rec)
        pattern = [c.stability for c in cycles]
        if pattern == ["stable", "unstable", "stable"]:
            ledger.extend(step_ledger)
            return ThreeCycleReport(True, ledger, tried, cycles, deg, "three nested cycles found")
        h_rel *= shrink
    if tried and "ledger" in tried[-1]:
        ledger.extend(
            LedgerStep(s["step"], tuple(s["targets"]), tuple(s["point"]), s["trace"], s["focalValues"], s["expected"], s["holds"])
            for s in tried[-1]["ledger"]
        )
    return ThreeCycleReport(False, ledger, tried, [], deg, "three cycles not resolved at the attempted perturbation sizes")
