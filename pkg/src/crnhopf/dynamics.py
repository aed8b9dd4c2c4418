"""Time integration, Poincaré sections and limit cycles by shooting.

Cycles live in two-dimensional stoichiometric classes. A class is described
by a :class:`ClassFrame`: the in-class equilibrium, a basis of the
stoichiometric subspace S and a section ray ``x_eq + s*w`` (``s > 0``) whose
hyperplane normal ``nrm`` lies in S and is orthogonal to ``w``. All points
generated by the shooting code are of the form ``x_eq + (element of S)``, so
the conservation laws hold by construction.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .equilibria import CurveError, equilibrium_at_class, find_equilibrium_in_class, toric_equilibrium_curve
from .network import StructureReport, structure_report
from .polyfield import PolynomialVectorField

__all__ = [
    "DynamicsError",
    "StepUnderflow",
    "NoReturn",
    "DegenerateSection",
    "NewtonDivergence",
    "Trajectory",
    "Section",
    "ClassFrame",
    "LimitCycle",
    "integrate",
    "poincare_map",
    "class_frame",
    "displacement",
    "scan_cycles",
    "find_limit_cycle",
    "floquet_multipliers",
    "converge_cycle",
    "export_trajectory",
    "export_cycle",
]


class DynamicsError(RuntimeError):
    pass


class StepUnderflow(DynamicsError):
    def __init__(self, t: float, x: np.ndarray):
        self.t = float(t)
        self.x = np.array(x, dtype=float)
        super().__init__(f"step size underflow at t={self.t:.10g}, x={np.array2string(self.x, precision=6)}")


class NoReturn(DynamicsError):
    pass


class DegenerateSection(DynamicsError):
    pass


class NewtonDivergence(DynamicsError):
    pass


def _kernel(name: str | None):
    return kernels.backend if name is None else kernels.get(name)


def _structure(field: PolynomialVectorField) -> StructureReport | None:
    if field.network is None:
        return None
    return structure_report(field.network)


def _conservation(field: PolynomialVectorField, conservation=None) -> np.ndarray:
    if conservation is not None:
        return np.array(conservation, dtype=float).reshape(-1, field.n)
    rep = _structure(field)
    if rep is None:
        return np.zeros((0, field.n))
    return np.array([[float(v) for v in c] for c in rep.conservation_basis]).reshape(-1, field.n)


# --- trajectories -----------------------------------------------------------


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    drift: np.ndarray
    nsteps: int
    nrej: int
    species: tuple[str, ...] = ()

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def max_drift(self) -> float:
        return float(self.drift.max()) if self.drift.size else 0.0


def integrate(
    field: PolynomialVectorField,
    x0: Sequence[float],
    T: float,
    tol: float = 1e-10,
    *,
    samples: int | None = None,
    conservation=None,
    drift_bound: float | None = None,
    max_steps: int = 2_000_000,
    kernel: str | None = None,
) -> Trajectory:
    """Integrate the mass-action ODE on ``[0, T]``.

    With ``samples`` the trajectory is reported on an even grid of that many
    points, otherwise at every accepted step. ``drift`` holds, for each
    conservation vector, the largest deviation of ``d . x`` from its
    initial value.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (field.n,) or np.any(x0 <= 0):
        raise ValueError("x0 must be a strictly positive vector of the field's dimension")
    if not T > 0 or not tol > 0:
        raise ValueError("T and tol must be positive")
    k = _kernel(kernel)
    t_out = np.linspace(0.0, T, samples) if samples else None
    status, t, y, ts, ys, _, _, out_y, nsteps, nrej = k.integrate(
        field.E, field.C, x0, float(T), rtol=tol, atol=tol * 1e-2, max_steps=max_steps,
        t_out=t_out, record=not samples,
    )
    if status == 2:
        raise StepUnderflow(t, y)
    if status == 3:
        raise DynamicsError(f"step budget exhausted at t={t:.6g}")
    if samples:
        times, states = t_out, out_y
    else:
        times, states = ts, ys
    cons = _conservation(field, conservation)
    drift = np.abs(states @ cons.T - cons @ x0).max(axis=0) if cons.size else np.zeros(0)
    if drift_bound is not None and drift.size and drift.max() > drift_bound:
        raise DynamicsError(f"conservation drift {drift.max():.3e} exceeds {drift_bound:.3e}")
    return Trajectory(np.asarray(times), np.asarray(states), drift, int(nsteps), int(nrej), tuple(field.species))


# --- sections ---------------------------------------------------------------


@dataclass(frozen=True)
class Section:
    """Affine hyperplane ``normal . (x - point) = 0`` crossed in ``direction``."""

    point: np.ndarray
    normal: np.ndarray
    direction: int = 1

    @property
    def offset(self) -> float:
        return float(self.normal @ self.point)

    def value(self, x) -> float:
        return float(self.normal @ (np.asarray(x, dtype=float) - self.point))


def poincare_map(
    field: PolynomialVectorField,
    section: Section,
    x0: Sequence[float],
    *,
    t_max: float = 1e3,
    tol: float = 1e-12,
    t_min: float = 0.0,
    variational: bool = False,
    kernel: str | None = None,
):
    """First return of ``x0`` to ``section``; returns ``(x_return, T)``.

    With ``variational`` the monodromy ``Phi(T)`` is returned as a third
    element. Raises :class:`NoReturn` when no crossing happens before
    ``t_max``.
    """
    x0 = np.asarray(x0, dtype=float)
    nf = float(section.normal @ field.evaluate(x0))
    if abs(nf) <= 1e-14 * (1.0 + np.linalg.norm(field.evaluate(x0))) * np.linalg.norm(section.normal):
        raise NoReturn("flow is tangent to the section at the start (equilibrium or tangency)")
    k = _kernel(kernel)
    n = field.n
    t_floor = max(t_min, 1e-9)
    status, t, y, *_rest = k.integrate(
        field.E, field.C, x0, float(t_max), rtol=tol, atol=tol * 1e-2, variational=variational,
        normal=section.normal, offset=section.offset, direction=section.direction,
        max_crossings=1, t_min=t_floor,
    )
    if status != 1:
        reason = {0: "time budget exhausted", 2: "step size underflow", 3: "step budget exhausted"}[status]
        raise NoReturn(f"no return to the section ({reason} at t={t:.6g})")
    if variational:
        return y[:n].copy(), float(t), y[n:].reshape(n, n).copy()
    return y[:n].copy(), float(t)


# --- class frames -----------------------------------------------------------


@dataclass(frozen=True)
class ClassFrame:
    """Coordinates on a two-dimensional stoichiometric class around its equilibrium."""

    x_eq: np.ndarray
    basis: np.ndarray  # n x 2, columns span S
    proj: np.ndarray  # 2 x n with proj @ basis = I
    w: np.ndarray
    nrm: np.ndarray
    direction: int
    omega: float  # imaginary part of the in-class eigenvalues (0 if real)
    trace: float
    level: float | None = None
    class_vector: tuple | None = None

    def point(self, s: float) -> np.ndarray:
        return self.x_eq + s * self.w

    def coord(self, x) -> float:
        return float(self.w @ (np.asarray(x, dtype=float) - self.x_eq) / (self.w @ self.w))

    @property
    def section(self) -> Section:
        return Section(self.x_eq, self.nrm, self.direction)

    @property
    def s_max(self) -> float:
        """Largest ``s`` keeping ``x_eq + s*w`` in the open orthant."""
        neg = self.w < 0
        if not np.any(neg):
            return math.inf
        return float(np.min(self.x_eq[neg] / -self.w[neg]))


def _class_equilibrium(field, report, d, c, x_ref):
    if x_ref is not None:
        x_ref = np.asarray(x_ref, dtype=float)
    if d is not None and c is not None:
        d = np.asarray([float(v) for v in d])
        try:
            curve = toric_equilibrium_curve(field, report)
            return equilibrium_at_class(curve, d, c)[1]
        except (CurveError, ValueError):
            pass
        guess = x_ref if x_ref is not None else np.full(field.n, c / d.sum())
        return find_equilibrium_in_class(field, report, guess * c / float(d @ guess))
    if x_ref is None:
        raise ValueError("need either (d, c) or a reference point")
    return find_equilibrium_in_class(field, report, x_ref)


def class_frame(
    field: PolynomialVectorField,
    d: Sequence | None = None,
    c: float | None = None,
    *,
    x_ref: Sequence[float] | None = None,
    x_eq: Sequence[float] | None = None,
    report: StructureReport | None = None,
    orientation: np.ndarray | None = None,
) -> ClassFrame:
    """Frame of the class ``d . x = c`` (or the class of ``x_ref``).

    ``w`` is the real part of the complex in-class eigenvector of the
    Jacobian, so the section is transversal near a focus; for real spectra
    a fixed basis direction of S is used. ``orientation`` flips ``w`` to
    have a positive inner product with it (keeps frames of a family
    consistent).
    """
    report = report or _structure(field)
    if report is None:
        raise DegenerateSection("field carries no network; pass a structure report")
    if report.rank != 2:
        raise DegenerateSection(f"shooting needs a two-dimensional class, rank is {report.rank}")
    if x_eq is None:
        x_eq = _class_equilibrium(field, report, d, c, x_ref)
    x_eq = np.asarray(x_eq, dtype=float)
    B = np.array(report.stoichiometric_basis, dtype=float).T
    B, _ = np.linalg.qr(B)
    proj = B.T
    J = field.jacobian_at(x_eq)
    Js = proj @ J @ B
    ev, vecs = np.linalg.eig(Js)
    tr = float(np.trace(Js))
    if abs(ev[0].imag) > 1e-12 * max(1.0, abs(ev[0].real)):
        v = vecs[:, 0]
        # rotate the eigenvector so its real part is as long as possible
        phase = 0.5 * np.angle(v @ v)
        v = v * np.exp(-1j * phase)
        ws = v.real
        omega = float(abs(ev[0].imag))
    else:
        ws = np.array([1.0, 0.0])
        omega = 0.0
    ws = ws / np.linalg.norm(ws)
    w = B @ ws
    if orientation is not None and float(w @ orientation) < 0:
        w = -w
    nrm = B @ np.array([-ws[1], ws[0]])
    if orientation is None:
        # use the half-line with more room inside the orthant
        def room(v):
            neg = v < 0
            return np.min(x_eq[neg] / -v[neg]) if np.any(neg) else math.inf

        if room(-w) > room(w):
            w = -w
    nrm = nrm - (nrm @ w) * w / (w @ w)
    nrm = nrm / np.linalg.norm(nrm)
    s_probe = 1e-6 * max(1.0, float(np.abs(x_eq).max()))
    fdir = float(nrm @ (J @ w)) if omega > 0 else float(nrm @ field.evaluate(x_eq + s_probe * w))
    direction = 1 if fdir >= 0 else -1
    level = None
    if d is not None:
        level = float(np.asarray([float(v) for v in d]) @ x_eq)
    return ClassFrame(
        x_eq=x_eq, basis=B, proj=proj, w=w, nrm=nrm, direction=direction, omega=omega, trace=tr,
        level=level, class_vector=tuple(d) if d is not None else None,
    )


# --- limit cycles -----------------------------------------------------------


@dataclass
class LimitCycle:
    level: float | None
    anchor: np.ndarray
    s: float
    period: float
    mu: float
    multipliers: np.ndarray
    closure: float
    frame: ClassFrame
    times: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    orbit: np.ndarray = dc_field(default_factory=lambda: np.zeros((0, 0)))
    species: tuple[str, ...] = ()

    @property
    def stable(self) -> bool:
        return abs(self.mu) < 1.0

    @property
    def stability(self) -> str:
        if abs(self.mu) < 1.0:
            return "stable"
        if abs(self.mu) > 1.0:
            return "unstable"
        return "neutral"

    @property
    def amplitude(self) -> float:
        """Euclidean distance from the equilibrium to the anchor."""
        return float(abs(self.s) * np.linalg.norm(self.frame.w))

    def to_json(self) -> dict:
        mults = [complex(m) for m in self.multipliers]
        return {
            "classLevel": self.level,
            "period": self.period,
            "anchor": [float(v) for v in self.anchor],
            "sectionCoordinate": self.s,
            "equilibrium": [float(v) for v in self.frame.x_eq],
            "multiplier": self.mu,
            "multipliers": [m.real if abs(m.imag) < 1e-12 else [m.real, m.imag] for m in mults],
            "stability": self.stability,
            "closure": self.closure,
        }


def _shoot(field, frame, s, T, kernel, tol, variational=True):
    k = _kernel(kernel)
    x0 = frame.point(s)
    status, t, y, *_ = k.integrate(field.E, field.C, x0, float(T), rtol=tol, atol=tol * 1e-2, variational=variational)
    if status != 0:
        raise NewtonDivergence(f"shooting integration failed (status {status}) at s={s:.6g}, T={T:.6g}")
    n = field.n
    return x0, y[:n], (y[n:].reshape(n, n) if variational else None)


def displacement(
    field: PolynomialVectorField,
    frame: ClassFrame,
    s: float,
    *,
    tol: float = 1e-12,
    t_max: float | None = None,
    derivative: bool = False,
    kernel: str | None = None,
):
    """Return-map displacement ``P(s) - s`` along the section ray.

    Returns ``(D, T)`` or with ``derivative`` ``(D, T, P'(s))``.
    """
    x0 = frame.point(s)
    if np.any(x0 <= 0):
        raise NoReturn(f"section point s={s:.6g} leaves the positive orthant")
    if t_max is None:
        t_max = 200.0 * (2 * math.pi / frame.omega if frame.omega > 0 else 10.0)
    t_min = 1e-3 * (2 * math.pi / frame.omega) if frame.omega > 0 else 1e-9
    res = poincare_map(field, frame.section, x0, t_max=t_max, tol=tol, t_min=t_min, variational=derivative, kernel=kernel)
    xr, T = res[0], res[1]
    sr = frame.coord(xr)
    if not derivative:
        return sr - s, T
    phi = res[2]
    f = field.evaluate(xr)
    dx = phi @ frame.w
    # tangent of the return point along the section
    dxs = dx - f * (frame.nrm @ dx) / (frame.nrm @ f)
    dP = float(frame.w @ dxs / (frame.w @ frame.w))
    return sr - s, T, dP


def _monodromy_mu(frame: ClassFrame, phi: np.ndarray) -> float:
    # in-class monodromy has eigenvalues 1 and mu; its determinant is
    # insensitive to the residual closure error, unlike its trace
    phis = frame.proj @ phi @ frame.basis
    return float(np.linalg.det(phis))


def converge_cycle(
    field: PolynomialVectorField,
    frame: ClassFrame,
    s0: float,
    T0: float,
    *,
    tol: float = 1e-8,
    int_tol: float = 1e-12,
    max_iter: int = 40,
    samples: int = 257,
    kernel: str | None = None,
) -> LimitCycle:
    """Newton on the shooting system ``proj (x(T; x_eq + s w) - x_eq - s w) = 0``."""
    s, T = float(s0), float(T0)
    scale = max(1.0, float(np.abs(frame.x_eq).max()))
    for it in range(max_iter):
        x0, xT, phi = _shoot(field, frame, s, T, kernel, int_tol)
        r = frame.proj @ (xT - x0)
        closure = float(np.linalg.norm(xT - x0))
        if closure <= tol * scale and it > 0:
            break
        jac = np.column_stack([frame.proj @ (phi @ frame.w - frame.w), frame.proj @ field.evaluate(xT)])
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular shooting Jacobian at s={s:.6g}") from exc
        lam = 1.0
        # keep the anchor in the orthant and the period positive
        while lam > 1e-6:
            s_new, T_new = s + lam * step[0], T + lam * step[1]
            if 0 < s_new < frame.s_max and T_new > 0 and abs(lam * step[1]) < 0.5 * T:
                break
            lam *= 0.5
        else:
            raise NewtonDivergence(f"Newton step leaves the admissible region at s={s:.6g}, T={T:.6g}")
        s, T = s_new, T_new
        if not (np.isfinite(s) and np.isfinite(T)):
            raise NewtonDivergence("non-finite Newton iterate")
    else:
        raise NewtonDivergence(f"no convergence after {max_iter} iterations (closure {closure:.3e})")
    if s <= 1e-7 * scale:
        raise NewtonDivergence(f"shooting collapsed onto the equilibrium (s={s:.3e})")
    s, T, mu, closure = _polish(field, frame, s, T, int_tol, kernel)
    x0, _, phi = _shoot(field, frame, s, T, kernel, int_tol)
    mults = np.linalg.eigvals(phi)
    times, orbit = _dense_orbit(field, x0, T, samples, int_tol, kernel)
    return LimitCycle(
        level=frame.level, anchor=x0, s=s, period=T, mu=mu, multipliers=mults, closure=closure,
        frame=frame, times=times, orbit=orbit, species=tuple(field.species),
    )


def _polish(field, frame, s, T, int_tol, kernel, iters=6):
    """Refine on the return map: near a center, orbits close to within the
    shooting tolerance for a whole range of periods, while the localized
    return time and ``P'(s)`` stay sharp."""
    try:
        D, T_ret, dP = displacement(field, frame, s, tol=int_tol, derivative=True, kernel=kernel)
    except NoReturn:
        x0, xT, phi = _shoot(field, frame, s, T, kernel, int_tol)
        return s, T, _monodromy_mu(frame, phi), float(np.linalg.norm(xT - x0))
    for _ in range(iters):
        if abs(D) <= 1e-15 * abs(s) or abs(dP - 1.0) < 1e-300:
            break
        s_new = s - D / (dP - 1.0)
        if not 0.5 * s < s_new < min(2.0 * s, frame.s_max):
            break
        try:
            D_new, T_new, dP_new = displacement(field, frame, s_new, tol=int_tol, derivative=True, kernel=kernel)
        except NoReturn:
            break
        if abs(D_new) >= abs(D):
            break
        s, D, T_ret, dP = s_new, D_new, T_new, dP_new
    if abs(T_ret - T) > 0.05 * T:
        raise NewtonDivergence(f"return time {T_ret:.6g} disagrees with the shooting period {T:.6g}")
    return s, T_ret, dP, float(abs(D) * np.linalg.norm(frame.w))


def _dense_orbit(field, x0, T, samples, tol, kernel):
    k = _kernel(kernel)
    t_out = np.linspace(0.0, T, max(samples, 257))
    status, _, _, _, _, _, _, out_y, _, _ = k.integrate(field.E, field.C, x0, float(T), rtol=tol, atol=tol * 1e-2, t_out=t_out)
    if status != 0:
        raise DynamicsError(f"dense output integration failed (status {status})")
    return t_out, out_y[:, : field.n]


def _bracket_root(field, frame, lo, dlo, hi, dhi, tol, kernel, iters=60):
    """Illinois iteration on the displacement function over ``[lo, hi]``."""
    side = 0
    s, T = 0.5 * (lo + hi), None
    for _ in range(iters):
        s = hi - dhi * (hi - lo) / (dhi - dlo)
        if not (lo < s < hi):
            s = 0.5 * (lo + hi)
        D, T = displacement(field, frame, s, tol=tol, kernel=kernel)
        if D == 0 or hi - lo <= 1e-12 * max(1.0, hi):
            break
        if (D < 0) == (dlo < 0):
            lo, dlo = s, D
            if side == -1:
                dhi *= 0.5
            side = -1
        else:
            hi, dhi = s, D
            if side == 1:
                dlo *= 0.5
            side = 1
        if abs(D) <= 1e-13 * max(1.0, abs(s)):
            break
    return s, T


def scan_cycles(
    field: PolynomialVectorField,
    frame: ClassFrame,
    s_values: Sequence[float],
    *,
    tol: float = 1e-8,
    int_tol: float = 1e-12,
    kernel: str | None = None,
) -> list[LimitCycle]:
    """All cycles whose section coordinates are bracketed by sign changes of
    the displacement on the grid ``s_values`` (sorted ascending)."""
    s_values = [float(s) for s in s_values if 0 < s < frame.s_max]
    vals = []
    for s in s_values:
        try:
            D, T = displacement(field, frame, s, tol=int_tol, kernel=kernel)
        except NoReturn:
            D, T = None, None
        vals.append((s, D, T))
    cycles = []
    for (s1, d1, _), (s2, d2, _) in zip(vals, vals[1:]):
        if d1 is None or d2 is None or (d1 < 0) == (d2 < 0):
            continue
        s, T = _bracket_root(field, frame, s1, d1, s2, d2, int_tol, kernel)
        cycles.append(converge_cycle(field, frame, s, T, tol=tol, int_tol=int_tol, kernel=kernel))
    return cycles


def find_limit_cycle(
    field: PolynomialVectorField,
    d: Sequence | None = None,
    c: float | None = None,
    seed=None,
    *,
    frame: ClassFrame | None = None,
    tol: float = 1e-8,
    int_tol: float = 1e-12,
    relax: int = 200,
    kernel: str | None = None,
) -> LimitCycle:
    """Locate a limit cycle in the class ``d . x = c``.

    ``seed`` may be a point near the cycle, a section coordinate ``s``, or a
    :class:`~crnhopf.focal.HopfPoint` (small-amplitude predictor from the
    first focal value). From a point seed the return map is iterated up to
    ``relax`` times before Newton; a bracketing scan of the displacement is
    the final fallback.
    """
    from .focal import HopfPoint

    if frame is None:
        x_ref = seed if (seed is not None and not isinstance(seed, (HopfPoint, int, float))) else None
        frame = class_frame(field, d, c, x_ref=x_ref)
    if frame.omega <= 0 and frame.trace == 0:
        raise DegenerateSection("no rotation at the equilibrium; pass a point seed")
    if isinstance(seed, HopfPoint):
        s0 = _hopf_predictor(frame, seed)
        return _from_coordinate(field, frame, s0, tol, int_tol, kernel)
    if seed is None:
        raise ValueError("a seed is required")
    if isinstance(seed, (int, float)):
        x = frame.point(min(float(seed), 0.999 * frame.s_max))
    else:
        x = np.asarray(seed, dtype=float)
    # move the seed onto the section ray
    if abs(frame.section.value(x)) > 1e-12 * max(1.0, float(np.abs(x).max())) or frame.coord(x) <= 0:
        xr, _ = poincare_map(field, frame.section, x, t_max=1e4, tol=int_tol, kernel=kernel)
        s = frame.coord(xr)
    else:
        s = frame.coord(x)
    # iterate the return map while it contracts; stop once it starts to
    # move away again (the seed is then near an unstable cycle)
    prev = None
    shrinking = False
    for _ in range(relax):
        try:
            D, T = displacement(field, frame, s, tol=int_tol, kernel=kernel)
        except NoReturn:
            break
        if abs(D) <= 1e-6 * max(abs(s), 1e-12):
            break
        if prev is not None:
            if abs(D) < abs(prev):
                shrinking = True
            elif shrinking:
                break
        if not 0 < s + D < frame.s_max:
            break
        prev = D
        s = s + D
    return _from_coordinate(field, frame, s, tol, int_tol, kernel)


def _hopf_predictor(frame: ClassFrame, hopf) -> float:
    """Amplitude estimate ``sqrt(-4 sigma / L1)`` scaled to the frame."""
    l1 = float(hopf.first_focal) if hopf.first_focal is not None else 0.0
    sigma = 0.5 * frame.trace
    if l1 != 0 and sigma * l1 < 0:
        # L1 is normalized for a unit-modulus rotation; rescale by omega
        return float(math.sqrt(-4.0 * sigma / l1 * max(frame.omega, 1e-300)) / np.linalg.norm(frame.w))
    return 1e-3 * float(np.abs(frame.x_eq).max())


def _from_coordinate(field, frame, s, tol, int_tol, kernel):
    s = min(max(s, 1e-12), 0.999 * frame.s_max)
    try:
        D, T = displacement(field, frame, s, tol=int_tol, kernel=kernel)
        return converge_cycle(field, frame, s, T, tol=tol, int_tol=int_tol, kernel=kernel)
    except (NewtonDivergence, NoReturn) as first:
        # bracket around the estimate
        grid = s * np.geomspace(0.1, 10.0, 41)
        grid = grid[grid < frame.s_max]
        cycles = scan_cycles(field, frame, grid, tol=tol, int_tol=int_tol, kernel=kernel)
        if not cycles:
            raise NewtonDivergence(f"no cycle near s={s:.6g}: {first}") from first
        return min(cycles, key=lambda cy: abs(math.log(cy.s / s)))


def floquet_multipliers(
    field: PolynomialVectorField, cycle: LimitCycle, *, tol: float = 1e-12, kernel: str | None = None
) -> np.ndarray:
    """All ``n`` eigenvalues of the monodromy matrix, sorted so that the
    ones closest to 1 (flow direction and conservation laws) come first."""
    _, _, phi = _shoot(field, cycle.frame, cycle.s, cycle.period, kernel, tol)
    ev = np.linalg.eigvals(phi)
    return ev[np.argsort(np.abs(ev - 1.0))]


# --- export -----------------------------------------------------------------


def _write_csv(path: Path, times, states):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["tau"] + [f"x{i + 1}" for i in range(states.shape[1])])
        for t, x in zip(times, states):
            wr.writerow([f"{t:.15g}"] + [f"{v:.15g}" for v in x])


def export_trajectory(traj: Trajectory, path) -> Path:
    path = Path(path)
    _write_csv(path, traj.times, traj.states)
    meta = {"species": list(traj.species), "drift": [float(v) for v in traj.drift], "steps": traj.nsteps}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def export_cycle(cycle: LimitCycle, path) -> Path:
    """Orbit CSV (tau, x1..xn) plus a JSON sidecar with period, multipliers,
    class level and stability."""
    if cycle.orbit.size == 0:
        raise ValueError("cycle has no dense orbit to export")
    path = Path(path)
    _write_csv(path, cycle.times, cycle.orbit)
    meta = cycle.to_json()
    meta["species"] = list(cycle.species)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path
