"""End-to-end acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`; :func:`run` evaluates a
selection and collects the conservation drift of every trajectory the checks
integrate (criterion 11 reports the worst one). Used by the test suite and by
``crnhopf verify``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Callable

import numpy as np

from . import bimolecular as bm
from . import continuation as cont
from . import dynamics as dyn
from . import focal
from . import library as L
from .equilibria import toric_equilibrium_curve, trace_on_curve, trace_roots
from .network import structure_report
from .polyfield import build_vector_field

__all__ = ["CriterionResult", "Context", "CRITERIA", "run"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number:2d} ({self.title}): {self.detail} [{self.seconds:.1f}s]"


@dataclass
class Context:
    seed: int = 0
    drifts: list = field(default_factory=list)

    def record(self, label: str, drift: float) -> None:
        self.drifts.append((label, float(drift)))


def _orbit_drift(cycle: dyn.LimitCycle, d) -> float:
    d = np.asarray([float(v) for v in d])
    vals = cycle.orbit @ d
    return float(np.abs(vals - vals[0]).max())


# --- 1 ----------------------------------------------------------------------

# (m, l, rank, deficiency, strongly connected, mass-conserving), from the definitions
_STRUCTURE = {
    "net5 g=1": (L.net5(1, 8, Q(1, 8)), (4, 1, 2, 1, True, True)),
    "net5 g=2": (L.net5(2), (4, 1, 2, 1, True, True)),
    "net5 g=3": (L.net5(3), (4, 1, 2, 1, True, True)),
    "net6 g=1": (L.net6(1), (4, 1, 2, 1, True, True)),
    "net6 g=2": (L.net6(2), (4, 1, 2, 1, True, True)),
    "net6 g=3": (L.net6(3), (4, 1, 2, 1, True, True)),
    "net8": (L.net8(), (4, 1, 2, 1, True, True)),
    "lotka": (L.lotka(), (6, 3, 2, 1, False, False)),
    "ivanova": (L.ivanova(), (6, 3, 2, 1, False, True)),
    "fks": (L.frank_kamenetsky_salnikov(), (7, 3, 2, 2, False, False)),
}


def criterion_1(ctx: Context) -> CriterionResult:
    bad = []
    for name, (net, want) in _STRUCTURE.items():
        r = structure_report(net)
        got = (r.m, r.l, r.rank, r.deficiency, r.strongly_connected, r.mass_conserving)
        if got != want:
            bad.append(f"{name}: got {got}, want {want}")
    ok = not bad
    return CriterionResult(1, "structure", ok, f"{len(_STRUCTURE)} networks match" if ok else "; ".join(bad))


# --- 2 ----------------------------------------------------------------------


def net6_trace_oracle(gamma: int, a, b) -> dict:
    """Closed form of the trace along ``(2 t^g, t^g / 2, t^2)``."""
    s = 4 * Q(a) + Q(b)
    out = {Q(2 * gamma): 4 * (Q(3, 16) - s)}
    p2 = Q(3 * gamma - 2)
    out[p2] = out.get(p2, 0) - Q(gamma * gamma, 2) * s
    return {p: c for p, c in out.items() if c != 0}


def criterion_2(ctx: Context) -> CriterionResult:
    bad = []
    a, b = Q(1, 200), Q(22, 200)
    for g in (1, 2, 3):
        f = build_vector_field(L.net6(g, a, b))
        cur = toric_equilibrium_curve(f).reparametrized((Q(2), Q(1, 2), Q(1)), (g, g, 2))
        got = {p: c for c, p in trace_on_curve(f, cur).terms}
        want = net6_trace_oracle(g, a, b)
        if got != want:
            bad.append(f"net6 g={g}: {got} != {want}")
    f = build_vector_field(L.net5(2, 16, Q(1, 16), 1, 1))
    cur = toric_equilibrium_curve(f).reparametrized((Q(16), Q(1), Q(1)), (2, 2, 2))
    terms = trace_on_curve(f, cur).terms
    if terms != ((Q(5), Q(4)),):
        bad.append(f"net5 g=2: trace {terms}, want 5 t^4")
    ok = not bad
    return CriterionResult(2, "trace formulas", ok, "net6 g=1,2,3 and a(kappa)=5 exact" if ok else "; ".join(bad))


# --- 3 ----------------------------------------------------------------------


def criterion_3(ctx: Context) -> CriterionResult:
    f = build_vector_field(L.net5(1, 8, Q(1, 8), 1, 1))
    # closed-form parametrization (8 t, t, t^2) of the equilibria
    cur = toric_equilibrium_curve(f).reparametrized((Q(8), Q(1), Q(1)), (1, 1, 2))
    roots = trace_roots(trace_on_curve(f, cur))
    a = Q(1, 256)
    f8 = build_vector_field(L.net8(a, Q(1, 16) - 4 * a))
    roots8 = trace_roots(trace_on_curve(f8, toric_equilibrium_curve(f8)), with_multiplicity=True)
    ok1 = len(roots) == 1 and abs(roots[0] - 1) <= 1e-10
    ok2 = len(roots8) == 1 and roots8[0][1] == 2 and abs(roots8[0][0] - 0.5) <= 1e-8
    detail = f"net5 g=1 roots {roots}; net8 roots {roots8}"
    return CriterionResult(3, "trace roots", ok1 and ok2, detail)


# --- 4 ----------------------------------------------------------------------


def net6_line_l1(b) -> object:
    """First focal value of net6 (g=2) on ``4a + b = 1/8`` at the curve point t=1."""
    import mpmath

    with mpmath.workdps(focal.MP_DPS):
        b = mpmath.mpf(b)
        a = (mpmath.mpf(1) / 8 - b) / 4
        fld = _net6_mp_field(a, b)
        point = (mpmath.mpf(2), mpmath.mpf(1) / 2, mpmath.mpf(1))
        jet = focal.planar_reduction(fld, point, kind="mp", trace_tol=math.inf)
        return focal.focal_values(jet, depth=1)[0]


def _net6_mp_field(a, b):
    """net6 (g=2) field with mpmath rates; exponents from the exact network."""
    from .polyfield import PolynomialVectorField

    net = L.net6(2, Q(1), Q(1))
    comps = [dict() for _ in range(3)]
    mult = [1, a, 4 * a, 1, 4 * b, b]
    for r, m in zip(net.reactions, mult):
        for k, dk in enumerate(r.vector):
            if dk:
                comps[k][r.reactant] = comps[k].get(r.reactant, 0) + m * dk
    return PolynomialVectorField(comps, net.species, net)


def criterion_4(ctx: Context) -> CriterionResult:
    import mpmath

    b_star = (1 + math.sqrt(141)) / 160
    below = [0.01, 0.04, 0.07, 0.079]
    above = [0.081, 0.09, 0.11, 0.124]
    sg_below = [mpmath.sign(net6_line_l1(b)) for b in below]
    sg_above = [mpmath.sign(net6_line_l1(b)) for b in above]
    lo, hi = 0.07, 0.09
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if net6_line_l1(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    root = 0.5 * (lo + hi)
    ok = all(s < 0 for s in sg_below) and all(s > 0 for s in sg_above) and abs(root - b_star) <= 1e-9
    return CriterionResult(
        4, "focal values exact", ok, f"L1 zero at b={root:.12f} (closed form {b_star:.12f}); signs -/+",
        data={"root": root},
    )


# --- 5 ----------------------------------------------------------------------


def criterion_5(ctx: Context) -> CriterionResult:
    l1s = []
    for m in (Q(1, 4), Q(1, 2), Q(1), Q(2), Q(3)):
        k1, k2 = m * m * (7 + 4 * m), m * m / (7 + 4 * m)
        f = build_vector_field(L.net5(2, k1, k2, 1, 1))
        x = (7 + 4 * m, Q(1), 1 / m)
        if any(v != 0 for v in f.evaluate(x)):
            return CriterionResult(5, "focal value signs", False, f"{x} is not an equilibrium")
        jet = focal.planar_reduction(f, x, kind="exact")
        if jet.trace != 0:
            return CriterionResult(5, "focal value signs", False, f"trace {jet.trace} at m={m}")
        l1s.append(focal.focal_values(jet, depth=1)[0])
    ok_a = all(v < 0 for v in l1s)
    target = (0.001291, 0.003044, 0.958228)
    cur = toric_equilibrium_curve(build_vector_field(L.net8()))
    ft = focal.solve_focus_conditions(L.net8, target, curve=cur)
    tr, (l1, l2, l3) = float(ft.trace), (float(v) for v in ft.focal)
    dist = float(np.linalg.norm(np.array(ft.floats()) - np.array(target)))
    ok_b = abs(tr) <= 1e-8 and abs(l1) <= 1e-6 and abs(l2) <= 1e-6 and l3 < 0 and dist <= 5e-3
    detail = (
        f"L1 on a(kappa)=0: {[float(v) for v in l1s]}; degenerate point {tuple(round(v, 10) for v in ft.floats())} "
        f"trace {tr:.1e} L1 {l1:.1e} L2 {l2:.1e} L3 {l3:.3e} distance {dist:.1e}"
    )
    return CriterionResult(5, "focal value signs", ok_a and ok_b, detail)


# --- 6 ----------------------------------------------------------------------


def criterion_6(ctx: Context) -> CriterionResult:
    f = build_vector_field(L.net5(2))
    c3 = dyn.find_limit_cycle(f, (1, 1, 1), 3.0, seed=0.3)
    c6 = dyn.find_limit_cycle(f, (1, 1, 1), 6.0, seed=0.6)
    ctx.record("net5 cycle c=3", _orbit_drift(c3, (1, 1, 1)))
    ctx.record("net5 cycle c=6", _orbit_drift(c6, (1, 1, 1)))
    anchor_err = float(np.linalg.norm(c6.anchor - 2 * c3.anchor) / np.linalg.norm(2 * c3.anchor))
    period_err = abs(4 * c6.period - c3.period) / c3.period
    ok = abs(c3.mu) < 1 - 1e-3 and anchor_err <= 1e-4 and period_err <= 1e-4
    detail = f"mu={c3.mu:.5f} T={c3.period:.4f}; scaling errors anchor {anchor_err:.1e}, period {period_err:.1e}"
    return CriterionResult(6, "cycles", ok, detail)


# --- 7 ----------------------------------------------------------------------


def criterion_7(ctx: Context) -> CriterionResult:
    f = build_vector_field(L.net6(2, Q(1, 200), Q(22, 200)))
    fr = dyn.class_frame(f, (1, 1, 1), 3.5)
    cys = dyn.scan_cycles(f, fr, np.geomspace(1e-2, 0.99 * fr.s_max, 30))
    for i, c in enumerate(cys):
        ctx.record(f"net6 cycle {i}", _orbit_drift(c, (1, 1, 1)))
    if len(cys) < 2:
        return CriterionResult(7, "two coexisting cycles", False, f"found {len(cys)} cycles")
    inner, outer = cys[0], cys[-1]
    ok_pair = abs(inner.mu) > 1 and abs(outer.mu) < 1
    fam = cont.ParameterFamily(
        lambda b: L.net6(2, Q(1, 200), Q(b).limit_denominator(10**12)), (1, 1, 1), 3.5, name="b"
    )
    br = cont.continue_cycles(fam, outer, 22 / 200, (21 / 200, 25 / 200), direction=1)
    folds = [fl.param for fl in br.folds if 22 / 200 <= fl.param <= 25 / 200]
    ok = ok_pair and bool(folds)
    detail = (
        f"inner s={inner.s:.4f} mu={inner.mu:.3f}, outer s={outer.s:.4f} mu={outer.mu:.4f}; "
        f"fold at b={[round(200 * p, 4) for p in folds]}/200"
    )
    return CriterionResult(7, "two coexisting cycles", ok, detail)


# --- 8 ----------------------------------------------------------------------


def criterion_8(ctx: Context) -> CriterionResult:
    a = Q(1, 256)
    b = Q(1, 16) + Q(1, 1000) - 4 * a
    f = build_vector_field(L.net8(a, b))
    cur = toric_equilibrium_curve(f)
    tr = trace_on_curve(f, cur)
    ts = np.geomspace(1e-3, 1e3, 400)
    traces = [float(tr(float(t))) for t in ts]
    neg = all(v < 0 for v in traces)
    d = (1, 2, 4)
    x = cur.point_float(0.5)
    c = float(np.dot(d, x))
    fr = dyn.class_frame(f, d, c)
    cys = dyn.scan_cycles(f, fr, np.geomspace(1e-4, 0.99 * fr.s_max, 60))
    if not cys:
        return CriterionResult(8, "torus of cycles", False, "no cycle in the starting class")
    for i, cy in enumerate(cys):
        ctx.record(f"net8 cycle {i}", _orbit_drift(cy, d))
    fam = cont.ClassLevelFamily(f, d)
    br = cont.continue_cycles(fam, cys[-1], c, (0.05 * c, 20 * c), direction=1, max_points=600)
    ok = neg and br.termination == "closed" and len(br.folds) == 2
    detail = (
        f"max trace on samples {max(traces):.2e}; {len(cys)} cycles at c={c:.4f}; branch {br.termination} "
        f"with folds at c={[round(fl.param, 4) for fl in br.folds]}"
    )
    return CriterionResult(8, "torus of cycles", ok, detail)


# --- 9 ----------------------------------------------------------------------


def criterion_9(ctx: Context) -> CriterionResult:
    cur = toric_equilibrium_curve(build_vector_field(L.net8()))
    rep = cont.three_cycle_search(L.net8, (0.001291, 0.003044, 0.958228), (1, 2, 4), curve=cur)
    for i, cy in enumerate(rep.cycles):
        ctx.record(f"three-cycle {i}", _orbit_drift(cy, (1, 2, 4)))
    if rep.success:
        st = [c.stability for c in rep.cycles]
        ok = rep.ledger_ok and st == ["stable", "unstable", "stable"]
        detail = f"three cycles s={[round(float(c.s), 5) for c in rep.cycles]} {st}; ledger verified"
    else:
        amps = [a.get("outerRelativeAmplitude") for a in rep.attempts]
        ok = rep.ledger_ok and bool(rep.attempts)
        detail = f"documented failure after amplitudes {amps}: {rep.message}"
    return CriterionResult(9, "three cycles", ok, detail, data={"report": rep.to_json()})


# --- 10 ---------------------------------------------------------------------


def _integral_drift(net, x0, periods: int, ctx: Context, label: str) -> tuple[float, str]:
    verdict = bm.classify_rank2_bimolecular(net)
    hs = bm.center_first_integral(verdict)
    f = build_vector_field(net)
    fr = dyn.class_frame(f, x_ref=x0)
    _, T = dyn.poincare_map(f, fr.section, fr.point(0.5 * min(fr.s_max, float(np.abs(fr.x_eq).max()))), tol=1e-13)
    x_start = fr.point(0.5 * min(fr.s_max, float(np.abs(fr.x_eq).max())))
    traj = dyn.integrate(f, x_start, periods * T, 1e-13, samples=20 * periods + 1)
    ctx.record(label, traj.max_drift)
    worst = 0.0
    for h in hs:
        vals = h(traj.states)
        worst = max(worst, float(np.abs(vals - vals[0]).max() / max(abs(vals[0]), 1e-300)))
    return worst, verdict.kind


def criterion_10(ctx: Context) -> CriterionResult:
    parts = []
    ok = True
    dl, kl = _integral_drift(L.lotka(1, 2, 3), [1.0, 1.0], 50, ctx, "lotka")
    di, ki = _integral_drift(L.ivanova(1, 2, 3), [1.0, 1.0, 1.0], 50, ctx, "ivanova")
    ok &= kl == "LotkaCenter" and ki == "IvanovaCenter" and dl <= 1e-6 and di <= 1e-6
    parts.append(f"(a) {kl} drift {dl:.1e}, {ki} drift {di:.1e}")
    v = bm.classify_rank2_bimolecular(L.lotka_with_constant_species(1, 2, 1, 1))
    conds = [c.solved() for c in v.conditions]
    ok_b = (
        v.kind == "ReducedThenClassified" and v.center_kind == "LotkaCenter" and conds == ["Z < 2"]
        and v.at_levels({"Z": 1}).kind == "LotkaCenter" and v.at_levels({"Z": 2}).kind == "NoPeriodicOrbit"
    )
    ok &= ok_b
    parts.append(f"(b) {v.kind} -> {v.center_kind} iff {conds}")
    rng = np.random.default_rng(ctx.seed)
    n_nop = n_bad = 0
    for _ in range(200):
        net = bm.random_bimolecular_network(rng)
        ver = bm.classify_rank2_bimolecular(net)
        if ver.kind == "NoPeriodicOrbit":
            n_nop += 1
            chk = bm.simulation_check(net, rng)
            n_bad += not chk.consistent
    ok &= n_bad == 0 and n_nop > 0
    parts.append(f"(c) {n_nop} NoPeriodicOrbit verdicts, {n_bad} inconsistent")
    fks = L.frank_kamenetsky_salnikov()
    vf = bm.classify_rank2_bimolecular(fks)
    f = build_vector_field(fks)
    cy = dyn.find_limit_cycle(f, seed=[1.0, 1.0])
    ok &= vf.kind == "NotApplicable" and abs(cy.mu) < 1
    parts.append(f"(d) FKS {vf.kind}, cycle mu={cy.mu:.4f}")
    return CriterionResult(10, "bimolecular theorem", bool(ok), "; ".join(parts))


# --- 11 ---------------------------------------------------------------------


def jacobian_taylor_order(field, x, v, hs=(2.0**-6, 2.0**-8, 2.0**-10)) -> float:
    """Slope of ``log |f(x + h v) - f(x) - h J v|`` against ``log h``."""
    fx = field.evaluate(x)
    jv = field.jacobian_at(x) @ v
    errs = []
    for h in hs:
        errs.append(float(np.linalg.norm(field.evaluate(x + h * v) - fx - h * jv)))
    if max(errs) <= 1e-14 * max(1.0, float(np.linalg.norm(fx))):
        return math.inf  # linear field: the remainder vanishes
    slope = np.polyfit(np.log(hs), np.log(np.maximum(errs, 1e-300)), 1)[0]
    return float(slope)


def criterion_11(ctx: Context) -> CriterionResult:
    rng = np.random.default_rng(ctx.seed + 11)
    orders = []
    for _ in range(100):
        n = int(rng.integers(2, 5))
        net = bm.random_bimolecular_network(rng, n) if rng.random() < 0.5 else _random_network(rng, n)
        f = build_vector_field(net)
        x = np.exp(rng.normal(0, 0.5, size=f.n))
        v = rng.normal(size=f.n)
        v /= np.linalg.norm(v)
        orders.append(jacobian_taylor_order(f, x, v))
    worst_order = min(orders)
    if not ctx.drifts:
        # standalone run: integrate the acceptance networks here
        for name, net, x0, T in (
            ("net5", L.net5(2), [2.5, 0.3, 0.2], 200.0),
            ("net6", L.net6(2), [2.0, 1.0, 0.5], 200.0),
            ("net8", L.net8(), [0.5, 0.1, 0.05], 200.0),
            ("ivanova", L.ivanova(1, 2, 3), [1.0, 2.0, 0.5], 100.0),
        ):
            ctx.record(name, dyn.integrate(build_vector_field(net), x0, T, 1e-12).max_drift)
    worst_drift = max(d for _, d in ctx.drifts)
    label = max(ctx.drifts, key=lambda p: p[1])[0]
    ok = worst_order >= 1.9 and worst_drift <= 1e-9
    detail = f"min Taylor order {worst_order:.3f}; max drift {worst_drift:.1e} ({label}, {len(ctx.drifts)} trajectories)"
    return CriterionResult(11, "numerics hygiene", ok, detail)


def _random_network(rng: np.random.Generator, n: int):
    """Random mass-action network with complexes of molecularity up to three."""
    from .dsl import NetworkSource

    names = "XYZW"[:n]
    edges = {}
    for _ in range(int(rng.integers(3, 7))):
        a = tuple(int(v) for v in rng.integers(0, 3, size=n))
        b = tuple(int(v) for v in rng.integers(0, 3, size=n))
        if a != b and sum(a) <= 3 and sum(b) <= 3:
            edges[(a, b)] = Q(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
    if not edges:
        edges[(tuple([1] + [0] * (n - 1)), tuple([0] * n))] = Q(1)
    return NetworkSource.from_reactions(names, [(a, b, k) for (a, b), k in edges.items()])


CRITERIA: dict[int, Callable[[Context], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}

TITLES = {
    1: "structure", 2: "trace formulas", 3: "trace roots", 4: "focal values exact", 5: "focal value signs",
    6: "cycles", 7: "two coexisting cycles", 8: "torus of cycles", 9: "three cycles",
    10: "bimolecular theorem", 11: "numerics hygiene",
}


def run(numbers=None, *, seed: int = 0, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    """Evaluate the selected criteria (all by default) in order.

    A check that raises is reported as a failure carrying the exception.
    """
    ctx = Context(seed)
    out = []
    for k in sorted(numbers or CRITERIA):
        t0 = time.perf_counter()
        try:
            res = CRITERIA[k](ctx)
        except Exception as exc:  # reported, never swallowed silently
            res = CriterionResult(k, TITLES[k], False, f"raised {type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - t0
        out.append(res)
        if echo is not None:
            echo(res.line())
    return out
