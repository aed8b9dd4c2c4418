"""Periodic orbits in bimolecular rank-two networks.

A bimolecular rank-two network either has no periodic orbit at all, or (after
freezing species that are constant on every class) it is a Lotka-type or an
Ivanova-type system whose positive equilibria are global centers. This module
decides which, with exact rational arithmetic, and returns a certificate for
the negative answers and verified first integrals for the centers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .dsl import NetworkSource
from .network import structure_report
from .polyfield import Poly, PolynomialVectorField, build_vector_field, poly_add, poly_scale, poly_str

__all__ = [
    "DecompositionError",
    "InternalFinding",
    "DegreeDecomposition",
    "DulacReport",
    "Affine",
    "LevelCondition",
    "ClassificationVerdict",
    "FirstIntegral",
    "SimulationCheck",
    "degree_decompose",
    "dulac_divergence_report",
    "lotka_volterra_form",
    "classify_rank2_bimolecular",
    "center_first_integral",
    "random_bimolecular_network",
    "simulation_check",
]

KINDS = ("LotkaCenter", "IvanovaCenter", "ReducedThenClassified", "NoPeriodicOrbit", "NotApplicable")


class DecompositionError(ValueError):
    """Input is not a bimolecular field."""


class InternalFinding(AssertionError):
    """A sign property that bimolecularity guarantees was violated."""


def _sgn(q) -> int:
    return (q > 0) - (q < 0)


def _unit(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(n))


# --- degree decomposition ---------------------------------------------------


@dataclass(frozen=True)
class DegreeDecomposition:
    """``f_k = a_k + x_k b_k + c_k x_k^2`` with ``a_k, b_k`` free of ``x_k``."""

    a: tuple[Poly, ...]
    b: tuple[Poly, ...]
    c: tuple[Fraction, ...]
    species: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.species)

    def reassemble(self, k: int) -> Poly:
        n = self.n
        xb = {tuple(e[j] + (j == k) for j in range(n)): v for e, v in self.b[k].items()}
        sq = {tuple(2 if j == k else 0 for j in range(n)): self.c[k]} if self.c[k] else {}
        return poly_add(self.a[k], xb, sq)

    def to_json(self) -> dict:
        return {
            s: {"a": poly_str(self.a[k], self.species), "b": poly_str(self.b[k], self.species), "c": str(self.c[k])}
            for k, s in enumerate(self.species)
        }


def degree_decompose(field: PolynomialVectorField) -> DegreeDecomposition:
    """Split every component by its degree in its own species."""
    if field.max_degree > 2:
        raise DecompositionError(f"field has degree {field.max_degree}; bimolecular fields are at most quadratic")
    if field.network is not None and not structure_report(field.network).bimolecular:
        raise DecompositionError("network has a complex of molecularity above two")
    n = field.n
    a_all, b_all, c_all = [], [], []
    for k, comp in enumerate(field.components):
        a: Poly = {}
        b: Poly = {}
        c = Fraction(0)
        for e, v in comp.items():
            v = Fraction(v)
            if e[k] == 0:
                a[e] = v
            elif e[k] == 1:
                b[e[:k] + (0,) + e[k + 1:]] = v
            else:
                c += v
        if any(v < 0 for v in a.values()):
            raise InternalFinding(f"a_{field.species[k]} has a negative coefficient")
        if c > 0:
            raise InternalFinding(f"c_{field.species[k]} = {c} is positive")
        a_all.append(a)
        b_all.append(b)
        c_all.append(c)
    dec = DegreeDecomposition(tuple(a_all), tuple(b_all), tuple(c_all), tuple(field.species))
    for k in range(n):
        if dec.reassemble(k) != {e: Fraction(v) for e, v in field.components[k].items()}:
            raise InternalFinding(f"decomposition of component {k} does not reassemble")
    return dec


@dataclass(frozen=True)
class DulacReport:
    """Sign structure of the divergence of ``f / prod x_i``.

    Up to the positive factor ``1 / prod x_i`` the divergence is
    ``sum_k (-a_k / x_k + c_k x_k)``, which is never positive; it vanishes
    identically iff every ``a_k`` and every ``c_k`` is zero.
    """

    identically_zero: bool
    witness: dict | None

    @property
    def status(self) -> str:
        return "identically zero" if self.identically_zero else "strictly negative somewhere"

    def to_json(self) -> dict:
        return {"status": self.status, "witness": self.witness}


def dulac_divergence_report(dec: DegreeDecomposition) -> DulacReport:
    for k, s in enumerate(dec.species):
        if dec.a[k]:
            term = poly_str(dec.a[k], dec.species)
            return DulacReport(False, {
                "type": "nonzeroA", "species": s, "a": term,
                "detail": f"a_{s} = {term} contributes -a_{s}/{s} < 0 to the scaled divergence",
            })
    for k, s in enumerate(dec.species):
        if dec.c[k]:
            return DulacReport(False, {
                "type": "negativeC", "species": s, "c": str(dec.c[k]),
                "detail": f"c_{s} = {dec.c[k]} contributes c_{s}*{s} < 0 to the scaled divergence",
            })
    return DulacReport(True, None)


def lotka_volterra_form(dec: DegreeDecomposition) -> tuple[list[Fraction], list[list[Fraction]]]:
    """``(r, B)`` with ``f_k = x_k (r_k + sum_i B[k][i] x_i)``; needs zero divergence."""
    n = dec.n
    zero = tuple([0] * n)
    r = [Fraction(0)] * n
    B = [[Fraction(0)] * n for _ in range(n)]
    for k in range(n):
        if dec.a[k] or dec.c[k]:
            raise ValueError("not of Lotka-Volterra form: a_k or c_k is nonzero")
        for e, v in dec.b[k].items():
            if e == zero:
                r[k] = v
            else:
                i = e.index(1)
                B[k][i] = v
    return r, B


# --- class-level dependent coefficients -------------------------------------


@dataclass(frozen=True)
class Affine:
    """``const + sum coeff * level`` over the levels of frozen species."""

    const: Fraction = Fraction(0)
    coeffs: tuple[tuple[str, Fraction], ...] = ()

    @staticmethod
    def of(q) -> "Affine":
        return Affine(Fraction(q))

    def add_level(self, name: str, q: Fraction) -> "Affine":
        if q == 0:
            return self
        d = dict(self.coeffs)
        d[name] = d.get(name, Fraction(0)) + q
        return Affine(self.const, tuple(sorted((k, v) for k, v in d.items() if v != 0)))

    @property
    def constant(self) -> bool:
        return not self.coeffs

    def is_zero(self) -> bool:
        return self.const == 0 and not self.coeffs

    def scale(self, s) -> "Affine":
        return Affine(self.const * s, tuple((k, v * s) for k, v in self.coeffs if v * s != 0))

    def evaluate(self, levels: Mapping[str, object] | None = None):
        levels = levels or {}
        out = self.const
        for k, v in self.coeffs:
            if k not in levels:
                raise KeyError(f"level of {k} is required")
            lv = levels[k]
            out = out + v * (Fraction(lv) if isinstance(lv, (int, Fraction)) else lv)
        return out

    def __str__(self) -> str:
        parts = [str(self.const)] if self.const != 0 or not self.coeffs else []
        for k, v in self.coeffs:
            mag = abs(v)
            term = k if mag == 1 else f"{mag}*{k}"
            if parts:
                parts.append(("+ " if v > 0 else "- ") + term)
            else:
                parts.append(term if v > 0 else "-" + term)
        return " ".join(parts)


@dataclass(frozen=True)
class LevelCondition:
    """``expr > 0``, an inequality on the levels of frozen species."""

    expr: Affine

    def holds(self, levels: Mapping[str, object]) -> bool:
        return self.expr.evaluate(levels) > 0

    def solved(self) -> str | None:
        if len(self.expr.coeffs) != 1:
            return None
        name, q = self.expr.coeffs[0]
        bound = -self.expr.const / q
        return f"{name} {'>' if q > 0 else '<'} {bound}"

    def to_json(self) -> dict:
        return {"expression": str(self.expr), "relation": ">", "value": 0, "solved": self.solved()}


# --- verdicts ---------------------------------------------------------------


@dataclass
class ClassificationVerdict:
    kind: str
    parameters: dict = dc_field(default_factory=dict)
    certificate: dict | None = None
    reduction: list = dc_field(default_factory=list)
    conditions: list = dc_field(default_factory=list)
    species: tuple[str, ...] = ()
    # for ReducedThenClassified: the center kind and what holds when a condition fails
    center_kind: str | None = None
    otherwise: "ClassificationVerdict | None" = None
    variables: tuple[int, ...] = ()
    field: PolynomialVectorField | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    @property
    def is_center(self) -> bool:
        return self.kind in ("LotkaCenter", "IvanovaCenter")

    @property
    def excludes_periodic_orbits(self) -> bool:
        return self.kind == "NoPeriodicOrbit"

    def at_levels(self, levels: Mapping[str, object]) -> "ClassificationVerdict":
        """Concrete verdict on the classes where the frozen species sit at ``levels``."""
        if self.kind != "ReducedThenClassified":
            return self
        if self.conditions and not all(c.holds(levels) for c in self.conditions):
            return self.otherwise
        params = {k: (v.evaluate(levels) if isinstance(v, Affine) else v) for k, v in self.parameters.items()}
        return ClassificationVerdict(
            self.center_kind, params, None, list(self.reduction), [], self.species,
            variables=self.variables, field=self.field,
        )

    def to_json(self) -> dict:
        from .report import rational_repr

        def conv(v):
            if isinstance(v, Affine):
                return rational_repr(v.const) if v.constant else str(v)
            if isinstance(v, Fraction):
                return rational_repr(v)
            return v

        out = {
            "kind": self.kind,
            "parameters": {k: conv(v) for k, v in self.parameters.items()},
            "certificate": self.certificate,
            "reduction": self.reduction,
            "conditionsOnClassLevel": [c.to_json() for c in self.conditions],
        }
        if self.kind == "ReducedThenClassified":
            out["centerKind"] = self.center_kind
            out["otherwise"] = None if self.otherwise is None else self.otherwise.to_json()
        return out


def _not_applicable(net: NetworkSource, hypothesis: str, detail: str) -> ClassificationVerdict:
    return ClassificationVerdict(
        "NotApplicable", certificate={"type": "hypothesis", "violated": hypothesis, "detail": detail},
        species=tuple(net.species),
    )


def classify_rank2_bimolecular(net: NetworkSource) -> ClassificationVerdict:
    """Decide whether the network can have periodic orbits; total on all inputs."""
    rep = structure_report(net)
    if not rep.bimolecular:
        worst = max(net.complexes, key=sum)
        return _not_applicable(
            net, "bimolecular",
            f"complex {net.complex_str(worst)} has molecularity {sum(worst)} > 2",
        )
    if rep.rank != 2:
        return _not_applicable(net, "rank two", f"stoichiometric subspace has dimension {rep.rank}")
    fld = build_vector_field(net)
    species = tuple(net.species)
    dec = degree_decompose(fld)
    dul = dulac_divergence_report(dec)
    base = dict(species=species, field=fld)
    if not dul.identically_zero:
        return ClassificationVerdict("NoPeriodicOrbit", certificate=dul.witness, **base)
    r0, B = lotka_volterra_form(dec)
    r = [Affine.of(q) for q in r0]
    alive = list(range(fld.n))
    trail = []
    changed = True
    while changed:
        changed = False
        for k in list(alive):
            if r[k].is_zero() and all(B[k][i] == 0 for i in alive):
                alive.remove(k)
                level = species[k]
                updates = {}
                for j in alive:
                    if B[j][k] != 0:
                        r[j] = r[j].add_level(level, B[j][k])
                        updates[species[j]] = str(r[j])
                trail.append({"species": species[k], "level": level, "updated": updates})
                changed = True
                break
    base.update(reduction=trail)
    rr = [r[k] for k in alive]
    BB = [[B[k][i] for i in alive] for k in alive]
    names = [species[k] for k in alive]
    if len(alive) == 2:
        v = _classify_two(rr, BB, names, base)
    elif len(alive) == 3:
        v = _classify_three(rr, BB, names, base)
    else:
        v = _classify_many(rr, BB, names, base)
    v.variables = tuple(alive)
    if v.otherwise is not None:
        v.otherwise.variables = tuple(alive)
    return v


def _monotone(name: str, detail: str, **base) -> ClassificationVerdict:
    return ClassificationVerdict(
        "NoPeriodicOrbit",
        certificate={"type": "monotone", "species": name, "detail": f"{name} is strictly monotone: {detail}"},
        **base,
    )


def _classify_two(r, B, names, base) -> ClassificationVerdict:
    x, y = names
    b12, b21 = B[0][1], B[1][0]
    for k, (bk, nm, other) in enumerate(((b12, x, y), (b21, y, x))):
        if bk == 0:
            return ClassificationVerdict(
                "NoPeriodicOrbit",
                certificate={
                    "type": "monotone", "species": nm,
                    "detail": f"d{nm}/dt = {nm}*({r[k]}) does not involve {other}, so {nm} is monotone or constant",
                },
                **base,
            )
    needs = [(0, -_sgn(b12), x, b12), (1, -_sgn(b21), y, b21)]
    pending = []
    for k, s, nm, bk in needs:
        if r[k].constant:
            if s * r[k].const <= 0:
                return _monotone(nm, f"r = {r[k]} and the interaction coefficient {bk} do not have opposite signs", **base)
        else:
            pending.append((k, s, nm, bk))
    if b12 * b21 > 0:
        return ClassificationVerdict(
            "NoPeriodicOrbit",
            certificate={
                "type": "saddle",
                "detail": f"b12*b21 = {b12 * b21} > 0: a positive equilibrium would be a saddle",
            },
            **base,
        )
    a, b, bp, c = r[0], -b12, b21, r[1].scale(-1)
    if not bp <= b:
        return ClassificationVerdict(
            "NotApplicable",
            certificate={"type": "internalFinding", "detail": f"b' = {bp} > b = {b} although the network is bimolecular"},
            **base,
        )
    params = {"a": a, "b": b, "b'": bp, "c": c}
    if not pending and not base["reduction"]:
        return ClassificationVerdict("LotkaCenter", {k: _const(v) for k, v in params.items()}, **base)
    conds = [LevelCondition(r[k].scale(s)) for k, s, _, _ in pending]
    otherwise = None
    if pending:
        k, s, nm, bk = pending[0]
        otherwise = _monotone(
            nm, f"r = {r[k]} and the interaction coefficient {bk} do not have opposite signs; no positive equilibrium",
            **base,
        )
    return ClassificationVerdict(
        "ReducedThenClassified", params, None, conditions=conds, center_kind="LotkaCenter", otherwise=otherwise, **base
    )


def _const(v):
    return v.const if isinstance(v, Affine) and v.constant else v


def _constraint_rows(r, B) -> list[list[Fraction]]:
    """Linear conditions on ``d`` for ``d . f`` to vanish identically."""
    m = len(r)
    rows = []
    for k in range(m):
        if not r[k].is_zero():
            rows.append([Fraction(int(j == k)) for j in range(m)])
    for k, i in itertools.combinations(range(m), 2):
        row = [Fraction(0)] * m
        row[k], row[i] = B[k][i], B[i][k]
        if row[k] or row[i]:
            rows.append(row)
    return rows


def minimal_support_conservation(r, B, max_support: int = 3) -> tuple[tuple[int, ...], list[Fraction]] | None:
    """Conservation vector whose support is minimal under inclusion."""
    m = len(r)
    rows = _constraint_rows(r, B)
    for size in range(1, min(max_support, m) + 1):
        for sup in itertools.combinations(range(m), size):
            sub = [[row[j] for j in sup] for row in rows] or [[Fraction(0)] * size]
            ns = linalg.nullspace(sub, size)
            for v in ns:
                if all(x != 0 for x in v):
                    full = [Fraction(0)] * m
                    for j, x in zip(sup, v):
                        full[j] = Fraction(x)
                    return sup, full
    return None


def _classify_three(r, B, names, base) -> ClassificationVerdict:
    found = minimal_support_conservation(r, B)
    if found is None:
        return ClassificationVerdict(
            "NotApplicable",
            certificate={"type": "internalFinding", "detail": "reduced three-species system has no conservation law"},
            **base,
        )
    sup, d = found
    if len(sup) == 1:
        return ClassificationVerdict(
            "NotApplicable",
            certificate={"type": "internalFinding", "detail": f"{names[sup[0]]} is constant after reduction"},
            **base,
        )
    if len(sup) == 2:
        i, j = sup
        return _monotone(
            names[i],
            f"the conservation law {_dstr(d, names)} forces d{names[i]}/dt = {B[i][j]}*{names[i]}*{names[j]}",
            **base,
        )
    for k in range(3):
        i, j = [q for q in range(3) if q != k]
        if not _sgn(B[k][i]) == -_sgn(B[k][j]) != 0:
            return _monotone(
                names[k],
                f"coefficients {B[k][i]} of {names[i]} and {B[k][j]} of {names[j]} do not have opposite signs",
                **base,
            )
    for k, i in itertools.combinations(range(3), 2):
        if B[k][i] != -B[i][k]:
            return ClassificationVerdict(
                "NotApplicable",
                certificate={
                    "type": "internalFinding",
                    "detail": f"b_{k + 1}{i + 1} = {B[k][i]} differs from -b_{i + 1}{k + 1} = {-B[i][k]}",
                },
                **base,
            )
    params = {"a": B[0][2], "b": B[1][0], "c": B[2][1], "conservation": [str(x) for x in d]}
    if base["reduction"]:
        return ClassificationVerdict("ReducedThenClassified", params, None, center_kind="IvanovaCenter", **base)
    return ClassificationVerdict("IvanovaCenter", params, **base)


def _dstr(d, names) -> str:
    return poly_str({_unit(len(d), i): x for i, x in enumerate(d) if x != 0}, names) + " = const"


def _classify_many(r, B, names, base) -> ClassificationVerdict:
    if len(names) < 2:
        nm = names[0] if names else None
        if nm is None:
            detail = "every species is constant"
            return ClassificationVerdict("NoPeriodicOrbit", certificate={"type": "constant", "detail": detail}, **base)
        return _monotone(nm, f"d{nm}/dt = {nm}*({r[0]})", **base)
    found = minimal_support_conservation(r, B)
    cert = {"type": "emptyCase", "detail": f"{len(names)} non-constant species in a two-dimensional class"}
    if found is not None:
        sup, d = found
        cert["support"] = [names[i] for i in sup]
        cert["vector"] = [str(x) for x in d]
        cert["detail"] += (
            f"; the minimal-support law {_dstr(d, names)} confines {len(sup)} species to a closed subsystem "
            "that already spans the class, so the others would be constant"
        )
    return ClassificationVerdict("NoPeriodicOrbit", certificate=cert, **base)


# --- first integrals --------------------------------------------------------


@dataclass(frozen=True)
class FirstIntegral:
    """``H(x) = sum lin_i x_i + sum log_i log x_i`` over species indices."""

    linear: tuple[tuple[int, Fraction], ...]
    logarithmic: tuple[tuple[int, Fraction], ...]
    species: tuple[str, ...]

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        val = sum(float(c) * x[..., i] for i, c in self.linear)
        return val + sum(float(c) * np.log(x[..., i]) for i, c in self.logarithmic)

    def derivative(self, field: PolynomialVectorField, levels: Mapping[int, Fraction] | None = None) -> Poly:
        """Exact ``dH/dt`` with frozen species substituted by ``levels``."""
        n = field.n
        terms = [poly_scale(field.components[i], Fraction(c)) for i, c in self.linear]
        for i, c in self.logarithmic:
            comp = field.components[i]
            if any(e[i] == 0 for e in comp):
                raise InternalFinding(f"component {field.species[i]} is not divisible by {field.species[i]}")
            div = {e[:i] + (e[i] - 1,) + e[i + 1:]: v for e, v in comp.items()}
            terms.append(poly_scale(div, Fraction(c)))
        dh = poly_add(*terms)
        if levels:
            out: Poly = {}
            for e, v in dh.items():
                w = Fraction(v)
                e2 = list(e)
                for j, lv in levels.items():
                    w *= Fraction(lv) ** e[j]
                    e2[j] = 0
                out[tuple(e2)] = out.get(tuple(e2), 0) + w
            dh = {e: v for e, v in out.items() if v != 0}
        return dh

    def __str__(self) -> str:
        terms = [(Fraction(c), self.species[i]) for i, c in self.linear]
        terms += [(Fraction(c), f"log({self.species[i]})") for i, c in self.logarithmic]
        out = ""
        for c, t in terms:
            if c == 0:
                continue
            mag = t if abs(c) == 1 else f"{abs(c)}*{t}"
            out += (" - " if c < 0 else " + ") + mag if out else ("-" if c < 0 else "") + mag
        return out or "0"


def center_first_integral(
    verdict: ClassificationVerdict, levels: Mapping[str, object] | None = None
) -> list[FirstIntegral]:
    """Verified first integrals of a center verdict.

    Frozen species enter through ``levels``; the time derivative of every
    candidate is expanded exactly and must vanish, otherwise
    :class:`InternalFinding` is raised.
    """
    if verdict.kind == "ReducedThenClassified":
        if levels is None:
            raise ValueError("reduced verdicts need the levels of the frozen species")
        verdict = verdict.at_levels(levels)
    if not verdict.is_center:
        raise ValueError(f"{verdict.kind} verdicts have no center integrals")
    fld = verdict.field
    if fld is None:
        raise ValueError("verdict carries no vector field")
    idx = verdict.variables
    p = {k: Fraction(v) for k, v in verdict.parameters.items() if k != "conservation"}
    sp = verdict.species
    if verdict.kind == "LotkaCenter":
        ix, iy = idx
        cands = [FirstIntegral(((ix, p["b'"]), (iy, p["b"])), ((ix, -p["c"]), (iy, -p["a"])), sp)]
    else:
        i1, i2, i3 = idx
        d = [Fraction(x) for x in verdict.parameters.get("conservation", ("1", "1", "1"))]
        cands = [
            FirstIntegral(tuple(zip(idx, d)), (), sp),
            FirstIntegral((), ((i1, p["c"]), (i2, p["a"]), (i3, p["b"])), sp),
        ]
    frozen = {}
    for step in verdict.reduction:
        j = sp.index(step["species"])
        if levels is None or step["level"] not in levels:
            raise ValueError(f"level of {step['level']} is required")
        frozen[j] = Fraction(levels[step["level"]])
    for h in cands:
        dh = h.derivative(fld, frozen)
        if dh:
            raise InternalFinding(f"candidate integral {h} has dH/dt = {poly_str(dh, sp)}")
    return cands


# --- randomized networks and the simulation check ---------------------------


def _complexes(n: int) -> list[tuple[int, ...]]:
    out = [tuple([0] * n)]
    out += [_unit(n, i) for i in range(n)]
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        e = [0] * n
        e[i] += 1
        e[j] += 1
        out.append(tuple(e))
    return out


def random_bimolecular_network(rng: np.random.Generator, n: int | None = None, max_tries: int = 1000) -> NetworkSource:
    """A random bimolecular network of rank two on ``n`` species.

    Half of the draws start from a Lotka or Ivanova skeleton with random
    rates before extra reactions are added, so the center branches of the
    classifier are exercised as well as the obstructions.
    """
    if n is None:
        n = int(rng.choice([2, 3, 4], p=[0.4, 0.45, 0.15]))
    cx = _complexes(n)

    def rate():
        return Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5)))

    names = "XYZW"[:n] if n <= 4 else [f"S{i}" for i in range(n)]
    for _ in range(max_tries):
        edges = []
        if n in (2, 3) and rng.random() < 0.5:
            if n == 2:
                skel = [((1, 1), (0, 2)), ((1, 0), (2, 0)), ((0, 1), (0, 0))]
            else:
                skel = [((1, 1, 0), (0, 2, 0)), ((1, 0, 1), (2, 0, 0)), ((0, 1, 1), (0, 0, 2))]
            edges = [(a, b, rate()) for a, b in skel]
            extra = int(rng.integers(0, 3))
        else:
            extra = int(rng.integers(2, 6))
        for _ in range(extra):
            i, j = rng.choice(len(cx), size=2, replace=False)
            edges.append((cx[i], cx[j], rate()))
        seen = set()
        uniq = []
        for a, b, k in edges:
            if (a, b) not in seen:
                seen.add((a, b))
                uniq.append((a, b, k))
        net = NetworkSource.from_reactions(names, uniq)
        if linalg.rank([r.vector for r in net.reactions]) == 2:
            return net
    raise RuntimeError("could not draw a rank-two network")


@dataclass(frozen=True)
class SimulationCheck:
    consistent: bool
    outcome: str
    returns: tuple[float, ...] = ()
    detail: str = ""


def simulation_check(
    net: NetworkSource,
    rng: np.random.Generator,
    *,
    windings: int = 50,
    tol: float = 1e-11,
    window: float = 1e6,
    kernel: str | None = None,
) -> SimulationCheck:
    """Look for a numerically closed orbit from a random positive start.

    Around a rotating equilibrium the distances of successive returns to a
    half-line through it must be strictly monotone; a return that closes up
    to relative ``1e-7`` or a non-monotone sequence is inconsistent with the
    absence of periodic orbits. Orbits that leave the window or approach the
    boundary count as exiting.
    """
    from . import equilibria, kernels

    fld = build_vector_field(net)
    rep = structure_report(net)
    n = fld.n
    k = kernels.get(kernel)
    x0 = np.exp(rng.normal(0.0, 0.5, size=n))
    x_eq = _class_equilibrium(fld, rep, x0, rng)
    if x_eq is None:
        return _closure_check(fld, k, x0, tol, window)
    B, _ = np.linalg.qr(np.array(rep.stoichiometric_basis, dtype=float).T)
    Js = B.T @ fld.jacobian_at(x_eq) @ B
    ev, vecs = np.linalg.eig(Js)
    if abs(ev[0].imag) <= 1e-12 * max(1.0, abs(ev[0].real)):
        return SimulationCheck(True, "no-rotation", detail="real spectrum at the class equilibrium")
    omega = abs(ev[0].imag)
    v = vecs[:, 0]
    v = v * np.exp(-0.5j * np.angle(v @ v))
    w = B @ (v.real / np.linalg.norm(v.real))
    nrm = B @ np.array([-v.real[1], v.real[0]]) / np.linalg.norm(v.real)
    nrm = nrm - (nrm @ w) * w
    nrm /= np.linalg.norm(nrm)
    direction = 1 if float(nrm @ (fld.jacobian_at(x_eq) @ w)) >= 0 else -1
    # start on the half-line x_eq + s w inside the class
    neg = w < 0
    s_max = float(np.min(x_eq[neg] / -w[neg])) if np.any(neg) else math.inf
    s0 = min(0.5 * s_max, float(np.linalg.norm(x0 - x_eq)) or 0.3 * float(np.abs(x_eq).max()))
    start = x_eq + s0 * w
    period = 2 * math.pi / omega
    status, t, y, _, _, ct, cy, _, _, _ = k.integrate(
        fld.E, fld.C, start, windings * period * 4, rtol=tol, atol=tol * 1e-2,
        normal=nrm, offset=float(nrm @ x_eq), direction=direction, max_crossings=windings,
        t_min=1e-3 * period,
    )
    pts = np.asarray(cy)[:, :n] if len(ct) else np.empty((0, n))
    s_vals = [float((p - x_eq) @ w) for p in pts]
    rets = [s0] + [s for s in s_vals if s > 0]
    # below this the returns sit at the equilibrium within integration noise
    floor = 1e-6 * float(np.abs(x_eq).max())
    reached = next((i for i, s in enumerate(rets) if s < floor), None)
    if reached is not None:
        rets = rets[: reached + 1]
    if len(rets) < 3:
        if reached is not None:
            return SimulationCheck(True, "contracting", tuple(rets))
        exited = status != 0 or not np.all(np.isfinite(y)) or np.linalg.norm(y) > window or np.min(y) < 1e-8
        return SimulationCheck(True, "exits" if exited else "few-returns", tuple(rets))
    diffs = np.diff(rets)
    rel = np.abs(diffs) / np.asarray(rets[:-1])
    if np.any(rel < 1e-7):
        i = int(np.argmin(rel))
        return SimulationCheck(
            False, "closed-orbit", tuple(rets), f"return {i + 1} closes to relative {rel[i]:.2e}"
        )
    if np.all(diffs < 0):
        return SimulationCheck(True, "contracting", tuple(rets))
    if np.all(diffs > 0):
        return SimulationCheck(True, "expanding", tuple(rets))
    return SimulationCheck(False, "non-monotone", tuple(rets), "return distances are not monotone")


def _class_equilibrium(fld, rep, x0, rng, restarts: int = 12):
    """Positive equilibrium in the class of ``x0``, trying several starts."""
    from . import equilibria

    cons = np.array([[float(v) for v in c] for c in rep.conservation_basis]).reshape(-1, fld.n)
    starts = [x0] + [x0 * np.exp(rng.normal(0.0, 2.0, size=fld.n)) for _ in range(restarts)]
    level = cons @ x0
    for y in starts:
        try:
            with np.errstate(all="ignore"):
                x_eq = equilibria.find_equilibrium_in_class(fld, rep, y, target=level)
        except (equilibria.CurveError, np.linalg.LinAlgError, FloatingPointError):
            continue
        if not np.all(np.isfinite(x_eq)) or np.any(x_eq <= 0):
            continue
        if cons.size and np.abs(cons @ x_eq - cons @ x0).max() > 1e-8 * max(1.0, float(np.abs(cons @ x0).max())):
            continue
        return x_eq
    return None


def _closure_check(fld, k, x0, tol, window) -> SimulationCheck:
    """Without an equilibrium: the orbit must not come back to its start."""
    n = fld.n
    T = 50.0
    status, t, y, ts, ys, _, _, _, _, _ = k.integrate(fld.E, fld.C, x0, T, rtol=tol, atol=tol * 1e-2, record=True)
    ys = np.asarray(ys).reshape(-1, n)
    scale = float(np.linalg.norm(x0))
    out = np.nonzero(~np.all(np.isfinite(ys) & (np.abs(ys) <= window * max(1.0, scale)), axis=1))[0]
    if out.size:
        ys = ys[: out[0]]
    dist = np.linalg.norm(ys - x0[None, :], axis=1)
    left = np.nonzero(dist > 0.1 * scale)[0]
    if left.size and left[0] + 1 < len(dist):
        later = dist[left[0]:]
        if later.min() < 1e-6 * scale:
            return SimulationCheck(False, "closed-orbit", detail="orbit returns to its start without an equilibrium")
    return SimulationCheck(True, "no-equilibrium")
