"""Structural invariants of a reaction network: stoichiometry, conservation
laws, linkage classes, strong connectivity, deficiency and molecularity."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .dsl import NetworkSource

__all__ = [
    "StructureReport",
    "Applicability",
    "stoichiometric_basis",
    "conservation_basis",
    "linkage_classes",
    "structure_report",
    "molecularity_report",
    "deficiency_one_applicable",
    "positive_conservation_vector",
]


def _reaction_vectors(net: NetworkSource) -> list[tuple[int, ...]]:
    return [r.vector for r in net.reactions]


def stoichiometric_basis(net: NetworkSource) -> list[list[int]]:
    """Integer basis of the stoichiometric subspace S."""
    return [linalg.primitive(v) for v in linalg.row_basis(_reaction_vectors(net))]


def _orient(v: list[int]) -> list[int]:
    # prefer the all-nonnegative representative, else a positive leading entry
    if all(x <= 0 for x in v):
        return [-x for x in v]
    if any(x < 0 for x in v) and next(x for x in v if x != 0) < 0:
        return [-x for x in v]
    return v


def conservation_basis(net: NetworkSource) -> list[list[Fraction]]:
    """Basis of the orthogonal complement of S; empty when rank = n."""
    vecs = _reaction_vectors(net)
    basis = linalg.nullspace(vecs)
    return [[Fraction(x) for x in _orient(linalg.primitive(v))] for v in basis]


def positive_conservation_vector(basis: list[list[Fraction]]) -> list[Fraction] | None:
    """A strictly positive vector in the span of ``basis``, or ``None``.

    One-dimensional spans are decided exactly; otherwise a feasibility LP
    (all coordinates >= 1) is solved and its solution rationalised and
    re-verified exactly.
    """
    if not basis:
        return None
    if len(basis) == 1:
        v = basis[0]
        if all(x > 0 for x in v):
            return list(v)
        if all(x < 0 for x in v):
            return [-x for x in v]
        return None
    from scipy.optimize import linprog

    b = np.array([[float(x) for x in v] for v in basis])
    k, n = b.shape
    res = linprog(np.zeros(k), A_ub=-b.T, b_ub=-np.ones(n), bounds=[(None, None)] * k, method="highs")
    if res.status != 0:
        return None
    for den in (10**3, 10**6, 10**9):
        lam = [Fraction(float(x)).limit_denominator(den) for x in res.x]
        d = [sum((l * v[i] for l, v in zip(lam, basis)), Fraction(0)) for i in range(n)]
        if all(x > 0 for x in d):
            return [Fraction(x) for x in linalg.primitive(d)]
    return None


def linkage_classes(net: NetworkSource) -> list[list[tuple[int, ...]]]:
    """Connected components of the (undirected) reaction graph."""
    comps = net.complexes
    parent = {c: c for c in comps}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for r in net.reactions:
        a, b = find(r.reactant), find(r.product)
        if a != b:
            parent[a] = b
    groups: dict = {}
    for c in comps:
        groups.setdefault(find(c), []).append(c)
    return list(groups.values())


def _strong_components(nodes, edges) -> list[list]:
    """Tarjan's algorithm (iterative)."""
    succ = {v: [] for v in nodes}
    for a, b in edges:
        succ[a].append(b)
    index: dict = {}
    low: dict = {}
    on_stack = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def molecularity_report(net: NetworkSource) -> tuple[int, bool, int]:
    """(max molecularity, bimolecular, max reactant molecularity)."""
    mx = max(sum(c) for c in net.complexes)
    mr = max(sum(r.reactant) for r in net.reactions)
    return mx, mx <= 2, mr


@dataclass(frozen=True)
class StructureReport:
    m: int
    l: int
    rank: int
    deficiency: int
    strongly_connected_classes: tuple[bool, ...]
    strongly_connected: bool
    conservation_basis: tuple[tuple[Fraction, ...], ...]
    mass_conserving: bool
    witness: tuple[Fraction, ...] | None
    max_molecularity: int
    bimolecular: bool
    max_reactant_molecularity: int
    stoichiometric_basis: tuple[tuple[int, ...], ...] = field(default=())
    n: int = 0

    def to_json(self) -> dict:
        from .report import rational_repr

        return {
            "m": self.m,
            "l": self.l,
            "rank": self.rank,
            "deficiency": self.deficiency,
            "stronglyConnected": {"overall": self.strongly_connected, "perLinkageClass": list(self.strongly_connected_classes)},
            "conservationBasis": [[rational_repr(x) for x in v] for v in self.conservation_basis],
            "massConserving": self.mass_conserving,
            "witness": None if self.witness is None else [rational_repr(x) for x in self.witness],
            "maxMolecularity": self.max_molecularity,
            "bimolecular": self.bimolecular,
        }


def structure_report(net: NetworkSource) -> StructureReport:
    lcs = linkage_classes(net)
    per_class = []
    for lc in lcs:
        members = set(lc)
        edges = [(r.reactant, r.product) for r in net.reactions if r.reactant in members]
        per_class.append(len(_strong_components(lc, edges)) == 1)
    m = len(net.complexes)
    sb = stoichiometric_basis(net)
    rk = len(sb)
    cb = conservation_basis(net)
    witness = positive_conservation_vector(cb)
    mx, bimol, mr = molecularity_report(net)
    return StructureReport(
        m=m,
        l=len(lcs),
        rank=rk,
        deficiency=m - len(lcs) - rk,
        strongly_connected_classes=tuple(per_class),
        strongly_connected=len(lcs) == 1 and per_class[0],
        conservation_basis=tuple(tuple(v) for v in cb),
        mass_conserving=witness is not None,
        witness=None if witness is None else tuple(witness),
        max_molecularity=mx,
        bimolecular=bimol,
        max_reactant_molecularity=mr,
        stoichiometric_basis=tuple(tuple(v) for v in sb),
        n=net.n,
    )


@dataclass(frozen=True)
class Applicability:
    passed: bool
    failed: tuple[str, ...]
    deficiency: int
    rank: int

    def __bool__(self) -> bool:
        return self.passed


def deficiency_one_applicable(net: NetworkSource, report: StructureReport | None = None) -> Applicability:
    """Check strong connectivity and deficiency in {0, 1}.

    On success each stoichiometric class carries a unique positive
    equilibrium and ``sgn det J|_S = (-1)^rank`` there.
    """
    rep = report or structure_report(net)
    failed = []
    if not rep.strongly_connected:
        failed.append("not strongly connected")
    if rep.deficiency not in (0, 1):
        failed.append(f"deficiency {rep.deficiency} not in {{0, 1}}")
    return Applicability(not failed, tuple(failed), rep.deficiency, rep.rank)
