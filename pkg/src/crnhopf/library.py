"""The concrete networks studied in the oscillation analysis, as builders.

``net5``/``net6``/``net8`` are the three lifted parallelograms (three
species, rank two, mass-conserving); the rest are rank-two bimolecular
examples plus the trimolecular Frank-Kamenetsky--Salnikov oscillator.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from .dsl import NetworkSource

Q = Fraction

__all__ = [
    "net5",
    "net6",
    "net8",
    "lotka",
    "ivanova",
    "lotka_with_constant_species",
    "generalized_lotka",
    "generalized_ivanova",
    "frank_kamenetsky_salnikov",
    "single_reaction",
    "reversible_pair",
    "two_parameter_family",
    "family_parameters",
    "FKS_DEFAULT_RATES",
]


def _build(species, edges) -> NetworkSource:
    return NetworkSource.from_reactions(species, [(r, p, k) for r, p, k in edges if Q(k) != 0])


def net5(gamma: int = 2, k1=16, k2=Q(1, 16), k3=1, k4=1) -> NetworkSource:
    """Y+gZ -> X+gZ -> X+2Y -> 3Y -> Y+gZ (a 4-cycle)."""
    g = int(gamma)
    p1, p2, p3, p4 = (0, 1, g), (1, 0, g), (1, 2, 0), (0, 3, 0)
    return _build("XYZ", [(p1, p2, k1), (p2, p3, k2), (p3, p4, k3), (p4, p1, k4)])


def net6(gamma: int = 2, a=Q(1, 200), b=Q(22, 200)) -> NetworkSource:
    """Parallelogram with rates 1, a, 4a, 1, 4b, b (two reversible sides)."""
    g = int(gamma)
    a, b = Q(a), Q(b)
    p1, p2, p3, p4 = (0, 1, g), (1, 0, g), (1, 2, 0), (0, 3, 0)
    return _build(
        "XYZ",
        [(p1, p2, 1), (p2, p3, a), (p3, p2, 4 * a), (p3, p4, 1), (p4, p1, 4 * b), (p1, p4, b)],
    )


def net8(a=Q(1, 256), b=Q(12, 256)) -> NetworkSource:
    """Y+Z, 2X+Z, 2X+2Y, 3Y parallelogram; two Hopf points on its curve."""
    a, b = Q(a), Q(b)
    p1, p2, p3, p4 = (0, 1, 1), (2, 0, 1), (2, 2, 0), (0, 3, 0)
    return _build(
        "XYZ",
        [(p1, p2, 1), (p2, p3, a), (p3, p2, 4 * a), (p3, p4, 1), (p4, p1, 4 * b), (p1, p4, b)],
    )


def lotka(k1=1, k2=1, k3=1) -> NetworkSource:
    return _build("XY", [((1, 1), (0, 2), k1), ((1, 0), (2, 0), k2), ((0, 1), (0, 0), k3)])


def ivanova(k1=1, k2=1, k3=1) -> NetworkSource:
    return _build(
        "XYZ",
        [((1, 1, 0), (0, 2, 0), k1), ((1, 0, 1), (2, 0, 0), k2), ((0, 1, 1), (0, 0, 2), k3)],
    )


def lotka_with_constant_species(k1=1, k2=2, k3=1, k4=1) -> NetworkSource:
    """Lotka plus X+Z -> Z; z is constant and shifts the prey growth rate."""
    return _build(
        "XYZ",
        [
            ((1, 1, 0), (0, 2, 0), k1),
            ((1, 0, 0), (2, 0, 0), k2),
            ((0, 1, 0), (0, 0, 0), k3),
            ((1, 0, 1), (0, 0, 1), k4),
        ],
    )


def generalized_lotka(k1=2, k1t=0, lam=0, mu=0, nu=0, k2=1, k2t=0, k3=1, k3t=0) -> NetworkSource:
    """Nine-reaction Lotka variant; zero rates drop the reaction."""
    xy, x, y, o = (1, 1), (1, 0), (0, 1), (0, 0)
    return _build(
        "XY",
        [
            (xy, (0, 2), k1),
            (xy, (2, 0), k1t),
            (xy, o, lam),
            (xy, x, mu),
            (xy, y, nu),
            (x, (2, 0), k2),
            (x, o, k2t),
            (y, o, k3),
            (y, (0, 2), k3t),
        ],
    )


def generalized_ivanova(k1=2, k1t=0, k2=2, k2t=0, k3=2, k3t=0) -> NetworkSource:
    xy, xz, yz = (1, 1, 0), (1, 0, 1), (0, 1, 1)
    return _build(
        "XYZ",
        [
            (xy, (0, 2, 0), k1),
            (xy, (2, 0, 0), k1t),
            (xz, (2, 0, 0), k2),
            (xz, (0, 0, 2), k2t),
            (yz, (0, 0, 2), k3),
            (yz, (0, 2, 0), k3t),
        ],
    )


# unstable focus (trace 3/sqrt(2) - 2 > 0) surrounded by a stable cycle
FKS_DEFAULT_RATES = (Q(1), Q(1), Q(2), Q(1, 2), Q(1))


def frank_kamenetsky_salnikov(k1=None, k2=None, k3=None, k4=None, k5=None) -> NetworkSource:
    """X+Y->2Y, X->2X, 2X->3X, Y<->0 (rates k1, k2, k4, k3, k5)."""
    d = FKS_DEFAULT_RATES
    k1, k2, k3, k4, k5 = (d[i] if v is None else v for i, v in enumerate((k1, k2, k3, k4, k5)))
    return _build(
        "XY",
        [
            ((1, 1), (0, 2), k1),
            ((1, 0), (2, 0), k2),
            ((2, 0), (3, 0), k4),
            ((0, 1), (0, 0), k3),
            ((0, 0), (0, 1), k5),
        ],
    )


def single_reaction() -> NetworkSource:
    return _build("XY", [((1, 0), (0, 1), 1)])


def reversible_pair(k1=1, k2=1) -> NetworkSource:
    return _build("XY", [((1, 0), (0, 1), k1), ((0, 1), (1, 0), k2)])


def _edges(net: NetworkSource):
    return {(r.reactant, r.product): r.rate for r in net.reactions}


def two_parameter_family(net: NetworkSource) -> tuple[str, Callable[..., NetworkSource]] | None:
    """Recognise ``net`` as a member of the (a, b) families ``net6``/``net8``.

    Returns ``(name, builder)`` with ``builder(a, b)`` or ``None``.
    """
    candidates: list[tuple[str, Callable]] = [("net8", net8)]
    for g in range(1, 7):
        candidates.append((f"net6_g{g}", lambda a, b, g=g: net6(g, a, b)))
    if tuple(net.species) != ("X", "Y", "Z") and len(net.species) != 3:
        return None
    mine = _edges(net)
    for name, build in candidates:
        tmpl = _edges(build(1, 1))
        if set(tmpl) == set(mine):
            return name, lambda a, b, build=build, species=net.species: NetworkSource(
                tuple(species), build(a, b).reactions
            )
    return None


def family_parameters(net: NetworkSource) -> tuple[Q, Q] | None:
    """The ``(a, b)`` with ``two_parameter_family(net)[1](a, b) == net``, or ``None``."""
    found = two_parameter_family(net)
    if found is None:
        return None
    _, build = found
    base = _edges(build(1, 1))
    e_a = next(e for e, k in _edges(build(2, 1)).items() if k == 2 and base[e] == 1)
    e_b = next(e for e, k in _edges(build(1, 2)).items() if k == 2 and base[e] == 1)
    mine = _edges(net)
    a, b = Q(mine[e_a]), Q(mine[e_b])
    if _edges(build(a, b)) != mine:
        return None
    return a, b
