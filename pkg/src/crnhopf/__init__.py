"""Hopf bifurcations, focal values and limit cycles of mass-action reaction networks."""

from .dsl import DSLError, NetworkSource, Reaction, format_network, load_network, parse_network
from .equilibria import (
    CurveError,
    EquilibriumCurve,
    ExponentSum,
    equilibrium_at_class,
    find_equilibrium_in_class,
    toric_equilibrium_curve,
    trace_on_curve,
    trace_roots,
)
from .network import Applicability, StructureReport, deficiency_one_applicable, structure_report
from .polyfield import PolynomialVectorField, build_vector_field

__version__ = "0.1.0"

__all__ = [
    "DSLError",
    "NetworkSource",
    "Reaction",
    "format_network",
    "load_network",
    "parse_network",
    "CurveError",
    "EquilibriumCurve",
    "ExponentSum",
    "equilibrium_at_class",
    "find_equilibrium_in_class",
    "toric_equilibrium_curve",
    "trace_on_curve",
    "trace_roots",
    "Applicability",
    "StructureReport",
    "deficiency_one_applicable",
    "structure_report",
    "PolynomialVectorField",
    "build_vector_field",
    "__version__",
]
