from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crnhopf import bimolecular as bm
from crnhopf import dynamics as dyn
from crnhopf import library
from crnhopf.dsl import NetworkSource
from crnhopf.network import structure_report
from crnhopf.polyfield import build_vector_field

from conftest import networks

rate = st.builds(Q, st.integers(1, 9), st.integers(1, 4))
bimolecular_networks = networks(max_species=4, max_coeff=2, max_reactions=7).filter(
    lambda n: structure_report(n).bimolecular
)


@given(bimolecular_networks)
def test_decomposition_reassembles_exactly(net):
    fld = build_vector_field(net)
    dec = bm.degree_decompose(fld)
    for k in range(net.n):
        assert dec.reassemble(k) == {e: Q(v) for e, v in fld.components[k].items()}
        assert all(v >= 0 for v in dec.a[k].values())
        assert dec.c[k] <= 0


@given(st.integers(0, 2**32 - 1))
def test_random_networks_are_rank_two_bimolecular(seed):
    net = bm.random_bimolecular_network(np.random.default_rng(seed))
    rep = structure_report(net)
    assert rep.rank == 2 and rep.bimolecular
    v = bm.classify_rank2_bimolecular(net)
    assert v.kind in bm.KINDS


@given(rate, rate, rate)
def test_lotka_center_sign_invariants(k1, k2, k3):
    v = bm.classify_rank2_bimolecular(library.lotka(k1, k2, k3))
    assert v.kind == "LotkaCenter"
    p = v.parameters
    signs = {np.sign(float(p[k])) for k in ("a", "b", "b'", "c")}
    assert signs == {1.0} and p["b'"] <= p["b"]
    (h,) = bm.center_first_integral(v)
    assert h.derivative(build_vector_field(library.lotka(k1, k2, k3))) == {}


@given(rate, rate, rate)
def test_ivanova_center_sign_invariants(k1, k2, k3):
    v = bm.classify_rank2_bimolecular(library.ivanova(k1, k2, k3))
    assert v.kind == "IvanovaCenter"
    assert {np.sign(float(v.parameters[k])) for k in ("a", "b", "c")} == {1.0}
    assert len(bm.center_first_integral(v)) == 2


def test_dulac_report():
    dec = bm.degree_decompose(build_vector_field(library.lotka()))
    assert bm.dulac_divergence_report(dec).identically_zero
    # degradation only enters b_k and keeps the divergence zero
    assert bm.dulac_divergence_report(bm.degree_decompose(build_vector_field(library.generalized_lotka(k2t=1)))).identically_zero
    crowded = NetworkSource(library.lotka().species, library.lotka().reactions + NetworkSource.from_reactions(
        "XY", [((2, 0), (1, 0), 1)]).reactions)
    rep = bm.dulac_divergence_report(bm.degree_decompose(build_vector_field(crowded)))
    assert not rep.identically_zero and rep.witness["type"] == "negativeC" and rep.witness["species"] == "X"
    fed = NetworkSource(library.lotka().species, library.lotka().reactions + NetworkSource.from_reactions(
        "XY", [((0, 0), (1, 0), 1)]).reactions)
    rep = bm.dulac_divergence_report(bm.degree_decompose(build_vector_field(fed)))
    assert rep.witness["type"] == "nonzeroA"


def test_decomposition_rejects_non_bimolecular_networks():
    with pytest.raises(bm.DecompositionError):
        bm.degree_decompose(build_vector_field(library.net5(1)))
    with pytest.raises(bm.DecompositionError):
        bm.degree_decompose(build_vector_field(library.frank_kamenetsky_salnikov()))


@given(rate, rate, rate, rate, st.builds(Q, st.integers(0, 20), st.integers(1, 5)))
def test_reduction_commutes_with_direct_classification(k1, k2, k3, k4, z):
    reduced = bm.classify_rank2_bimolecular(library.lotka_with_constant_species(k1, k2, k3, k4))
    assert reduced.kind == "ReducedThenClassified"
    (cond,) = reduced.conditions
    assert cond.solved() == f"Z < {k2 / k4}"
    at = reduced.at_levels({"Z": z})
    if k2 - k4 * z > 0:
        direct = bm.classify_rank2_bimolecular(library.lotka(k1, k2 - k4 * z, k3))
        assert at.kind == direct.kind == "LotkaCenter"
        assert at.parameters == direct.parameters
    else:
        assert at.kind == "NoPeriodicOrbit" and at.certificate["type"] == "monotone"


def test_reduced_first_integral_matches_level():
    v = bm.classify_rank2_bimolecular(library.lotka_with_constant_species())
    with pytest.raises(ValueError):
        bm.center_first_integral(v)
    (h,) = bm.center_first_integral(v, {"Z": 1})
    fld = build_vector_field(library.lotka_with_constant_species())
    assert h.derivative(fld, {2: Q(1)}) == {}


def test_not_applicable_names_hypothesis():
    v = bm.classify_rank2_bimolecular(library.frank_kamenetsky_salnikov())
    assert v.kind == "NotApplicable" and v.certificate["violated"] == "bimolecular"
    v3 = bm.classify_rank2_bimolecular(library.net5(1))
    assert v3.kind == "NotApplicable"


def test_generalized_families():
    assert bm.classify_rank2_bimolecular(library.generalized_lotka(3, 1, 1, 0, 0, 2, 1, 2, 1)).kind in bm.KINDS
    assert bm.classify_rank2_bimolecular(library.generalized_ivanova(3, 1, 3, 1, 3, 1)).is_center
    damped = bm.classify_rank2_bimolecular(library.generalized_lotka(k2=1, k2t=2))
    assert damped.kind == "NoPeriodicOrbit"


def _closed_orbit_drift(net, periods=50):
    v = bm.classify_rank2_bimolecular(net)
    hs = bm.center_first_integral(v)
    fld = build_vector_field(net)
    fr = dyn.class_frame(fld, x_ref=np.full(fld.n, 0.7))
    s = 0.5 * min(fr.s_max, float(np.abs(fr.x_eq).max()))
    _, T = dyn.poincare_map(fld, fr.section, fr.point(s), tol=1e-13)
    traj = dyn.integrate(fld, fr.point(s), periods * T, 1e-13, samples=20 * periods + 1)
    return max(float(np.abs(h(traj.states) - h(traj.states[0])).max() / abs(h(traj.states[0]))) for h in hs)


@pytest.mark.parametrize("net", [library.lotka(1, 2, 3), library.ivanova(1, 2, 3), library.generalized_ivanova(3, 1, 3, 1, 3, 1)])
def test_center_integrals_conserved_over_fifty_periods(net):
    assert _closed_orbit_drift(net) <= 1e-6


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_no_periodic_orbit_verdicts_survive_simulation(seed):
    rng = np.random.default_rng(seed)
    net = bm.random_bimolecular_network(rng)
    if not bm.classify_rank2_bimolecular(net).excludes_periodic_orbits:
        return
    chk = bm.simulation_check(net, rng)
    assert chk.consistent, chk.detail


def test_simulation_check_detects_centers():
    chk = bm.simulation_check(library.lotka(1, 2, 3), np.random.default_rng(0))
    assert not chk.consistent and chk.outcome == "closed-orbit"


def test_many_species_empty_case():
    net = NetworkSource.from_reactions("XYZW", [((1, 1, 0, 0), (0, 2, 0, 0), 1), ((0, 0, 1, 1), (0, 0, 0, 2), 2)])
    assert structure_report(net).rank == 2
    v = bm.classify_rank2_bimolecular(net)
    assert v.kind == "NoPeriodicOrbit" and v.certificate["type"] == "emptyCase"
    assert len(v.certificate["support"]) == 2
