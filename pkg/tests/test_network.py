from fractions import Fraction

import pytest
from hypothesis import given

from crnhopf import library
from crnhopf.network import (
    conservation_basis,
    deficiency_one_applicable,
    linkage_classes,
    structure_report,
)
from crnhopf.polyfield import build_vector_field, poly_add, poly_scale

from conftest import networks


@given(networks())
def test_deficiency_formula(net):
    rep = structure_report(net)
    assert rep.deficiency == rep.m - rep.l - rep.rank >= 0


@given(networks())
def test_conservation_vectors_annihilate_reactions(net):
    for d in conservation_basis(net):
        for r in net.reactions:
            assert sum(Fraction(di) * vi for di, vi in zip(d, r.vector)) == 0


@given(networks())
def test_witness_is_positive_and_conserves(net):
    rep = structure_report(net)
    assert len(rep.conservation_basis) == net.n - rep.rank
    if not rep.mass_conserving:
        return
    d = rep.witness
    assert all(v > 0 for v in d)
    fld = build_vector_field(net)
    assert poly_add(*(poly_scale(c, di) for c, di in zip(fld.components, d))) == {}


@given(networks())
def test_bimolecular_fields_are_quadratic(net):
    rep = structure_report(net)
    if rep.bimolecular:
        assert build_vector_field(net).max_degree <= 2


@pytest.mark.parametrize("g", [1, 2, 3])
def test_lifted_parallelograms(g):
    for net in (library.net5(g), library.net6(g)):
        rep = structure_report(net)
        assert (rep.m, rep.l, rep.rank, rep.deficiency) == (4, 1, 2, 1)
        assert rep.strongly_connected and rep.mass_conserving
        assert deficiency_one_applicable(net, rep)


def test_lotka_and_ivanova():
    lot = structure_report(library.lotka())
    assert (lot.m, lot.l, lot.rank, lot.deficiency, lot.mass_conserving) == (6, 3, 2, 1, False)
    assert not lot.strongly_connected
    iv = structure_report(library.ivanova())
    assert (iv.m, iv.l, iv.rank, iv.deficiency, iv.mass_conserving) == (6, 3, 2, 1, True)
    assert not iv.strongly_connected
    assert iv.bimolecular


def test_linkage_classes_partition_complexes():
    net = library.lotka()
    lcs = linkage_classes(net)
    flat = [c for lc in lcs for c in lc]
    assert sorted(flat) == sorted(net.complexes)


def test_not_strongly_connected_fails_applicability():
    app = deficiency_one_applicable(library.single_reaction())
    assert not app and "not strongly connected" in app.failed
