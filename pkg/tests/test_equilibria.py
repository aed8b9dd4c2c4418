import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crnhopf import library
from crnhopf.equilibria import (
    ExponentSum,
    equilibrium_at_class,
    find_equilibrium_in_class,
    toric_equilibrium_curve,
    trace_on_curve,
    trace_roots,
)
from crnhopf.network import structure_report
from crnhopf.polyfield import build_vector_field

small = st.builds(Fraction, st.integers(1, 40), st.integers(1, 40))
T_SAMPLES = (0.25, 0.5, 1.0, 2.0, 4.0)


@st.composite
def deficiency_one_family(draw):
    kind = draw(st.sampled_from(["net5", "net6", "net8"]))
    g = draw(st.integers(1, 3))
    if kind == "net5":
        return library.net5(g, *(draw(small) for _ in range(4)))
    if kind == "net6":
        return library.net6(g, draw(small) / 50, draw(small) / 50)
    return library.net8(draw(small) / 200, draw(small) / 200)


@given(deficiency_one_family())
def test_curve_points_are_equilibria(net):
    fld = build_vector_field(net)
    cur = toric_equilibrium_curve(fld)
    for t in T_SAMPLES:
        x = cur.point_float(t)
        scale = np.abs(fld.C).max() * max(1.0, np.abs(x).max()) ** fld.max_degree
        assert np.linalg.norm(fld.evaluate(x)) <= 1e-10 * scale


@given(deficiency_one_family())
def test_trace_and_spectrum_on_curve(net):
    fld = build_vector_field(net)
    cur = toric_equilibrium_curve(fld)
    tr = trace_on_curve(fld, cur)
    exps = [p for _, p in tr.terms]
    assert exps == sorted(set(exps)) and all(c != 0 for c, _ in tr.terms)
    for t in T_SAMPLES:
        J = fld.jacobian_at(cur.point_float(t))
        val = float(tr(t)) if tr else 0.0
        assert abs(np.trace(J) - val) <= 1e-10 * max(1.0, np.abs(J).max())
        ev = sorted(np.linalg.eigvals(J), key=abs)
        assert abs(ev[0]) <= 1e-9 * max(1.0, np.abs(J).max())
        assert abs((ev[1] + ev[2]).real - val) <= 1e-9 * max(1.0, np.abs(J).max())
        assert (ev[1] * ev[2]).real > 0


@given(deficiency_one_family())
def test_root_count_matches_sign_changes(net):
    fld = build_vector_field(net)
    tr = trace_on_curve(fld, toric_equilibrium_curve(fld))
    if not tr:
        return
    roots = trace_roots(tr, with_multiplicity=True)
    grid = np.geomspace(1e-6, 1e6, 4001)
    vals = np.array([float(tr(t)) for t in grid])
    changes = int(np.sum(np.sign(vals[1:]) * np.sign(vals[:-1]) < 0))
    odd = sum(1 for r, m in roots if m % 2 == 1 and 1e-6 < r < 1e6)
    assert odd == changes


def test_closed_form_root():
    fld = build_vector_field(library.net5(1, 8, Fraction(1, 8), 1, 1))
    cur = toric_equilibrium_curve(fld).reparametrized((8, 1, 1), (1, 1, 2))
    (t,) = trace_roots(trace_on_curve(fld, cur))
    assert abs(t - 1.0) <= 1e-10


def test_double_root_at_half():
    a = Fraction(1, 256)
    fld = build_vector_field(library.net8(a, Fraction(1, 16) - 4 * a))
    cur = toric_equilibrium_curve(fld)
    ts = trace_on_curve(fld, cur)
    pairs = trace_roots(ts, with_multiplicity=True)
    assert len(pairs) == 1 and pairs[0][1] == 2
    assert abs(pairs[0][0] - 0.5) <= 1e-8


def test_exponent_sum_algebra():
    s = ExponentSum([(Fraction(1), 2), (Fraction(-1), 2), (Fraction(3), 1)])
    assert s.terms == ((Fraction(3), Fraction(1)),)
    assert s.derivative().terms == ((Fraction(3), Fraction(0)),)
    assert not ExponentSum([])
    with pytest.raises(ValueError):
        trace_roots(ExponentSum([]))


def test_two_term_roots_and_fractional_exponents():
    s = ExponentSum([(Fraction(-2), Fraction(1, 2)), (Fraction(1), Fraction(3, 2))])
    assert trace_roots(s) == [2.0]
    assert trace_roots(ExponentSum([(1, 0), (1, 1)])) == []


def test_class_equilibrium_on_curve():
    fld = build_vector_field(library.net5(2))
    cur = toric_equilibrium_curve(fld)
    t, x = equilibrium_at_class(cur, (1, 1, 1), 3.0)
    assert abs(sum(x) - 3.0) < 1e-12 and cur.contains(x)
    with pytest.raises(ValueError):
        equilibrium_at_class(cur, (1, -1, 1), 3.0)


def test_newton_finds_interior_equilibrium():
    net = library.frank_kamenetsky_salnikov()
    fld = build_vector_field(net)
    x = find_equilibrium_in_class(fld, structure_report(net), np.array([0.5, 0.7]))
    np.testing.assert_allclose(x, [math.sqrt(2), 1 + math.sqrt(2) / 2], rtol=1e-12)


def test_newton_respects_class_target():
    net = library.ivanova(1, 2, 3)
    fld = build_vector_field(net)
    x = find_equilibrium_in_class(fld, structure_report(net), np.array([1.0, 1.0, 1.0]), target=6.0)
    assert abs(x.sum() - 6.0) < 1e-10
    assert np.linalg.norm(fld.evaluate(x)) < 1e-10
