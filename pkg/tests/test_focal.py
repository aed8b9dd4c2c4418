import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crnhopf import dynamics as dyn
from crnhopf import focal, library
from crnhopf.equilibria import toric_equilibrium_curve
from crnhopf.polyfield import build_vector_field

coef = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))


def rotation_jet(alpha, lam=1, kind="exact"):
    """u' = -v + alpha u r^2, v' = u + alpha v r^2, so r' = alpha r^3."""
    u = {(0, 1): -lam, (3, 0): lam * alpha, (1, 2): lam * alpha}
    v = {(1, 0): lam, (2, 1): lam * alpha, (0, 3): lam * alpha}
    return focal.jet_from_polys([u, v], kind)


@st.composite
def center_jets(draw, max_degree=3):
    w = draw(st.builds(Fraction, st.integers(1, 4), st.integers(1, 3)))
    comps = [{(0, 1): -w}, {(1, 0): w}]
    for c in comps:
        for d in range(2, max_degree + 1):
            for i in range(d + 1):
                v = draw(coef)
                if v:
                    c[(i, d - i)] = c.get((i, d - i), 0) + v
    return comps


def _mul(p, q):
    out = {}
    for (a, b), x in p.items():
        for (c, d), y in q.items():
            out[(a + c, b + d)] = out.get((a + c, b + d), 0) + x * y
    return out


def linear_change(comps, A):
    """Field in w-coordinates with u = A w."""
    (a, b), (c, d) = A
    lin_u, lin_v = {(1, 0): a, (0, 1): b}, {(1, 0): c, (0, 1): d}
    subst = []
    for comp in comps:
        out = {}
        for (i, j), x in comp.items():
            term = {(0, 0): x}
            for _ in range(i):
                term = _mul(term, lin_u)
            for _ in range(j):
                term = _mul(term, lin_v)
            for k, y in term.items():
                out[k] = out.get(k, 0) + y
        subst.append(out)
    det = a * d - b * c
    inv = ((d / det, -b / det), (-c / det, a / det))
    res = []
    for r in range(2):
        out = {}
        for s in range(2):
            for k, y in subst[s].items():
                out[k] = out.get(k, 0) + inv[r][s] * y
        res.append({k: v for k, v in out.items() if v != 0})
    return res


def test_oracle_cubic_normal_form():
    for alpha in (Fraction(1), Fraction(-2), Fraction(3, 7)):
        vals = focal.focal_values(rotation_jet(alpha), 3)
        assert vals[0] == 4 * alpha
        assert vals[1:] == [0, 0]
    assert focal.focal_values(rotation_jet(Fraction(0)), 3) == [0, 0, 0]


@given(center_jets(), st.builds(Fraction, st.integers(1, 20), st.integers(1, 7)))
def test_time_scaling_covariance(comps, lam):
    base = focal.focal_values(focal.jet_from_polys(comps), 3)
    scaled = focal.focal_values(focal.jet_from_polys([{k: lam * v for k, v in c.items()} for c in comps]), 3)
    # V is normalised by the quadratic integral of the linear part, which
    # scales with time too, so L_k picks up lam^(1-k); signs are unchanged
    assert scaled == [lam ** (1 - k) * v for k, v in enumerate(base, start=1)]


@settings(max_examples=100)
@given(center_jets())
def test_exact_and_float_signs_agree(comps):
    exact = focal.focal_values(focal.jet_from_polys(comps, "exact"), 1)[0]
    flt = focal.focal_values(focal.jet_from_polys(comps, "float"), 1)[0]
    if exact == 0:
        assert abs(flt) < 1e-9
    else:
        assert np.sign(float(exact)) == np.sign(flt)
        assert abs(flt - float(exact)) <= 1e-9 * max(1.0, abs(float(exact)))


@given(center_jets(), st.tuples(*[st.integers(-3, 3)] * 4).filter(lambda t: t[0] * t[3] - t[1] * t[2] != 0))
def test_sign_invariant_under_linear_coordinates(comps, A):
    A = ((Fraction(A[0]), Fraction(A[1])), (Fraction(A[2]), Fraction(A[3])))
    l1 = focal.focal_values(focal.jet_from_polys(comps), 1)[0]
    moved = linear_change(comps, A)
    l1m = focal.focal_values(focal.jet_from_polys(moved), 1)[0]
    assert (l1 > 0) == (l1m > 0) and (l1 == 0) == (l1m == 0)


def test_criticality_follows_first_nonzero_value():
    fld = build_vector_field(library.net5(1, 8, Fraction(1, 8), 1, 1))
    cur = toric_equilibrium_curve(fld)
    hp = focal.hopf_classify(fld, cur, Fraction(8))
    assert hp.kind == "exact" and hp.focal[0] < 0 and hp.criticality == "supercritical"
    assert hp.to_json()["normalization"] == focal.NORMALIZATION


def test_exact_and_mp_reductions_agree():
    fld = build_vector_field(library.net5(1, 8, Fraction(1, 8), 1, 1))
    ex = focal.focal_values(focal.planar_reduction(fld, (8, 1, 1), kind="exact"), 1)[0]
    mp = focal.focal_values(focal.planar_reduction(fld, (8.0, 1.0, 1.0), kind="mp"), 1)[0]
    assert abs(float(mp) - float(ex)) < 1e-20 * max(1, abs(float(ex))) + 1e-25


def test_not_a_hopf_point():
    fld = build_vector_field(library.net5(2))
    cur = toric_equilibrium_curve(fld)
    with pytest.raises(focal.NotHopfCandidate):
        focal.planar_reduction(fld, cur.point(Fraction(1)), kind="exact")


def _returns(fld, d, level, periods=10):
    """Section coordinates of successive returns from distance 1e-2."""
    fr = dyn.class_frame(fld, d, level)
    s = [1e-2 / float(np.linalg.norm(fr.w))]
    t = 0.0
    while t < periods * 2 * math.pi / fr.omega:
        D, T = dyn.displacement(fld, fr, s[-1], tol=1e-13)
        s.append(s[-1] + D)
        t += T
    return np.array(s)


def test_supercritical_point_spirals_inward():
    fld = build_vector_field(library.net5(1, 8, Fraction(1, 8), 1, 1))
    s = _returns(fld, (1, 1, 1), 10.0)
    assert len(s) >= 10 and np.all(np.diff(s) < 0)


def test_subcritical_point_spirals_outward():
    b = Fraction(11, 100)
    net = library.net6(2, (Fraction(1, 8) - b) / 4, b)
    fld = build_vector_field(net)
    cur = toric_equilibrium_curve(fld)
    assert focal.hopf_classify(fld, cur, Fraction(1)).criticality == "subcritical"
    s = _returns(fld, (1, 1, 1), 3.0)
    assert len(s) >= 10 and np.all(np.diff(s) > 0)


def test_sign_map_rows_and_csv():
    fam = library.two_parameter_family(library.net8())[1]
    rows = focal.focal_sign_map(fam, (Fraction(1, 400), Fraction(1, 100)), (Fraction(1, 400), Fraction(1, 50)), (2, 2))
    csv = focal.sign_map_csv(rows)
    assert csv.splitlines()[0] == "a,b,t1,signL1_1,t2,signL1_2"
    assert len(csv.splitlines()) == 5
    assert all(len(r.roots) == len(r.signs) for r in rows)


def test_hopf_locus_in_homogeneous_family():
    fam = library.two_parameter_family(library.net6(2))[1]
    rows = focal.hopf_locus_sign_map(fam, (Fraction(1, 400), Fraction(1, 40)), (Fraction(1, 400), Fraction(1, 8)), (3, 12))
    b_star = (1 + math.sqrt(141)) / 160
    for r in rows:
        if r.roots:
            assert abs(4 * float(r.a) + float(r.b) - 0.125) < 1e-10
            assert r.signs[0] == (1 if float(r.b) > b_star else -1)
