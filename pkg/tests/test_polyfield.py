from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crnhopf import library
from crnhopf.network import conservation_basis
from crnhopf.polyfield import build_vector_field, poly_add, poly_eval, poly_mul, poly_scale, verify_conservation

from conftest import networks

positive_rationals = st.builds(Fraction, st.integers(1, 30), st.integers(1, 10))


@given(networks())
def test_monomials_are_reactant_complexes(net):
    fld = build_vector_field(net)
    reactants = {r.reactant for r in net.reactions}
    for comp in fld.components:
        assert set(comp) <= reactants


@given(networks())
def test_coefficients_match_edge_sum(net):
    fld = build_vector_field(net)
    for k in range(net.n):
        for y in {r.reactant for r in net.reactions}:
            want = sum((r.rate * (r.product[k] - r.reactant[k]) for r in net.reactions if r.reactant == y), Fraction(0))
            assert fld.components[k].get(y, 0) == want


@given(networks(), st.data())
def test_exact_evaluation(net, data):
    fld = build_vector_field(net)
    x = [data.draw(positive_rationals) for _ in range(net.n)]
    vals = fld.evaluate(x)
    assert all(isinstance(v, (int, Fraction)) for v in vals)
    assert np.allclose([float(v) for v in vals], fld.evaluate(np.array([float(v) for v in x])), rtol=1e-12, atol=1e-12)


@given(networks(), st.data())
def test_jacobian_is_exact_derivative(net, data):
    fld = build_vector_field(net)
    J = fld.jacobian()
    x = [data.draw(positive_rationals) for _ in range(net.n)]
    h = Fraction(1, 10**6)
    for i in range(net.n):
        xp = list(x)
        xp[i] += h
        xm = list(x)
        xm[i] -= h
        for k in range(net.n):
            fd = (fld.components[k] and (poly_eval(fld.components[k], xp) - poly_eval(fld.components[k], xm)) / (2 * h)) or 0
            # central differences are exact up to the h^2 Taylor term
            assert abs(float(fd - poly_eval(J[k, i], x))) <= 1e-6 * (1 + abs(float(fd)))


@given(networks())
def test_left_kernel_identity(net):
    fld = build_vector_field(net)
    J = fld.jacobian()
    for d in conservation_basis(net):
        assert verify_conservation(fld, d)
        for i in range(net.n):
            assert poly_add(*(poly_scale(J[k, i], d[k]) for k in range(net.n))) == {}


def test_jacobian_matches_numeric():
    fld = build_vector_field(library.net8())
    x = np.array([0.3, 1.7, 0.9])
    np.testing.assert_allclose(fld.jacobian_at(x), fld.jacobian().evaluate(x), rtol=1e-13)


@given(positive_rationals, st.tuples(positive_rationals, positive_rationals, positive_rationals))
def test_homogeneous_degree_three(lam, x):
    fld = build_vector_field(library.net5(2))
    fx = fld.evaluate(list(x))
    flx = fld.evaluate([lam * v for v in x])
    assert flx == [lam**3 * v for v in fx]


def test_poly_mul_and_scale():
    p = {(1, 0): Fraction(2), (0, 1): Fraction(1)}
    q = poly_mul(p, p)
    assert q == {(2, 0): 4, (1, 1): 4, (0, 2): 1}
    assert poly_scale(q, 0) == {}


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        build_vector_field(library.lotka()).evaluate([1, 2, 3])


def _central_difference_order(fld, x, v):
    """Observed order of the directional central difference error, exact arithmetic."""
    J = fld.jacobian()
    want = [sum(poly_eval(J[k, i], x) * v[i] for i in range(fld.n)) for k in range(fld.n)]
    errs = []
    for h in (Fraction(1, 100), Fraction(1, 200)):
        fp = fld.evaluate([a + h * b for a, b in zip(x, v)])
        fm = fld.evaluate([a - h * b for a, b in zip(x, v)])
        errs.append(max(abs((a - b) / (2 * h) - w) for a, b, w in zip(fp, fm, want)))
    if errs[1] == 0:
        return None  # exact already: no third derivative along v
    return float(np.log2(float(errs[0] / errs[1])))


def test_central_difference_order_on_random_fields():
    from crnhopf.acceptance import _random_network

    rng = np.random.default_rng(2024)
    orders = []
    for _ in range(1000):
        fld = build_vector_field(_random_network(rng, int(rng.integers(2, 5))))
        x = [Fraction(int(a), 8) for a in rng.integers(2, 24, size=fld.n)]
        v = [Fraction(int(a), 4) for a in rng.integers(-4, 5, size=fld.n)]
        o = _central_difference_order(fld, x, v)
        if o is not None:
            orders.append(o)
        if len(orders) == 100:
            break
    assert len(orders) == 100 and min(orders) >= 1.9
