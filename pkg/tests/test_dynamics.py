import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crnhopf import dynamics as dyn
from crnhopf import kernels, library
from crnhopf.polyfield import build_vector_field

F5 = build_vector_field(library.net5(2))


@pytest.fixture(scope="module")
def cycles():
    return dyn.find_limit_cycle(F5, (1, 1, 1), 3.0, seed=0.3), dyn.find_limit_cycle(F5, (1, 1, 1), 6.0, seed=0.6)


@pytest.mark.parametrize(
    "net, x0", [(library.net5(2), (2.0, 0.5, 0.5)), (library.net8(), (0.5, 0.5, 0.3)), (library.lotka(), (2.0, 1.0))]
)
def test_time_reversal(net, x0):
    # over long horizons the backward flow amplifies the forward error by
    # the contraction of the cycle, so the bound is checked at T = 1
    fld = build_vector_field(net)
    tol = 1e-10
    x0 = np.array(x0)
    fwd = dyn.integrate(fld, x0, 1.0, tol)
    back = dyn.integrate(fld.scaled(-1), fwd.final, 1.0, tol)
    assert np.abs(back.final - x0).max() <= 100 * tol * np.abs(x0).max()


def test_drift_is_monitored():
    traj = dyn.integrate(F5, [2.0, 0.5, 0.5], 50.0, 1e-12, samples=11)
    assert traj.drift.shape == (1,) and traj.max_drift <= 1e-11
    assert np.all(traj.states > 0)
    with pytest.raises(dyn.DynamicsError):
        dyn.integrate(F5, [2.0, 0.5, 0.5], 50.0, 1e-3, drift_bound=1e-30)


def test_invalid_start():
    with pytest.raises(ValueError):
        dyn.integrate(F5, [1.0, 0.0, 1.0], 1.0)


def test_cycle_invariants(cycles):
    cy, _ = cycles
    scale = float(np.abs(cy.anchor).max())
    assert cy.closure <= 1e-8 * scale
    near_one = [m for m in cy.multipliers if abs(m - 1) <= 1e-6]
    assert len(near_one) >= 2
    assert cy.stable and abs(cy.mu) < 1 - 1e-3


def test_homogeneous_class_scaling(cycles):
    c3, c6 = cycles
    lam = 2.0
    assert abs(np.linalg.norm(c6.orbit - c6.frame.x_eq, axis=1).max() / np.linalg.norm(c3.orbit - c3.frame.x_eq, axis=1).max() - lam) <= 1e-4 * lam
    assert abs(c6.period * lam**2 / c3.period - 1) <= 1e-4
    assert abs(c6.mu - c3.mu) <= 1e-4


@settings(max_examples=8)
@given(st.integers(1, 3), st.lists(st.floats(0.05, 5.0), min_size=3, max_size=3))
def test_permanence_floor(g, x0):
    fld = build_vector_field(library.net5(g))
    traj = dyn.integrate(fld, x0, 200.0, 1e-10, samples=4001)
    assert traj.states.min() > 1e-8


def test_cycle_seed_forms(cycles):
    cy, _ = cycles
    with pytest.raises(ValueError):
        dyn.find_limit_cycle(F5, (1, 1, 1), 3.0)
    again = dyn.find_limit_cycle(F5, (1, 1, 1), 3.0, seed=cy.anchor)
    assert abs(again.period - cy.period) < 1e-6 and abs(again.s - cy.s) < 1e-6


def test_floquet_and_export(tmp_path, cycles):
    cy, _ = cycles
    mult = dyn.floquet_multipliers(F5, cy)
    assert np.isclose(sorted(np.abs(mult))[0], abs(cy.mu), rtol=1e-6)
    path = dyn.export_cycle(cy, tmp_path / "cycle.csv")
    rows = path.read_text().splitlines()
    assert rows[0].split(",")[0] == "tau" and len(rows) > 10


def test_kernels_agree():
    names = kernels.available()
    if len(names) < 2:
        pytest.skip("compiled kernel not built")
    outs = []
    for n in names:
        k = kernels.get(n)
        outs.append(k.integrate(F5.E, F5.C, [2.0, 0.5, 0.5], 20.0, rtol=1e-12, atol=1e-14, normal=[1.0, 0, 0],
                                offset=1.0, direction=1, max_crossings=3, t_min=1e-6))
    (s1, t1, y1, *_), (s2, t2, y2, *_) = outs
    assert s1 == s2 and abs(t1 - t2) < 1e-10
    np.testing.assert_allclose(y1, y2, rtol=1e-10)
    np.testing.assert_allclose(outs[0][5], outs[1][5], rtol=1e-10)


def test_pure_fallback_selected_by_environment():
    env = dict(os.environ, CRNHOPF_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from crnhopf import kernels; print(kernels.KERNEL)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_kernel():
    with pytest.raises(ValueError):
        kernels.get("fortran")
