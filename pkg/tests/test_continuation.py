import json
from fractions import Fraction as Q

import numpy as np
import pytest

from crnhopf import continuation as cont
from crnhopf import dynamics as dyn
from crnhopf import library
from crnhopf.polyfield import build_vector_field

F5 = build_vector_field(library.net5(2))
B_HOPF = Q(1, 8) - 4 * Q(1, 200)


def net6_b(b):
    return library.net6(2, Q(1, 200), Q(b).limit_denominator(10**12))


@pytest.fixture(scope="module")
def class_branch():
    start = dyn.find_limit_cycle(F5, (1, 1, 1), 3.0, seed=0.3)
    return cont.continue_cycles(cont.ClassLevelFamily(F5, (1, 1, 1)), start, 3.0, (2.0, 5.0), direction=1)


@pytest.fixture(scope="module")
def b_branches():
    f = build_vector_field(net6_b(Q(22, 200)))
    fr = dyn.class_frame(f, (1, 1, 1), 3.5)
    cys = dyn.scan_cycles(f, fr, np.geomspace(1e-2, 0.99 * fr.s_max, 30))
    fam = cont.ParameterFamily(net6_b, (1, 1, 1), 3.5, name="b")
    to_hopf = cont.continue_cycles(fam, cys[0], 22 / 200, (0.1, 0.13), direction=-1)
    through_fold = cont.continue_cycles(fam, cys[-1], 22 / 200, (0.1, 0.13), direction=1)
    return to_hopf, through_fold


def test_homogeneous_branch_is_a_scaling_family(class_branch):
    assert class_branch.termination == "range-end" and len(class_branch) > 5
    ref = class_branch.points[0]
    for bp in class_branch.points:
        lam = bp.param / ref.param
        if not 2.0 <= bp.param <= 5.0:
            continue
        assert abs(bp.cycle.amplitude / (lam * ref.cycle.amplitude) - 1) <= 1e-4
        assert abs(bp.cycle.period * lam**2 / ref.cycle.period - 1) <= 1e-4


def test_consecutive_points_are_close(class_branch):
    for a, b in zip(class_branch.points, class_branch.points[1:]):
        rel = np.abs(np.array([b.cycle.s - a.cycle.s, b.cycle.period - a.cycle.period]))
        assert np.all(rel <= cont.H_MAX * 2.5 * class_branch.scales[:2])


def test_reconvergence_from_cold_start(class_branch):
    for bp in class_branch.points[::4]:
        if not 2.0 <= bp.param <= 5.0:
            continue
        cold = dyn.find_limit_cycle(F5, (1, 1, 1), bp.param, seed=bp.cycle.anchor)
        assert abs(cold.s - bp.cycle.s) <= 1e-6 * max(1.0, abs(bp.cycle.s))
        assert abs(cold.period - bp.cycle.period) <= 1e-6 * bp.cycle.period


def test_fold_bracketing(b_branches):
    _, br = b_branches
    mus = br.multipliers
    straddles = [i for i in range(len(mus) - 1) if (mus[i] - 1) * (mus[i + 1] - 1) < 0]
    assert len(straddles) == len(br.folds) == 1
    fold = br.folds[0]
    assert abs(fold.index - straddles[0]) <= 1
    assert abs(fold.mu - 1) <= 1e-4
    assert 22 / 200 <= fold.param <= 25 / 200


def test_hopf_endpoint_square_root_law(b_branches):
    br, _ = b_branches
    assert br.termination == "hopf"
    assert abs(br.hopf_endpoint - float(B_HOPF)) <= 1e-6
    p = br.params
    amp = np.array([c.amplitude for c in br.cycles])
    near = amp < 0.1
    assert near.sum() >= 3
    slope = np.polyfit(np.log(np.abs(p[near] - float(B_HOPF))), np.log(amp[near] ** 2), 1)[0]
    assert abs(slope - 1.0) <= 0.1


def test_export_branch(tmp_path, b_branches):
    _, br = b_branches
    csv = cont.export_branch(br, tmp_path / "fold", gnuplot=True)
    rows = csv.read_text().splitlines()
    assert rows[0].startswith("b,period,multiplier,stability") and len(rows) == len(br) + 1
    manifest = json.loads((tmp_path / "fold.json").read_text())
    assert manifest["points"] == len(br) and len(manifest["folds"]) == 1
    assert (tmp_path / "fold.gp").exists()
    assert len(list((tmp_path / "fold_orbits").glob("*.csv"))) == len(br)
    assert len(list((tmp_path / "fold_orbits").glob("*.json"))) == len(br)


def test_start_outside_range():
    start = dyn.find_limit_cycle(F5, (1, 1, 1), 3.0, seed=0.3)
    with pytest.raises(ValueError):
        cont.continue_cycles(cont.ClassLevelFamily(F5, (1, 1, 1)), start, 3.0, (4.0, 5.0))
