import numpy as np
import pytest

from qc2qp.errors import AssumptionViolated, DegenerateT, NoFeasiblePointInBox
from qc2qp.gaptest import PurifiedPair, evaluate_property_I_plus
from qc2qp.model import HomogenizedInstance, Qc2qpInstance, dehomogenized_instance, evaluate_q, homogenize
from qc2qp.recovery import brute_force_oracle, global_oracle, lagrangian_box, recover, run_gap_test
from qc2qp.trials import random_instances

I2, I3, O2 = np.eye(2), np.eye(3), np.zeros((2, 2))


def check_no_gap(v, inst, tol=1e-5):
    s = v.solution
    scale = 1 + abs(s.objective)
    assert s.q1_value <= 1e-6 * scale and s.q2_value <= 1e-6 * scale
    assert abs(s.objective - v.relaxation_value) <= tol * scale
    assert s.objective == pytest.approx(evaluate_q(inst, 0, s.z))


def test_first_example(ex51):
    v = run_gap_test(ex51)
    assert v.kind == "NoGap" and v.no_gap
    assert v.relaxation_value == pytest.approx(-54.8271062, abs=1e-4)
    assert v.solution.case_label == "Rank1Direct"
    assert np.allclose(v.solution.z, [-0.7547192, -3.9916123], atol=1e-4)
    assert v.solution.objective == pytest.approx(-54.8271061, abs=1e-4)
    assert v.certificate is None
    check_no_gap(v, ex51)


def test_second_example(ex52):
    v = run_gap_test(ex52)
    assert v.kind == "Gap" and v.solution is None
    assert v.relaxation_value == pytest.approx(-3.1269177, abs=1e-4)
    assert all(v.report.recompute_flags())
    assert v.certificate.nullspace_dim_of_AV == 0
    assert v.reports == {"property_I": True, "property_I_plus": True}


def test_convex_instance_recovers_origin():
    inst = Qc2qpInstance(I2, [0, 0], I2, [0, 0], -1, I2, [0, 0], -1)
    v = run_gap_test(inst)
    assert v.kind == "NoGap" and v.solution.case_label == "Rank1Direct"
    assert np.allclose(v.solution.z, 0, atol=1e-6)
    assert v.solution.objective == pytest.approx(0, abs=1e-8)


def test_assumption_failures():
    D = np.diag([1.0, -1.0])
    with pytest.raises(AssumptionViolated) as e:
        run_gap_test(Qc2qpInstance(D, [0, 0], D, [0, 0], -1, D, [0, 0], -1))
    assert e.value.which == "dual"
    with pytest.raises(AssumptionViolated) as e:
        run_gap_test(Qc2qpInstance(I2, [0, 0], I2, [0, 0], 1, I2, [0, 0], -1))
    assert e.value.which == "primal" and e.value.diagnostics


# instances reaching each branch of the recovery
CASES = {
    # second constraint never active: y2 = 0, objective flat on the circle
    "Case1": Qc2qpInstance(-I2, [0, 0], I2, [0, 0], -1, O2, [0.5, 0], -10),
    # nothing active, objective constant: y1 = y2 = 0
    "Case1-flat": Qc2qpInstance(O2, [0, 0], I2, [0, 0], -1, O2, [0.5, 0], -10),
    # the same sphere twice in three variables: rank(X) = 3
    "Case2": Qc2qpInstance(-I3, [0, 0, 0], I3, [0, 0, 0], -1, 2 * I3, [0, 0, 0], -2),
    # the same circle twice with a one-directional objective: rank(X) = 2
    "Case3": Qc2qpInstance(np.diag([-1.0, 0.0]), [0, 0], I2, [0, 0], -1, 2 * I2, [0, 0], -2),
}


@pytest.mark.parametrize("name", list(CASES))
@pytest.mark.parametrize("swap", [False, True])
def test_recovery_branches(name, swap):
    inst = CASES[name].swapped() if swap else CASES[name]
    v = run_gap_test(inst)
    assert v.kind == "NoGap"
    assert v.solution.case_label == name.split("-")[0]
    check_no_gap(v, inst)


def _synthetic(M1, M2, X, Z, y1=1.0, y2=1.0):
    d = len(X)
    I00 = np.zeros((d, d))
    I00[0, 0] = 1
    h = HomogenizedInstance(np.zeros((d, d)), np.asarray(M1, float), np.asarray(M2, float), I00)
    pair = PurifiedPair(np.asarray(X, float), np.asarray(Z, float), 0.0, y1, y2, 1.49e-8, 1e-5)
    return dehomogenized_instance(h), h, pair


def test_case4_common_null_vector():
    M1 = np.diag([1.0, -1.0, 0.0])
    # every common isotropic vector of these two forms has t != 0
    M2 = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 1]], float)
    inst, h, pair = _synthetic(M1, M2, np.diag([1.0, 1.0, 0.0]), np.zeros((3, 3)))
    rep = evaluate_property_I_plus(pair, h)
    assert rep.cond_I1 and not rep.cond_I2 and rep.cond_I3
    s = recover(inst, h, pair, rep)
    assert s.case_label == "Case4"
    x = s.witness_vector.as_array()
    assert abs(x @ M1 @ x) < 1e-5 and abs(x @ M2 @ x) < 1e-5
    assert abs(s.q1_value) < 1e-5 and abs(s.q2_value) < 1e-5


def test_case5_vanishing_cross_term():
    x1, x2 = np.array([1.0, 1.0, 0.0]), np.array([1.0, 1.0, 1.0])
    X = np.outer(x1, x1) + np.outer(x2, x2)
    w = np.array([1.0, -1.0, 0.0])
    M1 = np.diag([1.0, -1.0, 0.0])
    M2 = np.diag([1.0, 1.0, -4.0])
    inst, h, pair = _synthetic(M1, M2, X, np.outer(w, w))
    rep = evaluate_property_I_plus(pair, h)
    assert rep.property_I and not rep.cond_4_cross
    s = recover(inst, h, pair, rep)
    assert s.case_label == "Case5"
    assert abs(s.q1_value) < 1e-8 and abs(s.q2_value) < 1e-8


def test_degenerate_t_is_reported():
    inst, h, pair = _synthetic(np.zeros((3, 3)), np.zeros((3, 3)), np.diag([0.0, 1.0, 1.0]),
                               np.diag([1.0, 0.0, 0.0]), y1=0.0, y2=0.0)
    rep = evaluate_property_I_plus(pair, h)
    with pytest.raises(DegenerateT):
        recover(inst, h, pair, rep)


def test_recover_rejects_gap_pairs(ex52):
    v = run_gap_test(ex52)
    with pytest.raises(ValueError):
        recover(ex52, homogenize(ex52), v.pair, v.report)


def test_oracle_first_example(ex51):
    z, val = brute_force_oracle(ex51, (-10, 10), 1001)
    assert val == pytest.approx(-54.8271061, abs=1e-3)
    assert np.allclose(z, [-0.7547192, -3.9916123], atol=1e-2)


def test_oracle_errors(ex51):
    with pytest.raises(NoFeasiblePointInBox):
        brute_force_oracle(ex51, [[50, 60], [50, 60]], 101)
    with pytest.raises(ValueError):
        brute_force_oracle(ex51, [[1, 1], [0, 2]], 101)
    three = Qc2qpInstance(I3, [0, 0, 0], I3, [0, 0, 0], -1, I3, [0, 0, 0], -1)
    with pytest.raises(ValueError):
        brute_force_oracle(three)


def test_lagrangian_box_contains_minimizer(ex52):
    v = run_gap_test(ex52)
    _, y1, y2 = v.slater[1].witness
    box = lagrangian_box(ex52, y1, y2, -1.5)
    z = np.array([0.5251114, -0.3446140])
    assert np.all(box[:, 0] <= z) and np.all(z <= box[:, 1])
    zg, val = global_oracle(ex52, v.slater[1].witness, 401)
    assert val == pytest.approx(-1.5335857, abs=1e-3)


def test_random_suite_properties():
    for inst, _ in random_instances(15, 2, 99):
        v = run_gap_test(inst)
        _, val = global_oracle(inst, v.slater[1].witness, 401)
        scale = 1 + abs(v.relaxation_value)
        assert v.relaxation_value <= val + 1e-3
        if v.no_gap:
            check_no_gap(v, inst)
            assert abs(val - v.relaxation_value) <= 1e-3 * scale
        else:
            assert val - v.relaxation_value > 1e-3 * scale
        assert run_gap_test(inst.swapped()).kind == v.kind
