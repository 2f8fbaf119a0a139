import numpy as np
import pytest

from qc2qp.errors import SolverError
from qc2qp.model import Qc2qpInstance, homogenize
from qc2qp.sdp import (EQ, LE, ConeProgram, Constraint, SolverConfig, build_relaxation,
                       check_dual_slater, check_primal_slater, solve)

from conftest import assert_kkt, well_posed_instance


def test_relaxation_structure(ex51):
    prog = build_relaxation(homogenize(ex51))
    assert prog.psd_dim == 3
    senses = [(c.sense, c.rhs) for c in prog.constraints]
    assert senses == [(LE, 0.0), (LE, 0.0), (EQ, 1.0)]
    h = homogenize(ex51)
    assert np.array_equal(prog.cost, h.M0)
    assert np.array_equal(prog.constraints[0].coefficient, h.M1)


def test_zero_instance_relaxation_admits_i00():
    Z = np.zeros((2, 2))
    h = homogenize(Qc2qpInstance(Z, [0, 0], Z, [0, 0], 0, Z, [0, 0], 0))
    prog = build_relaxation(h)
    assert not prog.cost.any()
    X = h.I00
    assert all(np.sum(c.coefficient * X) <= c.rhs if c.sense == LE else np.sum(c.coefficient * X) == c.rhs
               for c in prog.constraints)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        ConeProgram(np.eye(3), (Constraint(np.eye(2), 1.0, EQ),))


@pytest.mark.parametrize("kw", [dict(eps1=0.0), dict(step_fraction=1.0), dict(max_iterations=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_solve_first_example(ex51):
    prog = build_relaxation(homogenize(ex51))
    sol = solve(prog)
    assert sol.primal_objective == pytest.approx(-54.8271062, abs=1e-4)
    assert sol.y1 == pytest.approx(0.1927798, abs=1e-4)
    assert sol.y2 == pytest.approx(2.2682692, abs=1e-4)
    assert sol.y0 == pytest.approx(-54.8271062, abs=1e-4)
    assert_kkt(prog, sol)


def test_solve_second_example(ex52):
    prog = build_relaxation(homogenize(ex52))
    sol = solve(prog)
    assert sol.primal_objective == pytest.approx(-3.1269177, abs=1e-4)
    assert sol.y1 == pytest.approx(0.2495621, abs=1e-4)
    assert sol.y2 == pytest.approx(0.2170102, abs=1e-4)
    assert_kkt(prog, sol)


def test_trace_pinned_program():
    I00 = np.diag([1.0, 0.0, 0.0])
    prog = ConeProgram(np.eye(3), (Constraint(-I00, 0.0, LE), Constraint(-I00, 0.0, LE),
                                   Constraint(I00, 1.0, EQ)))
    sol = solve(prog)
    assert sol.primal_objective == pytest.approx(1.0, abs=1e-7)
    assert np.allclose(sol.X, I00, atol=1e-7)


def test_deterministic_iterates(ex52):
    prog = build_relaxation(homogenize(ex52))
    a, b = solve(prog), solve(prog)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y) and a.iterations == b.iterations


def test_infeasible_relaxation_fails_loudly():
    # z'z + 1 <= 0 has no solution and neither has its relaxation
    I2 = np.eye(2)
    inst = Qc2qpInstance(I2, [0, 0], I2, [0, 0], 1.0, I2, [0, 0], -1.0)
    with pytest.raises(SolverError):
        solve(build_relaxation(homogenize(inst)))


def test_primal_slater_examples(ex51, ex52):
    assert check_primal_slater(homogenize(ex51))
    assert check_primal_slater(homogenize(ex52))
    I2 = np.eye(2)
    empty = Qc2qpInstance(I2, [0, 0], I2, [0, 0], 1.0, I2, [0, 0], -1.0)
    chk = check_primal_slater(homogenize(empty))
    assert not chk and chk.margin < 0


def test_primal_slater_witness_is_strict(ex52):
    h = homogenize(ex52)
    chk = check_primal_slater(h)
    (X,) = chk.witness
    assert np.linalg.eigvalsh(X)[0] > 0
    assert X[0, 0] == pytest.approx(1.0)
    assert np.sum(h.M1 * X) < 0 and np.sum(h.M2 * X) < 0


def _strict_dual(h, witness):
    y0, y1, y2 = witness
    S = h.M0 - y0 * h.I00 + y1 * h.M1 + y2 * h.M2
    return y1 > 0 and y2 > 0 and np.linalg.eigvalsh(S)[0] > 0


def test_dual_slater_examples(ex51, ex52):
    for inst in (ex51, ex52):
        h = homogenize(inst)
        chk = check_dual_slater(h)
        assert chk and _strict_dual(h, chk.witness)
    D = np.diag([1.0, -1.0])
    bad = Qc2qpInstance(D, [0, 0], D, [0, 0], 0, D, [0, 0], 0)
    chk = check_dual_slater(homogenize(bad))
    assert not chk and chk.witness is None and "definite" in chk.diagnostics


def test_dual_slater_convex_objective():
    rng = np.random.default_rng(1)
    for _ in range(5):
        A, B = rng.standard_normal((2, 2, 2))
        inst = Qc2qpInstance(np.eye(2), [0, 0], A + A.T, [0, 0], 0, B + B.T, [0, 0], 0)
        h = homogenize(inst)
        chk = check_dual_slater(h)
        assert chk and _strict_dual(h, chk.witness)


def test_kkt_on_random_suite():
    rng = np.random.default_rng(11)
    for k in range(12):
        inst = well_posed_instance(rng, 2 + k % 5)
        prog = build_relaxation(homogenize(inst))
        assert_kkt(prog, solve(prog))
