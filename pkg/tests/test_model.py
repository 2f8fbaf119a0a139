import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qc2qp.errors import DegenerateT
from qc2qp.model import (HomogeneousVector, Qc2qpInstance, dehomogenize, dehomogenized_instance,
                         evaluate_q, homogenize)
from qc2qp.symmat import inner_product

from conftest import random_sym


def zero_instance(n=2):
    Z = np.zeros((n, n))
    z = np.zeros(n)
    return Qc2qpInstance(Z, z, Z, z, 0.0, Z, z, 0.0)


def test_bordered_blocks(ex51, ex52):
    assert np.array_equal(homogenize(ex51).M1, [[-1, 2, 0], [2, 4, -5], [0, -5, 2]])
    assert np.array_equal(homogenize(ex52).M2, [[4, -1, 5], [-1, 4, 5], [5, 5, 1]])
    h = homogenize(ex51)
    assert h.M0[0, 0] == 0.0
    assert np.array_equal(h.I00, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    assert h.dim == 3 and h.n == 2


def test_zero_instance_homogenizes_to_zero():
    h = homogenize(zero_instance())
    for M in (h.M0, h.M1, h.M2):
        assert not M.any()


def test_evaluate_examples(ex51, ex52):
    assert evaluate_q(ex51, 0, [-0.7547192, -3.9916123]) == pytest.approx(-54.8271061, abs=1e-4)
    assert evaluate_q(ex52, 0, [0.5251114, -0.3446140]) == pytest.approx(-1.5335857, abs=1e-4)
    assert evaluate_q(ex52, 0, [0.0, 0.0]) == 0.0
    with pytest.raises(IndexError):
        evaluate_q(ex51, 3, [0.0, 0.0])
    with pytest.raises(ValueError):
        evaluate_q(ex51, 0, [0.0])


def test_dehomogenize_examples():
    z = dehomogenize(np.array([-1, 0.7547192, 3.9916123]), 1e-8)
    assert np.allclose(z, [-0.7547192, -3.9916123])
    assert np.array_equal(dehomogenize(HomogeneousVector(1.0, np.zeros(2))), [0.0, 0.0])
    with pytest.raises(DegenerateT):
        dehomogenize(np.array([1e-12, 1.0, 1.0]), 1e-8)


def test_validation():
    with pytest.raises(ValueError):
        Qc2qpInstance(np.eye(2), [0, 0], np.eye(3), [0, 0, 0], 0, np.eye(2), [0, 0], 0)
    with pytest.raises(ValueError):
        Qc2qpInstance(np.eye(2), [0], np.eye(2), [0, 0], 0, np.eye(2), [0, 0], 0)
    with pytest.raises(ValueError):
        Qc2qpInstance(np.eye(2), [0, 0], np.eye(2), [0, 0], np.inf, np.eye(2), [0, 0], 0)


def test_swapped_exchanges_constraints(ex52):
    s = ex52.swapped()
    assert np.array_equal(s.Q1, ex52.Q2) and s.c2 == ex52.c1
    assert s.swapped() == ex52


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_homogenization_consistency(n, seed):
    rng = np.random.default_rng(seed)
    inst = Qc2qpInstance(random_sym(rng, n, 5), rng.uniform(-5, 5, n), random_sym(rng, n, 5),
                         rng.uniform(-5, 5, n), rng.uniform(-5, 5), random_sym(rng, n, 5),
                         rng.uniform(-5, 5, n), rng.uniform(-5, 5))
    h = homogenize(inst)
    z = rng.uniform(-3, 3, n)
    x = np.concatenate([[1.0], z])
    for i in (0, 1, 2):
        v = evaluate_q(inst, i, z)
        w = inner_product(h.form(i), np.outer(x, x))
        assert v == pytest.approx(w, rel=1e-10, abs=1e-10)
    assert dehomogenized_instance(h) == inst
