import numpy as np
import pytest

from qc2qp.model import Qc2qpInstance
from qc2qp.sdp import kkt_report

EX51 = dict(Q0=[[2, -4], [-4, -2]], b0=[0, 0], Q1=[[4, -5], [-5, 2]], b1=[2, 0], c1=-1,
            Q2=[[0, 2], [2, 2]], b2=[0, 5], c2=-4)
EX52 = dict(Q0=[[-1, -2], [-2, 1]], b0=[-2, 0], Q1=[[3, 1], [1, -2]], b1=[3, 2], c1=-2,
            Q2=[[4, 5], [5, 1]], b2=[-1, 5], c2=4)

# purified solution printed for the gap example
X52_PRINTED = np.array([
    [1.0000000, 0.9982700, -1.2814553],
    [0.9982700, 2.2688396, -0.0999477],
    [-1.2814553, -0.0999477, 2.7352111],
])


@pytest.fixture
def ex51():
    return Qc2qpInstance(**EX51)


@pytest.fixture
def ex52():
    return Qc2qpInstance(**EX52)


def random_sym(rng, n, r=1.0):
    A = rng.uniform(-r, r, size=(n, n))
    return (A + A.T) / 2


def random_psd(rng, d, rank):
    V = rng.standard_normal((d, rank))
    return V @ V.T


def well_posed_instance(rng, n, r=5.0):
    """Random instance with a definite Q1 and z = 0 strictly feasible.

    Both Slater conditions hold by construction, whatever ``n`` is, while
    Q0 and Q2 stay indefinite in general.
    """
    Q0 = random_sym(rng, n, r)
    Q1 = random_sym(rng, n, r)
    Q1 = Q1 + (1.0 - np.linalg.eigvalsh(Q1)[0]) * np.eye(n)
    Q2 = random_sym(rng, n, r)
    return Qc2qpInstance(Q0, rng.uniform(-r, r, n), Q1, rng.uniform(-r, r, n),
                         -rng.uniform(1, r), Q2, rng.uniform(-r, r, n), -rng.uniform(1, r))


def cdt_instance(rng, n=2, r=5.0):
    """Ball constraint ``|z|^2 <= rho^2`` and a second quadratic through a strict interior point."""
    rho = rng.uniform(1.0, 3.0)
    Q0 = random_sym(rng, n, r)
    b0 = rng.uniform(-r, r, n)
    Q2 = random_sym(rng, n, r)
    Q2 = Q2 + (0.1 - np.linalg.eigvalsh(Q2)[0]) * np.eye(n)  # ellipsoid or cylinder-like
    b2 = rng.uniform(-r, r, n)
    z0 = rng.uniform(-0.5, 0.5, n) * rho
    c2 = -(z0 @ Q2 @ z0 + 2 * b2 @ z0) - rng.uniform(0.5, 2.0)
    return Qc2qpInstance(Q0, b0, np.eye(n), np.zeros(n), -rho * rho, Q2, b2, c2)

X51_PRINTED = np.array([
    [1.0000000, -0.7547192, -3.9916123],
    [-0.7547192, 0.5696011, 3.0125464],
    [-3.9916123, 3.0125464, 15.9329684],
])
Z51_PRINTED = np.array([
    [45.5612496, 0.3855596, 11.3413460],
    [0.3855596, 2.7711193, -0.4273607],
    [11.3413460, -0.4273607, 2.9220980],
])
Z52_PRINTED = np.array([
    [3.4958344, -1.4683240, 1.5841752],
    [-1.4683240, 0.6167270, -0.6653869],
    [1.5841752, -0.6653869, 0.7178861],
])


EPS1 = 1.49e-8


def assert_kkt(prog, sol, eps1=EPS1):
    r = kkt_report(prog, sol)
    tol = eps1 * r["scale"]
    assert r["min_eig_X"] >= -tol
    assert r["min_eig_Z"] >= -tol
    assert r["min_y_le"] >= -eps1
    assert r["dual_residual"] <= eps1 * r["cost_scale"]
    assert r["primal_residual"] <= eps1 * (1 + max(abs(c.rhs) for c in prog.constraints))
    assert r["complementarity_XZ"] <= tol
    assert r["complementarity_le"] <= tol
    assert sol.dual_objective <= sol.primal_objective + tol
    assert abs(sol.primal_objective - sol.dual_objective) <= eps1 * (1 + abs(sol.primal_objective))
