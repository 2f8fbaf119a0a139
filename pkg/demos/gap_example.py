# A problem whose relaxation is strictly below the true minimum. The test
# finds a rank-two X* whose balanced decomposition has the sign pattern
# that rules out any rank-one optimal X, and a grid search confirms the gap.
import sys

import numpy as np

from qc2qp import brute_force_oracle, bundled, run_gap_test

inst = bundled("ex52")
v = run_gap_test(inst)
m = v.report.measured
print("verdict:", v.kind, "  relaxation %.7f" % v.relaxation_value)
print("rank X* =", m["rank_X"], "  rank Z* =", m["rank_Z"])
print("M1 values of x1, x2:", m["m1_values"])
print("M2 values of x1, x2:", m["m2_values"])
print("M1 cross term:", m["m1_cross"])

# each x_i still dehomogenizes to a point, just not an optimal one
zhat = [x[1:] / x[0] for x in v.report.decomposition.vectors]
for k, z in enumerate(zhat, 1):
    print("zhat%d =" % k, z)

print("certificate determinant %.4f" % v.certificate.determinant)

z, val = brute_force_oracle(inst, (-10, 10), 1001)
print("grid minimum %.7f at %s" % (val, z))
print("gap %.4f" % (val - v.relaxation_value))

if "--plot" in sys.argv:
    import matplotlib.pyplot as plt

    g = np.linspace(-8, 4, 400)
    X, Y = np.meshgrid(g, g)
    P = np.stack([X, Y], -1)

    def q(i):
        Q, b, c = inst.quadratic(i)
        return np.einsum("...i,ij,...j->...", P, Q, P) + 2 * P @ b + c

    feas = (q(1) <= 0) & (q(2) <= 0)
    plt.contour(X, Y, q(0), 30, linewidths=0.6)
    plt.contourf(X, Y, feas, levels=[0.5, 1.5], alpha=0.3)
    plt.plot(*z, "r*", label="global minimizer")
    for k, zz in enumerate(zhat, 1):
        plt.plot(*zz, "ko")
        plt.annotate("zhat%d" % k, zz)
    plt.legend()
    plt.savefig("gap_example.png", dpi=120)
    print("saved gap_example.png")
