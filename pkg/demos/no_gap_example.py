# A two-variable problem with an indefinite objective where the relaxation
# is tight: the solver returns a rank-one X and the global minimizer can be
# read off its first column.
import numpy as np

from qc2qp import bundled, evaluate_q, homogenize, run_gap_test

inst = bundled("ex51")
print("Q0 eigenvalues:", np.linalg.eigvalsh(inst.Q0))  # one of each sign

v = run_gap_test(inst)
print("verdict:", v.kind)
print("relaxation value: %.7f" % v.relaxation_value)
print("X* =")
print(np.round(v.pair.Xstar, 7))

s = v.solution
print("recovered by", s.case_label, "z =", s.z)
print("q0(z) = %.7f   q1(z) = %.1e   q2(z) = %.1e" % (s.objective, s.q1_value, s.q2_value))

# both constraints are active, which is what the multipliers say as well
print("y1, y2 =", v.pair.y1, v.pair.y2)

# x = (1, z) reproduces X* up to purification noise
x = np.concatenate([[1.0], s.z])
print("max |X* - x x'| =", np.abs(v.pair.Xstar - np.outer(x, x)).max())

# the homogenized forms give the same values as the original quadratics
h = homogenize(inst)
print(x @ h.M0 @ x, evaluate_q(inst, 0, s.z))
