# How often is there a gap? Draw random nonconvex instances that satisfy
# both Slater conditions and tally the verdicts.
from collections import Counter

from qc2qp.trials import run_trials

for n in (2, 3, 4):
    rep = run_trials(40, n, seed=1)
    cases = Counter(ln.detail for ln in rep.lines if ln.kind == "NoGap")
    print("n=%d  no gap %d  gap %d  errors %d" % (n, rep.no_gap_count, rep.gap_count, rep.error_count))
    print("      recovered by", dict(cases))
    print("      draws per accepted instance: %.1f" % (sum(ln.attempts for ln in rep.lines) / rep.total))
