"""The monitor's verdicts against direct LTL semantics on lasso words.

The oracle evaluates ultimately periodic words prefix . cycle^w by a
fixpoint over their finitely many positions; the monitor never sees it.
The two agree: a top verdict means every lasso extension satisfies the
formula, a bot verdict means none does.
"""

from itertools import product

from ltlshield import build_monitor, lasso_satisfies, parse_formula
from ltlshield.formula import letters
from ltlshield.monitor import Verdict

AP = ["a"]
SIGMA = letters(AP)
f = parse_formula("G !a | X a", AP)
m = build_monitor(f, AP)

for word in [[], [SIGMA[0]], [SIGMA[0], SIGMA[1]], [SIGMA[1], SIGMA[0]]]:
    v = m.run(word)
    shown = [sorted(s) for s in word]
    print(f"verdict of {shown}: {v.value}")
    if v is Verdict.INC:
        continue
    for u_len, c_len in product(range(3), range(1, 3)):
        for u in product(SIGMA, repeat=u_len):
            for c in product(SIGMA, repeat=c_len):
                sat = lasso_satisfies(f, word + list(u), list(c))
                assert sat == (v is Verdict.TOP), (word, u, c)
    print("  ... confirmed on every bounded lasso extension")
