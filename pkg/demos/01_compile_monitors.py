"""Compile LTL formulas into three-valued monitors and inspect them.

A monitor reads the trace one letter at a time and reports, after every
finite prefix, whether the property is already guaranteed (top), already
lost (bot), or still open (inc).
"""

from ltlshield import build_monitor, monitor_to_doc, monitor_to_dot, run_word

AP = ["t", "f"]
m = build_monitor("(!t) U (t & f)", AP)

print(f"monitor for (!t) U (t & f): {len(m.states)} states")
for q in m.states:
    print(f"  {q}: output={m.output[q].value}"
          + ("  <- initial" if q == m.initial else ""))

print("\ntransition table:")
for q in m.states:
    for sigma in m.alphabet:
        print(f"  d({q}, {{{','.join(sorted(sigma)) or ''}}}) = "
              f"{m.delta[(q, sigma)]}")

word = [frozenset(), frozenset({"f"}), frozenset({"t", "f"})]
print(f"\nverdict after {[sorted(s) for s in word]}: "
      f"{run_word(m, word).value}")

print("\nthe JSON document round-trips losslessly:")
print(monitor_to_doc(m))

with open("/tmp/crossing_monitor.dot", "w") as fh:
    fh.write(monitor_to_dot(m))
print("wrote /tmp/crossing_monitor.dot (render with graphviz)")
