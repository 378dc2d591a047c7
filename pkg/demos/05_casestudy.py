"""The full case study: a driver who turns unsafe mid-run.

The scripted driver floors it for three ticks (verified: the lookahead
shows a fast crossing), then proposes coasting past the landmark, which
cannot be verified because the reach tube crosses too slowly.  The shield
answers the fault by playing the memorized accelerating plan, the car
passes the landmark above the speed threshold, and the backup brakes it to
a stop.  The same inputs without the shield cross slowly and trap the
monitor in the bad state.
"""

from ltlshield import check_trace, simulate
from ltlshield.sim import delorean_scenario

sc = delorean_scenario("faulty-late")

tr = simulate(sc, seed=7, ticks=60)
print("shielded run:")
for r in tr.records[:14]:
    print(f"  tick {r.tick:2d}  x={r.x[0]:5.2f} v={r.x[1]:5.2f} "
          f"q={r.q} letter={{{','.join(r.letter)}}} {r.verdict}")
s = tr.summary
print(f"  -> crossing at tick {s.crossing_tick} with v={s.crossing_speed:.2f}"
      f" (>= 2 required); final verdict {check_trace(tr, sc.monitor()).value}")

tr = simulate(sc, seed=7, ticks=60, shield=False)
s = tr.summary
print("\nsame driver, shield bypassed:")
print(f"  crossing at tick {s.crossing_tick} with v={s.crossing_speed:.2f}; "
      f"bad-prefix trap reached: {s.bot_reached}")
