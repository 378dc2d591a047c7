"""Grid-check the high assurance region under the braking backup law.

The shipped triangle is controlled invariant: one backup step from any
covered cell lands back inside.  Inflating the intercept admits states
from which braking still crosses the landmark too slowly, and the checker
returns those cells as witnesses.
"""

from ltlshield import GuardedRegion, validate_high_assurance
from ltlshield.geometry import Polyhedron
from ltlshield.sim import delorean_scenario

sc = delorean_scenario("safe")
m = sc.monitor()

report = validate_high_assurance(sc.sb(), sc.backup, sc.dynamics,
                                 sc.label_map, m, cell=0.05, frame=sc.frame)
print(f"shipped triangle: {report}")

inflated = GuardedRegion({m.top_state: Polyhedron.trivial(2),
                          m.initial: Polyhedron([[0.69, 1.0]], [3.0])})
report = validate_high_assurance(inflated, sc.backup, sc.dynamics,
                                 sc.label_map, m, cell=0.05, frame=sc.frame)
print(f"inflated to intercept 3.0:\n{report}")
