"""Three-valued LTL runtime monitors and a verified-recovery safety shield.

The package compiles LTL safety specifications into monitor automata,
over-approximates reachable sets of disturbed affine systems lifted through
the monitor, and runs a shielded control loop that only ever applies an
unverified proposal when a verified way back to a high assurance region
exists.
"""

from .formula import (Formula, FormulaError, Letter, parse_formula, to_nnf,
                      letters)
from .lasso import lasso_satisfies
from .automata import NBA, StateLimitError, formula_to_nba, live_states
from .monitor import (Monitor, SafetyClass, Verdict, build_monitor,
                      classify_safety, minimize_dfa, monitor_from_doc,
                      monitor_step, monitor_to_doc, monitor_to_dot, run_word)
from .geometry import Box, Polyhedron, box_in_polyhedron
from .reach import (AffineDynamics, ControlLaw, GuardedRegion, LabelMap,
                    ProductSet, ValidationReport, box_step_affine,
                    product_in_region, product_step, split_by_labels,
                    validate_high_assurance)
from .shield import (Decision, Mode, NotInHighAssurance, NotSafetyFormula,
                     ProposalSource, RecoverySequence, ShieldConfig,
                     ShieldSession, StepVerdict, new_session, recovery,
                     recovery_d, session_step)
from .sim import (Scenario, Trace, TraceMismatch, builtin_scenario,
                  check_trace, delorean_scenario, draw_disturbance,
                  scenario_from_doc, scenario_to_doc, simulate)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
