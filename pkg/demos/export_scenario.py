"""Write the case-study scenario document next to this script.

The JSON file drives the `run`, `validate-sb`, and `serve` subcommands and
round-trips through scenario_from_doc.
"""

from pathlib import Path

from ltlshield import scenario_to_doc
from ltlshield.sim import delorean_scenario

out = Path(__file__).parent / "delorean.json"
out.write_text(scenario_to_doc(delorean_scenario("faulty-late")))
print(f"wrote {out}")
