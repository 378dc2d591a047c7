"""Seedable plant simulation, scripted drivers, and the car case study.

The bundled scenario is a clamped double integrator driving toward a
landmark at 2.54 m that must only ever be passed at 2 m/s or faster.  The
specification is (!tower) W (tower & fast) over the labeling that sets
``tower`` at x >= 2.54 and ``fast`` at v >= 2; the high assurance region is
the braking triangle v <= -0.69 x + 1.66 at the inconclusive monitor state
plus the whole plane at the good trap.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .formula import parse_formula
from .geometry import Box, Polyhedron
from .monitor import Monitor, Verdict, build_monitor
from .reach import AffineDynamics, ControlLaw, GuardedRegion, LabelMap
from .shield import ShieldConfig, ShieldSession, new_session, session_step


class TraceMismatch(RuntimeError):
    """A recorded monitor run disagrees with an independent replay."""


# ---------------------------------------------------------------------------
# scenario


@dataclass(frozen=True)
class Scenario:
    name: str
    formula_text: str
    ap: tuple[str, ...]
    dynamics: AffineDynamics
    label_map: LabelMap
    sb_spec: tuple[tuple[str, Polyhedron], ...]  # keyed by state id or alias
    backup: ControlLaw
    n_max: int
    reengage: bool
    x0: tuple[float, ...]
    horizon: int
    strategy: str
    driver: str | tuple
    frame: Box
    deterministic: bool = False

    def monitor(self) -> Monitor:
        return _cached_monitor(self.formula_text, self.ap)

    def sb(self) -> GuardedRegion:
        m = self.monitor()
        regions: dict[str, Polyhedron] = {}
        for key, poly in self.sb_spec:
            regions[_resolve_state(m, key)] = poly
        return GuardedRegion(regions)

    def config(self, *, allow_non_safety: bool = False) -> ShieldConfig:
        return ShieldConfig(
            monitor=self.monitor(),
            dynamics=self.dynamics,
            label_map=self.label_map,
            sb=self.sb(),
            backup=self.backup,
            n_max=self.n_max,
            reengage=self.reengage,
            deterministic=self.deterministic,
            formula=parse_formula(self.formula_text, list(self.ap)),
            allow_non_safety=allow_non_safety,
        )


def _resolve_state(m: Monitor, key: str) -> str:
    if key == "top":
        state = m.top_state
    elif key == "bot":
        state = m.bot_state
    elif key == "init":
        state = m.initial
    elif key in m.states:
        state = key
    else:
        state = None
    if state is None:
        raise ValueError(f"unknown monitor state {key!r}")
    return state


@lru_cache(maxsize=64)
def _cached_monitor(formula_text: str, ap: tuple[str, ...]) -> Monitor:
    return build_monitor(formula_text, list(ap))


TOWER_AT = 2.54
FAST_AT = 2.0
TIMESTEP = 0.25

DRIVER_NAMES = ("safe", "faulty-late", "full-throttle")


def delorean_scenario(profile: str, *, deterministic: bool = False,
                      reengage: bool = False,
                      strategy: str = "uniform") -> Scenario:
    """The car case study with the named driver profile.

    Input is acceleration in [-2, 2] m/s^2, drag is a bounded disturbance
    in [0, 0.2] m/s^2, velocity is clamped at zero (the car cannot
    reverse), and the timestep is 250 ms.  Bounds are conventions of this
    artifact and are configurable through the scenario document.
    """
    if profile not in DRIVER_NAMES and not (
            isinstance(profile, tuple) and profile[0] == "replay"):
        raise ValueError(f"unknown driver profile {profile!r}")
    dt = TIMESTEP
    d_box = Box([0.1], [0.1]) if deterministic else Box([0.0], [0.2])
    dyn = AffineDynamics(
        a=[[1, dt], [0, 1]], b=[[0], [dt]], e=[[0], [-dt]], c=[0, 0],
        u_box=Box([-2], [2]), d_box=d_box,
        clamp_lo=np.array([-np.inf, 0.0]), clamp_hi=None)
    lm = LabelMap(regions=(
        (frozenset({"tower", "fast"}),
         Polyhedron([[-1, 0], [0, -1]], [-TOWER_AT, -FAST_AT])),
        (frozenset({"tower"}),
         Polyhedron([[-1, 0], [0, 1]], [-TOWER_AT, FAST_AT])),
        (frozenset({"fast"}),
         Polyhedron([[1, 0], [0, -1]], [TOWER_AT, -FAST_AT])),
        (frozenset(),
         Polyhedron([[1, 0], [0, 1]], [TOWER_AT, FAST_AT])),
    ), ap=("fast", "tower"))
    return Scenario(
        name="delorean" + ("-deterministic" if deterministic else ""),
        formula_text="(!tower) W (tower & fast)",
        ap=("fast", "tower"),
        dynamics=dyn,
        label_map=lm,
        sb_spec=(("top", Polyhedron.trivial(2)),
                 ("init", Polyhedron([[0.69, 1.0]], [1.66]))),
        backup=ControlLaw.constant([-2.0]),
        n_max=8,
        reengage=reengage,
        x0=(0.0, 0.0),
        horizon=200,
        strategy=strategy,
        driver=profile,
        frame=Box([0, 0], [6, 4]),
        deterministic=deterministic,
    )


# ---------------------------------------------------------------------------
# disturbance strategies

STRATEGY_NAMES = ("uniform", "extreme", "zero")


def draw_disturbance(strategy: str, d_box: Box, rng: np.random.Generator,
                     tick: int = 0) -> np.ndarray:
    """One disturbance sample; deterministic given the rng state and tick.

    uniform: independent uniform over the box.  extreme: a box vertex,
    alternating between extremes for the first ticks and then pinning the
    upper vertex (for the case study: maximal drag, which starves the car
    of speed near the threshold).  zero: the box center.
    """
    if strategy == "zero":
        return d_box.center
    if strategy == "uniform":
        return rng.uniform(d_box.lo, d_box.hi)
    if strategy == "extreme":
        if tick < 8:
            return d_box.lo.copy() if tick % 2 == 0 else d_box.hi.copy()
        return d_box.hi.copy()
    raise ValueError(f"unknown disturbance strategy {strategy!r}")


# ---------------------------------------------------------------------------
# scripted drivers


def _hold(u: float, count: int) -> list[ControlLaw]:
    law = ControlLaw.constant([u])
    return [law] * count


def make_driver(driver: str | tuple, scenario: Scenario):
    """Per-tick proposal factory: (tick, x, q) -> proposal source.

    safe proposes braking forever; full-throttle proposes maximal
    acceleration forever; faulty-late accelerates for three ticks and then
    proposes an unverifiable coast past the threshold; replay holds the
    listed inputs one per tick and runs dry afterwards.
    """
    n = scenario.n_max + 1

    if driver == "safe":
        def source(tick, x, q):
            return lambda: iter(_hold(-2.0, n))
    elif driver == "full-throttle":
        def source(tick, x, q):
            return lambda: iter(_hold(2.0, n))
    elif driver == "faulty-late":
        def source(tick, x, q):
            if tick < 3:
                return lambda: iter(_hold(2.0, n))
            return lambda: iter(_hold(0.0, n))
    elif isinstance(driver, tuple) and driver and driver[0] == "replay":
        inputs = [float(v) for v in driver[1]]

        def source(tick, x, q):
            if tick < len(inputs):
                return lambda: iter(_hold(inputs[tick], n))
            return lambda: iter(())
    else:
        raise ValueError(f"unknown driver {driver!r}")
    return source


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TickRecord:
    tick: int
    x: tuple[float, ...]
    q: str
    letter: tuple[str, ...]
    mode: str
    verdict: str
    applied: tuple[float, ...]
    disturbance: tuple[float, ...]


@dataclass(frozen=True)
class TraceSummary:
    ticks_run: int
    bot_reached: bool
    crossing_tick: int | None
    crossing_speed: float | None
    final_verdict: str
    first_fault_tick: int | None


@dataclass(frozen=True)
class Trace:
    scenario: str
    seed: int
    shield: bool
    records: tuple[TickRecord, ...]
    summary: TraceSummary

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario,
            "seed": self.seed,
            "shield": self.shield,
            "records": [vars(r) | {"x": list(r.x), "letter": list(r.letter),
                                   "applied": list(r.applied),
                                   "disturbance": list(r.disturbance)}
                        for r in self.records],
            "summary": vars(self.summary),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        n = len(self.records[0].x) if self.records else 0
        m = len(self.records[0].applied) if self.records else 0
        p = len(self.records[0].disturbance) if self.records else 0
        cols = (["tick"] + [f"x{i}" for i in range(n)] + ["q", "letter",
                "mode", "verdict"] + [f"u{i}" for i in range(m)]
                + [f"d{i}" for i in range(p)])
        out.write(",".join(cols) + "\n")
        for r in self.records:
            cells = ([str(r.tick)] + [repr(v) for v in r.x]
                     + [r.q, "|".join(r.letter), r.mode, r.verdict]
                     + [repr(v) for v in r.applied]
                     + [repr(v) for v in r.disturbance])
            out.write(",".join(cells) + "\n")
        for key, val in vars(self.summary).items():
            out.write(f"# {key}: {val}\n")
        return out.getvalue()


# ---------------------------------------------------------------------------
# simulation loop


def simulate(scenario: Scenario, seed: int, ticks: int | None = None,
             *, shield: bool = True, debug: bool = False) -> Trace:
    """Run the shielded (or bypassed) loop and record every tick.

    The trace is fully determined by (scenario, seed, ticks, shield).
    With the shield bypassed the driver's first proposed input is applied
    unverified each tick; the monitor is still tracked and may trap.
    """
    ticks = scenario.horizon if ticks is None else ticks
    rng = np.random.default_rng(seed)
    driver = make_driver(scenario.driver, scenario)
    m = scenario.monitor()
    if shield:
        session = new_session(scenario.config(), np.array(scenario.x0),
                              debug=debug)
        return _run_shielded(scenario, session, driver, rng, ticks, seed)
    return _run_bypass(scenario, m, driver, rng, ticks, seed)


def _record(scenario, tick, x, q, letter, mode, verdict, applied, d) -> TickRecord:
    return TickRecord(
        tick=tick,
        x=tuple(float(v) for v in x),
        q=q,
        letter=tuple(sorted(letter)),
        mode=mode,
        verdict=verdict,
        applied=tuple(float(v) for v in np.atleast_1d(applied)),
        disturbance=tuple(float(v) for v in np.atleast_1d(d)),
    )


def _summarize(scenario: Scenario, records: list[TickRecord],
               m: Monitor) -> TraceSummary:
    bot = m.bot_state
    bot_reached = any(r.q == bot for r in records) if bot else False
    crossing_tick = crossing_speed = None
    if "tower" in scenario.ap:
        for r in records:
            if "tower" in r.letter:
                crossing_tick = r.tick
                crossing_speed = r.x[1]
                break
    first_fault = next((r.tick for r in records if r.verdict == "FAULT"), None)
    final = m.output[records[-1].q].value
    return TraceSummary(
        ticks_run=len(records) - 1,
        bot_reached=bot_reached,
        crossing_tick=crossing_tick,
        crossing_speed=crossing_speed,
        final_verdict=final,
        first_fault_tick=first_fault,
    )


def _initial_record(scenario, x, q) -> TickRecord:
    letter = scenario.label_map.letter_at(np.asarray(x, dtype=float))
    return _record(scenario, 0, x, q, letter, "INIT", "INIT",
                   np.zeros(scenario.dynamics.m),
                   np.zeros(scenario.dynamics.d_box.dim))


def _run_shielded(scenario, session: ShieldSession, driver, rng, ticks,
                  seed) -> Trace:
    m = scenario.monitor()
    records = [_initial_record(scenario, session.x, session.q)]
    for step in range(ticks):
        src = driver(step, session.x, session.q)
        d = draw_disturbance(scenario.strategy, scenario.dynamics.d_box,
                             rng, step)
        decision = session_step(session, src, d)
        letter = scenario.label_map.letter_at(session.x)
        records.append(_record(scenario, step + 1, session.x, session.q,
                               letter, decision.mode.value,
                               decision.verdict.value, decision.applied, d))
    return Trace(scenario=scenario.name, seed=seed, shield=True,
                 records=tuple(records),
                 summary=_summarize(scenario, records, m))


def _run_bypass(scenario, m: Monitor, driver, rng, ticks, seed) -> Trace:
    dyn = scenario.dynamics
    x = np.array(scenario.x0, dtype=float)
    q = m.step(m.initial, scenario.label_map.letter_at(x))
    records = [_initial_record(scenario, x, q)]
    for step in range(ticks):
        src = driver(step, x, q)
        try:
            law = next(iter(src()))
            u = dyn.saturate(law(x))
        except StopIteration:
            u = np.zeros(dyn.m)
        d = draw_disturbance(scenario.strategy, dyn.d_box, rng, step)
        x = dyn.step(x, u, d)
        letter = scenario.label_map.letter_at(x)
        q = m.step(q, letter)
        records.append(_record(scenario, step + 1, x, q, letter,
                               "BYPASS", "BYPASS", u, d))
    return Trace(scenario=scenario.name, seed=seed, shield=False,
                 records=tuple(records),
                 summary=_summarize(scenario, records, m))


def check_trace(trace: Trace, m: Monitor) -> Verdict:
    """Replay the monitor over the trace letters independently.

    Cross-checks every recorded monitor state and returns the verdict of
    the full letter sequence.
    """
    q = m.initial
    for r in trace.records:
        q = m.step(q, frozenset(r.letter))
        if q != r.q:
            raise TraceMismatch(
                f"tick {r.tick}: recorded monitor state {r.q}, replay got {q}")
    return m.output[q]


# ---------------------------------------------------------------------------
# scenario document (JSON)


def _law_to_doc(law: ControlLaw) -> dict:
    if law.is_constant:
        return {"kind": "constant", "u": [float(v) for v in law.offset]}
    return {"kind": "feedback",
            "k": [[float(v) for v in row] for row in law.gain],
            "c": [float(v) for v in law.offset],
            "domain": law.domain.to_rows()}


def _law_from_doc(doc: dict, dim: int) -> ControlLaw:
    if doc["kind"] == "constant":
        return ControlLaw.constant(doc["u"])
    return ControlLaw.feedback(doc["k"], doc["c"],
                               Polyhedron.from_rows(doc.get("domain", []), dim))


def _clamp_to_doc(arr: np.ndarray | None, n: int) -> list:
    if arr is None:
        return [None] * n
    return [None if not np.isfinite(v) else float(v) for v in arr]


def _clamp_from_doc(vals: list | None, n: int, sign: float) -> np.ndarray | None:
    if vals is None or all(v is None for v in vals):
        return None
    return np.array([sign * np.inf if v is None else float(v) for v in vals])


def scenario_to_doc(sc: Scenario) -> str:
    dyn = sc.dynamics
    doc = {
        "name": sc.name,
        "formula": sc.formula_text,
        "ap": sorted(sc.ap),
        "dynamics": {
            "a": dyn.a.tolist(), "b": dyn.b.tolist(), "e": dyn.e.tolist(),
            "c": dyn.c.tolist(),
            "u": dyn.u_box.to_lists(), "d": dyn.d_box.to_lists(),
            "clamp_lo": _clamp_to_doc(dyn.clamp_lo, dyn.n),
            "clamp_hi": _clamp_to_doc(dyn.clamp_hi, dyn.n),
        },
        "labels": [{"letter": sorted(letter), "halfspaces": poly.to_rows()}
                   for letter, poly in sc.label_map.regions],
        "sb": [{"state": key, "halfspaces": poly.to_rows()}
               for key, poly in sc.sb_spec],
        "backup": _law_to_doc(sc.backup),
        "nmax": sc.n_max,
        "reengage": sc.reengage,
        "x0": list(sc.x0),
        "horizon": sc.horizon,
        "strategy": sc.strategy,
        "driver": list(sc.driver) if isinstance(sc.driver, tuple) else sc.driver,
        "frame": sc.frame.to_lists(),
        "deterministic": sc.deterministic,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def scenario_from_doc(text: str) -> Scenario:
    doc = json.loads(text)
    dd = doc["dynamics"]
    n = len(dd["a"])
    dyn = AffineDynamics(
        a=dd["a"], b=dd["b"], e=dd["e"], c=dd["c"],
        u_box=Box(*dd["u"]), d_box=Box(*dd["d"]),
        clamp_lo=_clamp_from_doc(dd.get("clamp_lo"), n, -1.0),
        clamp_hi=_clamp_from_doc(dd.get("clamp_hi"), n, +1.0),
    )
    ap = tuple(sorted(doc["ap"]))
    lm = LabelMap(regions=tuple(
        (frozenset(entry["letter"]),
         Polyhedron.from_rows(entry["halfspaces"], n))
        for entry in doc["labels"]), ap=ap)
    driver = doc["driver"]
    if isinstance(driver, list):
        driver = (driver[0], tuple(driver[1]))
    return Scenario(
        name=doc["name"],
        formula_text=doc["formula"],
        ap=ap,
        dynamics=dyn,
        label_map=lm,
        sb_spec=tuple((entry["state"],
                       Polyhedron.from_rows(entry["halfspaces"], n))
                      for entry in doc["sb"]),
        backup=_law_from_doc(doc["backup"], n),
        n_max=int(doc["nmax"]),
        reengage=bool(doc["reengage"]),
        x0=tuple(float(v) for v in doc["x0"]),
        horizon=int(doc.get("horizon", 200)),
        strategy=doc.get("strategy", "uniform"),
        driver=driver,
        frame=Box(*doc["frame"]),
        deterministic=bool(doc.get("deterministic", False)),
    )


def builtin_scenario(name: str) -> Scenario:
    """Scenarios addressable by name from the command line."""
    builtin = {
        "delorean": lambda: delorean_scenario("faulty-late"),
        "delorean-safe": lambda: delorean_scenario("safe"),
        "delorean-deterministic": lambda: delorean_scenario(
            "faulty-late", deterministic=True),
    }
    if name not in builtin:
        raise ValueError(f"unknown builtin scenario {name!r}; "
                         f"available: {sorted(builtin)}")
    return builtin[name]()
