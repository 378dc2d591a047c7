"""The assurance mechanism: verified recovery search and the shielded loop.

Each control tick the shield asks the (untrusted) proposal source for a
lookahead of control laws and simulates them forward together with the
monitor.  The proposal is applied only when the simulated product state
returns to the high assurance region within the lookahead bound; the tail
of the verified plan is memorized.  On a fault the memorized plan is played
out, after which the stationary backup law holds the system inside the high
assurance region forever (optionally handing control back to the proposal
source once the region is re-entered).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator

import numpy as np

from .formula import Formula
from .monitor import Monitor, SafetyClass, classify_safety
from .reach import (AffineDynamics, ControlLaw, GuardedRegion, LabelMap,
                    ProductSet, box_in_polyhedron, product_in_region,
                    product_step)


class ShieldError(RuntimeError):
    pass


class NotInHighAssurance(ShieldError):
    """Initial product state lies outside the high assurance region."""


class NotSafetyFormula(ShieldError):
    """The configured specification is not a safety property."""


class ShieldInternalError(ShieldError):
    """The monitor reached the bad-prefix trap; indicates a soundness bug."""


# A proposal source is called once per recovery query and yields up to
# n_max + 1 control laws; running out of items is a fault, not an error.
ProposalSource = Callable[[], Iterable[ControlLaw]]


@dataclass(frozen=True)
class RecoverySequence:
    """Verified plan: applying the laws in order drives the product state
    into the high assurance region (under every admissible disturbance in
    the disturbed setting)."""

    laws: tuple[ControlLaw, ...]
    tube: tuple[ProductSet, ...] = ()

    def __post_init__(self):
        if not self.laws:
            raise ValueError("recovery sequence must be nonempty")

    def __len__(self) -> int:
        return len(self.laws)


@dataclass(frozen=True)
class ShieldConfig:
    monitor: Monitor
    dynamics: AffineDynamics
    label_map: LabelMap
    sb: GuardedRegion
    backup: ControlLaw
    n_max: int = 8
    reengage: bool = False
    deterministic: bool = False
    formula: Formula | None = None
    allow_non_safety: bool = False

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        bot = self.monitor.bot_state
        if bot is not None and bot in self.sb.regions:
            raise ValueError("high assurance region must exclude the "
                             "bad-prefix trap state")
        if self.deterministic and not self.dynamics.deterministic:
            raise ValueError("deterministic mode requires a point "
                             "disturbance box")


class Mode(enum.Enum):
    NOMINAL = "NOMINAL"
    RECOVERING = "RECOVERING"
    BACKUP = "BACKUP"


class StepVerdict(enum.Enum):
    ACCEPTED = "ACCEPTED"
    FAULT = "FAULT"
    RECOVERING = "RECOVERING"
    BACKUP = "BACKUP"


@dataclass(frozen=True)
class Decision:
    """Outcome of one shield tick."""

    applied: np.ndarray
    mode: Mode
    verdict: StepVerdict
    fresh: RecoverySequence | None = None


@dataclass(frozen=True)
class Event:
    tick: int
    kind: str  # accept | fault | recovery-step | backup | warning
    detail: str = ""


def _pull(items: Iterator[ControlLaw]) -> ControlLaw | None:
    try:
        return next(items)
    except StopIteration:
        return None


def recovery(x: np.ndarray, q: str, src: ProposalSource,
             cfg: ShieldConfig) -> RecoverySequence | None:
    """Deterministic recovery search.

    Simulates requested inputs forward from (x, q) and returns the shortest
    prefix whose endpoint lands in the high assurance region; None when the
    lookahead bound is hit, the bad trap is entered, the source runs dry,
    or a proposed input leaves the admissible set.
    """
    if not cfg.deterministic:
        raise ValueError("recovery requires deterministic mode")
    dyn = cfg.dynamics
    m = cfg.monitor
    d = dyn.d_box.center
    bot = m.bot_state
    items = iter(src())
    xs = np.asarray(x, dtype=float)
    qs = q
    laws: list[ControlLaw] = []
    i = 0
    while i <= cfg.n_max and qs != bot:
        law = _pull(items)
        if law is None:
            return None
        u = law(xs)
        if not cfg.dynamics.u_box.contains_point(u):
            return None
        laws.append(law)
        xs = dyn.step(xs, u, d)
        qs = m.step(qs, cfg.label_map.letter_at(xs))
        if cfg.sb.contains(xs, qs):
            return RecoverySequence(tuple(laws))
        i += 1
    return None


def recovery_d(x: np.ndarray, q: str, src: ProposalSource,
               cfg: ShieldConfig) -> RecoverySequence | None:
    """Recovery search under bounded disturbances.

    Propagates a product reach set from {(x, q)} through the proposed
    feedback laws.  A proposal faults immediately when the current reach
    set is not inside the declared law domain, and succeeds when the whole
    reach set enters the high assurance region within the bound.
    """
    dyn = cfg.dynamics
    m = cfg.monitor
    items = iter(src())
    reach = ProductSet.from_point(x, q)
    tube = [reach]
    laws: list[ControlLaw] = []
    i = 0
    while i <= cfg.n_max:
        law = _pull(items)
        if law is None:
            return None
        if law.is_constant and not dyn.u_box.contains_point(law.offset):
            return None
        if not law.domain.is_trivial:
            for qi in reach.states():
                for box in reach.boxes(qi):
                    if not box_in_polyhedron(box, law.domain):
                        return None
        laws.append(law)
        reach = product_step(reach, dyn, law, cfg.label_map, m)
        tube.append(reach)
        if product_in_region(reach, cfg.sb):
            return RecoverySequence(tuple(laws), tuple(tube))
        i += 1
    return None


@dataclass
class ShieldSession:
    """Single-owner mutable state of one shielded control loop."""

    cfg: ShieldConfig
    x: np.ndarray
    q: str
    mode: Mode = Mode.NOMINAL
    memory: deque[ControlLaw] = field(default_factory=deque)
    tick: int = 0
    events: list[Event] = field(default_factory=list)
    last_tube: tuple[ProductSet, ...] = ()
    debug: bool = False

    def in_sb(self) -> bool:
        return self.cfg.sb.contains(self.x, self.q)

    def log(self, kind: str, detail: str = "") -> None:
        self.events.append(Event(self.tick, kind, detail))

    def drain_events(self) -> list[Event]:
        out = self.events[:]
        self.events.clear()
        return out


@lru_cache(maxsize=256)
def _cached_safety(f: Formula, ap: tuple[str, ...]) -> SafetyClass:
    return classify_safety(f, list(ap))


def new_session(cfg: ShieldConfig, x0, *, debug: bool = False) -> ShieldSession:
    """Start a session; the initial product state must lie in the region.

    The monitor consumes the label of the initial state before the first
    decision, so the monitored trace covers the whole trajectory.
    """
    if cfg.formula is not None and not cfg.allow_non_safety:
        if _cached_safety(cfg.formula, cfg.monitor.ap) != SafetyClass.SAFETY:
            raise NotSafetyFormula(
                f"{cfg.formula} is not a safety property; set "
                "allow_non_safety to override")
    x0 = np.asarray(x0, dtype=float)
    m = cfg.monitor
    q0 = m.step(m.initial, cfg.label_map.letter_at(x0))
    if not cfg.sb.contains(x0, q0):
        raise NotInHighAssurance(
            f"initial state {x0} with monitor state {q0} is outside the "
            "high assurance region")
    return ShieldSession(cfg=cfg, x=x0.copy(), q=q0, debug=debug)


def _replay_memory_contained(s: ShieldSession) -> bool:
    """Debug check: the memorized remainder still lands the worst-case
    reach set inside the region when replayed from the current state."""
    reach = ProductSet.from_point(s.x, s.q)
    for law in s.memory:
        reach = product_step(reach, s.cfg.dynamics, law, s.cfg.label_map,
                             s.cfg.monitor)
    return product_in_region(reach, s.cfg.sb)


def session_step(s: ShieldSession, src: ProposalSource,
                 d_actual) -> Decision:
    """One tick: choose and apply an input, then advance plant and monitor.

    Nominal ticks query the recovery search; a verified proposal has its
    head applied and its tail memorized.  On a fault the memorized plan is
    consumed one law per tick, then the backup law holds the region.  With
    ``reengage`` set, the proposal source is retried while recovering and
    control returns to nominal once the region is re-entered.
    """
    cfg = s.cfg
    search = recovery if cfg.deterministic else recovery_d
    fresh: RecoverySequence | None = None
    attempt = s.mode == Mode.NOMINAL or (
        cfg.reengage and (s.mode == Mode.RECOVERING or s.in_sb()))

    if attempt:
        seq = search(s.x, s.q, src, cfg)
        if seq is not None:
            law = seq.laws[0]
            applied = cfg.dynamics.saturate(law(s.x))
            s.memory = deque(seq.laws[1:])
            s.last_tube = seq.tube
            s.mode = Mode.NOMINAL
            s.log("accept", f"verified {len(seq)}-step plan")
            fresh = seq
            verdict = StepVerdict.ACCEPTED
        else:
            s.log("fault", "proposal could not be verified")
            if s.memory:
                if s.debug and not _replay_memory_contained(s):
                    raise ShieldInternalError(
                        "memorized recovery plan no longer verifies")
                law = s.memory.popleft()
                applied = cfg.dynamics.saturate(law(s.x))
                s.mode = Mode.RECOVERING
                s.log("recovery-step",
                      f"{len(s.memory)} memorized steps remain")
            else:
                # Empty memory at a fault means the last verified plan
                # already landed here, inside the region.
                applied = cfg.dynamics.saturate(cfg.backup(s.x))
                s.mode = Mode.BACKUP
                s.log("backup", "no memorized plan; backup engaged")
            verdict = StepVerdict.FAULT
    elif s.mode == Mode.RECOVERING:
        if s.memory:
            law = s.memory.popleft()
            applied = cfg.dynamics.saturate(law(s.x))
            s.log("recovery-step", f"{len(s.memory)} memorized steps remain")
            verdict = StepVerdict.RECOVERING
        else:
            s.mode = Mode.BACKUP
            applied = cfg.dynamics.saturate(cfg.backup(s.x))
            s.log("backup", "memorized plan exhausted; backup engaged")
            verdict = StepVerdict.BACKUP
    else:
        applied = cfg.dynamics.saturate(cfg.backup(s.x))
        verdict = StepVerdict.BACKUP

    d_actual = np.asarray(d_actual, dtype=float)
    if not cfg.dynamics.d_box.contains_point(d_actual):
        raise ValueError(f"disturbance {d_actual} outside the declared bound")
    s.x = cfg.dynamics.step(s.x, applied, d_actual)
    s.q = cfg.monitor.step(s.q, cfg.label_map.letter_at(s.x))
    s.tick += 1
    if s.q == cfg.monitor.bot_state:
        raise ShieldInternalError(
            f"monitor entered the bad-prefix trap at tick {s.tick}")
    if s.debug and s.mode == Mode.BACKUP and not cfg.reengage:
        if not s.in_sb():
            raise ShieldInternalError(
                f"backup mode left the high assurance region at tick {s.tick}")
    return Decision(applied=applied, mode=s.mode, verdict=verdict,
                    fresh=fresh)
