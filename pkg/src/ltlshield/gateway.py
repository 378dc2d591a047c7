"""Session gateway: one live shielded simulation per websocket connection.

The operator sends throttle values in [-1, 1]; each value is buffered for
one tick (the control-lag trick that lets the assurance mechanism inspect
the input before it reaches the plant) and expanded into a lookahead whose
head holds the operator input and whose tail is the backup law, so a
proposal verifies exactly when the system can still recover by braking
after one more tick of the operator's choice.  The shield, not the
operator, decides the applied input every tick.

Wire protocol (JSON text frames):
  client -> server: {"type":"throttle","value":v} | {"type":"reset"}
                    | {"type":"pause"} | {"type":"resume"}
                    | {"type":"step"}        (advance one tick while paused)
  server -> client: {"type":"config",...} | {"type":"state",...}
                    | {"type":"error","message":...}
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .reach import ControlLaw
from .shield import Mode, ShieldInternalError, new_session, session_step
from .sim import Scenario, draw_disturbance, scenario_to_doc


class GatewaySession:
    """Shield session plus operator input buffering for one connection."""

    def __init__(self, scenario: Scenario, seed: int):
        if scenario.dynamics.n != 2:
            raise ValueError("the cockpit gateway expects a 2-d scenario "
                             "(position, velocity)")
        self.scenario = scenario
        self.seed = seed
        self.cfg = scenario.config()
        self.running = True
        self.reset()

    def reset(self) -> None:
        """Fresh session at the initial state; pause state is preserved."""
        self.rng = np.random.default_rng(self.seed)
        self.session = new_session(self.cfg, np.array(self.scenario.x0))
        self.pending = 0.0
        self.buffered = 0.0
        self.last = None  # last Decision

    def scale(self, value: float) -> float:
        lo, hi = self.cfg.dynamics.u_box.lo[0], self.cfg.dynamics.u_box.hi[0]
        return float(lo + (value + 1.0) / 2.0 * (hi - lo))

    def set_throttle(self, value: float) -> None:
        if not -1.0 <= value <= 1.0:
            clamped = max(-1.0, min(1.0, value))
            self.session.log("warning",
                             f"throttle {value} clamped to {clamped}")
            value = clamped
        self.pending = float(value)

    def proposal_source(self):
        """Operator head plus backup-law tail over the lookahead horizon."""
        head = ControlLaw.constant([self.scale(self.buffered)])
        tail = [self.cfg.backup] * self.cfg.n_max
        laws = [head] + tail
        return lambda: iter(laws)

    def tick_once(self) -> dict:
        src = self.proposal_source()
        self.buffered = self.pending
        d = draw_disturbance(self.scenario.strategy,
                             self.cfg.dynamics.d_box, self.rng,
                             self.session.tick)
        self.last = session_step(self.session, src, d)
        return self.state_message()

    def state_message(self) -> dict:
        s = self.session
        reach = []
        for rset in s.last_tube:
            for q in rset.states():
                for box in rset.boxes(q):
                    reach.append({"q": q, "lo": list(map(float, box.lo)),
                                  "hi": list(map(float, box.hi))})
        return {
            "type": "state",
            "tick": s.tick,
            "x": float(s.x[0]),
            "v": float(s.x[1]),
            "q": s.q,
            "mode": s.mode.value if s.tick else Mode.NOMINAL.value,
            "verdict": self.last.verdict.value if self.last else None,
            "in_sb": s.in_sb(),
            "reach": reach,
            "events": [{"tick": e.tick, "kind": e.kind, "detail": e.detail}
                       for e in s.drain_events()],
        }

    def config_message(self) -> dict:
        m = self.cfg.monitor
        return {"type": "config",
                "scenario": json.loads(scenario_to_doc(self.scenario)),
                "monitor": {
                    "initial": m.initial,
                    "states": [{"id": q, "output": m.output[q].value}
                               for q in m.states],
                    "transitions": [[q, sorted(let), m.delta[(q, let)]]
                                    for q in m.states for let in m.alphabet],
                },
                "tick": self.session.tick}


def _error(message: str) -> dict:
    return {"type": "error", "message": message}


def handle_message(conn: GatewaySession, msg: dict) -> list[dict]:
    """Apply one client message; returns the frames to send back."""
    kind = msg.get("type")
    if kind == "throttle":
        try:
            conn.set_throttle(float(msg["value"]))
        except (KeyError, TypeError, ValueError):
            return [_error("throttle needs a numeric 'value'")]
        return []
    if kind == "reset":
        conn.reset()
        return [conn.state_message()]
    if kind == "pause":
        conn.running = False
        return []
    if kind == "resume":
        conn.running = True
        return []
    if kind == "step":
        if conn.running:
            return [_error("step is only valid while paused")]
        return [conn.tick_once()]
    return [_error(f"unknown message type {kind!r}")]


def create_app(scenario: Scenario, tick_ms: int = 250, seed: int = 0,
               static_dir: str | Path | None = "auto") -> FastAPI:
    app = FastAPI(title="ltlshield gateway")
    tick_s = tick_ms / 1000.0

    @app.get("/scenario")
    def get_scenario():
        return json.loads(scenario_to_doc(scenario))

    @app.websocket("/ws")
    async def ws_endpoint(sock: WebSocket):
        await sock.accept()
        conn = GatewaySession(scenario, seed)
        await sock.send_json(conn.config_message())
        await sock.send_json(conn.state_message())
        loop = asyncio.get_event_loop()
        deadline = loop.time() + tick_s
        try:
            while True:
                try:
                    if conn.running:
                        timeout = max(0.0, deadline - loop.time())
                        raw = await asyncio.wait_for(sock.receive_text(),
                                                     timeout)
                    else:
                        raw = await sock.receive_text()
                except asyncio.TimeoutError:
                    await sock.send_json(conn.tick_once())
                    deadline += tick_s
                    continue
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("frame must be an object")
                except ValueError as exc:
                    await sock.send_json(_error(f"malformed frame: {exc}"))
                    continue
                was_paused = not conn.running
                for frame in handle_message(conn, msg):
                    await sock.send_json(frame)
                if was_paused and conn.running:
                    deadline = loop.time() + tick_s
        except WebSocketDisconnect:
            return
        except ShieldInternalError as exc:
            await sock.send_json(_error(str(exc)))
            await sock.close()

    if static_dir == "auto":
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = candidate if candidate.is_dir() else None
    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="cockpit")
    return app
