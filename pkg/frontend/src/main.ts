import { GatewayClient } from "./client.js";
import { InputManager } from "./input.js";
import { PhaseView, type CanvasLike, type MonitorInfo, type ViewState } from "./render.js";
import type { ConfigMessage, ServerMessage, StateMessage } from "./protocol.js";

const TRAIL_LENGTH = 400;

function monitorInfo(cfg: ConfigMessage): MonitorInfo | null {
  const raw = (cfg as unknown as {
    monitor?: {
      initial: string;
      states: { id: string; output: "top" | "bot" | "inc" }[];
      transitions: [string, string[], string][];
    };
  }).monitor;
  if (!raw) return null;
  const outputs: MonitorInfo["outputs"] = {};
  for (const s of raw.states) outputs[s.id] = s.output;
  const step: MonitorInfo["step"] = {};
  for (const [src, letter, dst] of raw.transitions) {
    step[src + "|" + [...letter].sort().join(",")] = dst;
  }
  return { initial: raw.initial, outputs, step };
}

function main() {
  const canvas = document.getElementById("phase") as unknown as CanvasLike;
  const statusEl = document.getElementById("status")!;
  const eventsEl = document.getElementById("events")!;
  const pauseBtn = document.getElementById("pause") as HTMLButtonElement;

  const view: ViewState = { latest: null, trail: [], connected: false };
  let phase: PhaseView | null = null;
  let paused = false;
  let lastRendered: StateMessage | null = null;

  const url = `ws://${location.host}/ws`;
  const client = new GatewayClient(url, {
    onMessage: (msg: ServerMessage) => {
      if (msg.type === "config") {
        phase = new PhaseView(canvas, msg.scenario, monitorInfo(msg));
      } else if (msg.type === "state") {
        // Latest wins: rendering always uses the newest state even when
        // frames arrive faster than the animation loop.
        if (msg.tick === 0) view.trail = [];
        view.latest = msg;
        view.trail.push({ x: msg.x, v: msg.v });
        if (view.trail.length > TRAIL_LENGTH) view.trail.shift();
        for (const e of msg.events) {
          const line = document.createElement("div");
          line.textContent = `tick ${e.tick}: ${e.kind} ${e.detail}`;
          line.className = "event " + e.kind;
          eventsEl.prepend(line);
          while (eventsEl.childElementCount > 12) {
            eventsEl.removeChild(eventsEl.lastChild!);
          }
        }
      } else {
        statusEl.textContent = `server error: ${msg.message}`;
      }
    },
    onStatus: (connected) => {
      view.connected = connected;
      statusEl.textContent = connected ? "connected" : "disconnected";
      statusEl.className = connected ? "ok" : "bad";
    },
  });
  client.connect();

  const input = new InputManager();
  document.getElementById("reset")!.addEventListener("click", () => {
    client.sessionControl("reset");
  });
  pauseBtn.addEventListener("click", () => {
    paused = !paused;
    client.sessionControl(paused ? "pause" : "resume");
    pauseBtn.textContent = paused ? "resume" : "pause";
  });

  const frame = () => {
    if (view.connected) {
      client.sendThrottle(input.capture()); // at most one per frame
    }
    if (phase && view.latest !== lastRendered) {
      phase.render(view);
      lastRendered = view.latest;
    } else if (phase && !view.connected) {
      phase.render(view);
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

window.addEventListener("load", main);
