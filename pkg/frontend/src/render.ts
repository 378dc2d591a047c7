import type { ReachBox, ScenarioDoc, StateMessage } from "./protocol.js";

// Subset of CanvasRenderingContext2D the view uses; tests substitute a
// recording stub for it.
export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  setLineDash(segments: number[]): void;
}

export type CanvasLike = {
  width: number;
  height: number;
  getContext(kind: "2d"): Ctx2D | null;
};

export type MonitorInfo = {
  initial: string;
  outputs: { [id: string]: "top" | "bot" | "inc" };
  // transitions keyed by "state|sorted,letter"
  step: { [key: string]: string };
};

export type ViewState = {
  latest: StateMessage | null;
  trail: { x: number; v: number }[];
  connected: boolean;
};

type Point = { x: number; y: number };

// Clip a convex polygon against one half-space a.x <= b
// (Sutherland-Hodgman step); world coordinates are (x, v).
export function clipPolygon(poly: Point[], a: number[], b: number): Point[] {
  const inside = (p: Point) => a[0] * p.x + a[1] * p.y <= b + 1e-12;
  const out: Point[] = [];
  for (let i = 0; i < poly.length; i++) {
    const cur = poly[i];
    const prev = poly[(i + poly.length - 1) % poly.length];
    const curIn = inside(cur);
    const prevIn = inside(prev);
    if (curIn !== prevIn) {
      const denom =
        a[0] * (cur.x - prev.x) + a[1] * (cur.y - prev.y);
      const t = denom === 0 ? 0 : (b - a[0] * prev.x - a[1] * prev.y) / denom;
      out.push({
        x: prev.x + t * (cur.x - prev.x),
        y: prev.y + t * (cur.y - prev.y),
      });
    }
    if (curIn) out.push(cur);
  }
  return out;
}

export function regionPolygon(
  halfspaces: number[][],
  frame: number[][],
): Point[] {
  let poly: Point[] = [
    { x: frame[0][0], y: frame[0][1] },
    { x: frame[1][0], y: frame[0][1] },
    { x: frame[1][0], y: frame[1][1] },
    { x: frame[0][0], y: frame[1][1] },
  ];
  for (const row of halfspaces) {
    poly = clipPolygon(poly, [row[0], row[1]], row[2]);
    if (poly.length === 0) return [];
  }
  return poly;
}

const MODE_BANNERS: { [mode: string]: { text: string; color: string } } = {
  RECOVERING: { text: "RECOVERING: MEMORIZED PLAN", color: "#e07020" },
  BACKUP: { text: "BACKUP ENGAGED", color: "#d02020" },
};

export class PhaseView {
  private ctx: Ctx2D;
  private w: number;
  private h: number;
  private scenario: ScenarioDoc;
  private monitor: MonitorInfo | null;
  private margin = 42;

  constructor(
    canvas: CanvasLike,
    scenario: ScenarioDoc,
    monitor: MonitorInfo | null = null,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas has no 2d context");
    this.ctx = ctx;
    this.w = canvas.width;
    this.h = canvas.height;
    this.scenario = scenario;
    this.monitor = monitor;
  }

  private sx(x: number): number {
    const [lo, hi] = [this.scenario.frame[0][0], this.scenario.frame[1][0]];
    return this.margin + ((x - lo) / (hi - lo)) * (this.w - 2 * this.margin);
  }

  private sy(v: number): number {
    const [lo, hi] = [this.scenario.frame[0][1], this.scenario.frame[1][1]];
    return this.h - this.margin -
      ((v - lo) / (hi - lo)) * (this.h - 2 * this.margin);
  }

  private fillPolygon(poly: Point[], style: string, alpha: number) {
    if (poly.length < 3) return;
    const ctx = this.ctx;
    ctx.globalAlpha = alpha;
    ctx.fillStyle = style;
    ctx.beginPath();
    ctx.moveTo(this.sx(poly[0].x), this.sy(poly[0].y));
    for (const p of poly.slice(1)) ctx.lineTo(this.sx(p.x), this.sy(p.y));
    ctx.closePath();
    ctx.fill();
    ctx.globalAlpha = 1;
  }

  private goodTrapRegions(current: string | null): number[][][] {
    // Label regions whose letter completes the objective from the current
    // monitor state (the good trap admits every plant state).
    if (!this.monitor || !current) return [];
    const out: number[][][] = [];
    for (const label of this.scenario.labels) {
      const key = current + "|" + [...label.letter].sort().join(",");
      const next = this.monitor.step[key];
      if (next !== undefined && this.monitor.outputs[next] === "top") {
        out.push(label.halfspaces);
      }
    }
    return out;
  }

  render(view: ViewState) {
    const ctx = this.ctx;
    const s = view.latest;
    ctx.clearRect(0, 0, this.w, this.h);
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, this.w, this.h);

    // high assurance region (green) and objective-completing regions
    for (const entry of this.scenario.sb) {
      if (entry.halfspaces.length === 0) continue;
      this.fillPolygon(
        regionPolygon(entry.halfspaces, this.scenario.frame),
        "#2faa4a", 0.35);
    }
    for (const halfspaces of this.goodTrapRegions(s ? s.q : null)) {
      this.fillPolygon(
        regionPolygon(halfspaces, this.scenario.frame), "#2faa4a", 0.18);
    }

    // label region boundaries and letters
    ctx.globalAlpha = 1;
    for (const label of this.scenario.labels) {
      const poly = regionPolygon(label.halfspaces, this.scenario.frame);
      if (poly.length < 3) continue;
      ctx.strokeStyle = "#4a5568";
      ctx.lineWidth = 1;
      ctx.setLineDash([4, 4]);
      ctx.beginPath();
      ctx.moveTo(this.sx(poly[0].x), this.sy(poly[0].y));
      for (const p of poly.slice(1)) ctx.lineTo(this.sx(p.x), this.sy(p.y));
      ctx.closePath();
      ctx.stroke();
      ctx.setLineDash([]);
      const cx = poly.reduce((acc, p) => acc + p.x, 0) / poly.length;
      const cy = poly.reduce((acc, p) => acc + p.y, 0) / poly.length;
      ctx.fillStyle = "#8899aa";
      ctx.font = "12px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(
        label.letter.length ? "{" + label.letter.join(",") + "}" : "{}",
        this.sx(cx), this.sy(cy));
    }

    // verified reach tube
    if (s) {
      ctx.strokeStyle = "#58c4dd";
      ctx.lineWidth = 1;
      ctx.globalAlpha = 0.6;
      for (const box of s.reach) {
        this.strokeBox(box);
      }
      ctx.globalAlpha = 1;
    }

    // trail then current state
    ctx.fillStyle = "#e86fc6";
    for (const p of view.trail) {
      ctx.globalAlpha = 0.4;
      ctx.fillRect(this.sx(p.x) - 1.5, this.sy(p.v) - 1.5, 3, 3);
    }
    ctx.globalAlpha = 1;
    if (s) {
      ctx.beginPath();
      ctx.arc(this.sx(s.x), this.sy(s.v), 7, 0, 2 * Math.PI);
      ctx.fillStyle = "#ff63c1";
      ctx.fill();
    }

    this.axes();
    this.banners(view);
  }

  private strokeBox(box: ReachBox) {
    const x0 = this.sx(box.lo[0]);
    const x1 = this.sx(box.hi[0]);
    const y0 = this.sy(box.hi[1]);
    const y1 = this.sy(box.lo[1]);
    this.ctx.strokeRect(x0, y0, Math.max(x1 - x0, 1), Math.max(y1 - y0, 1));
  }

  private axes() {
    const ctx = this.ctx;
    ctx.strokeStyle = "#aab4c0";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(this.margin, this.margin);
    ctx.lineTo(this.margin, this.h - this.margin);
    ctx.lineTo(this.w - this.margin, this.h - this.margin);
    ctx.stroke();
    ctx.fillStyle = "#aab4c0";
    ctx.font = "12px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("position x [m]", this.w / 2, this.h - 10);
    ctx.fillText("velocity v [m/s]", this.margin, this.margin - 16);
  }

  private banners(view: ViewState) {
    const ctx = this.ctx;
    ctx.textAlign = "center";
    ctx.font = "bold 18px sans-serif";
    const s = view.latest;
    if (!view.connected) {
      this.banner("DISCONNECTED", "#777777", 0);
      return;
    }
    if (!s) return;
    let slot = 0;
    const output = this.monitor ? this.monitor.outputs[s.q] : undefined;
    if (output === "top") {
      this.banner("OBJECTIVE MET", "#2faa4a", slot++);
    }
    const mode = MODE_BANNERS[s.mode];
    if (mode) {
      this.banner(mode.text, mode.color, slot++);
    }
    if (s.verdict === "FAULT") {
      this.banner("FAULT: PROPOSAL REJECTED", "#e0a020", slot++);
    }
    ctx.font = "13px sans-serif";
    ctx.fillStyle = "#ccd6e0";
    ctx.textAlign = "center";
    ctx.fillText(
      `tick ${s.tick}   x=${s.x.toFixed(2)}  v=${s.v.toFixed(2)}  ` +
      `q=${s.q}  ${s.mode}${s.verdict ? " / " + s.verdict : ""}` +
      (s.in_sb ? "  [in assured region]" : ""),
      this.w / 2, 24);
  }

  private banner(text: string, color: string, slot: number) {
    const ctx = this.ctx;
    const y = 48 + slot * 30;
    ctx.globalAlpha = 0.9;
    ctx.fillStyle = color;
    ctx.fillRect(this.w / 2 - 150, y, 300, 26);
    ctx.globalAlpha = 1;
    ctx.fillStyle = "#ffffff";
    ctx.font = "bold 15px sans-serif";
    ctx.fillText(text, this.w / 2, y + 18);
  }
}
