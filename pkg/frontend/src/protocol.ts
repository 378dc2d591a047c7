// Wire protocol of the gateway. Field names are fixed by the server.

export type ClientMessage =
  | { type: "throttle"; value: number }
  | { type: "reset" }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "step" };

export type ReachBox = { q: string; lo: number[]; hi: number[] };

export type GatewayEvent = { tick: number; kind: string; detail: string };

export type StateMessage = {
  type: "state";
  tick: number;
  x: number;
  v: number;
  q: string;
  mode: "NOMINAL" | "RECOVERING" | "BACKUP";
  verdict: "ACCEPTED" | "FAULT" | "RECOVERING" | "BACKUP" | null;
  in_sb: boolean;
  reach: ReachBox[];
  events: GatewayEvent[];
};

export type RegionDoc = { state: string; halfspaces: number[][] };
export type LabelDoc = { letter: string[]; halfspaces: number[][] };

export type ScenarioDoc = {
  name: string;
  formula: string;
  ap: string[];
  sb: RegionDoc[];
  labels: LabelDoc[];
  x0: number[];
  frame: number[][];
  [key: string]: unknown;
};

export type ConfigMessage = {
  type: "config";
  scenario: ScenarioDoc;
  tick: number;
};

export type ErrorMessage = { type: "error"; message: string };

export type ServerMessage = StateMessage | ConfigMessage | ErrorMessage;
