import type { ClientMessage, ServerMessage } from "./protocol.js";

export type ClientHandlers = {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (connected: boolean) => void;
};

// Thin wrapper around the gateway socket. All simulation state lives on
// the server; this class only ships frames back and forth.
export class GatewayClient {
  private ws: WebSocket | null = null;
  private handlers: ClientHandlers;
  private url: string;
  connected = false;

  constructor(url: string, handlers: ClientHandlers) {
    this.url = url;
    this.handlers = handlers;
  }

  connect() {
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.connected = true;
      this.handlers.onStatus(true);
    };
    this.ws.onclose = () => {
      this.connected = false;
      this.handlers.onStatus(false);
    };
    this.ws.onerror = () => {
      this.connected = false;
      this.handlers.onStatus(false);
    };
    this.ws.onmessage = (event) => {
      this.handlers.onMessage(JSON.parse(event.data) as ServerMessage);
    };
  }

  send(msg: ClientMessage) {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  sendThrottle(value: number) {
    this.send({ type: "throttle", value });
  }

  sessionControl(action: "reset" | "pause" | "resume") {
    this.send({ type: action });
  }
}
