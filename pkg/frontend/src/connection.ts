// Bridge connection: subscribe-on-open, auto-reconnect with backoff, and
// command gating (nothing is sent while disconnected).

import { subscribeFrame, subscriptionList } from "./protocol.js";
import { ScenePresentation } from "./presentation.js";

export type ConnectionState = "connecting" | "connected" | "disconnected" | "closed";

// Minimal WebSocket surface so the session runs in the browser and under
// node (the 'ws' package) alike.
export interface WsLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WsFactory = (url: string) => WsLike;

export interface SessionOptions {
  wsFactory: WsFactory;
  reconnectMinMs?: number;
  reconnectMaxMs?: number;
  onStateChange?: (state: ConnectionState) => void;
}

const WS_OPEN = 1;

export class ConsoleSession {
  readonly url: string;
  readonly presentation: ScenePresentation;
  state: ConnectionState = "disconnected";
  commandsSent = 0;
  commandsSuppressed = 0;

  private ws: WsLike | null = null;
  private opts: Required<Pick<SessionOptions, "reconnectMinMs" | "reconnectMaxMs">> &
    SessionOptions;
  private backoffMs: number;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;

  constructor(url: string, presentation: ScenePresentation, options: SessionOptions) {
    this.url = url;
    this.presentation = presentation;
    this.opts = { reconnectMinMs: 500, reconnectMaxMs: 8000, ...options };
    this.backoffMs = this.opts.reconnectMinMs;
  }

  connect(): void {
    if (this.stopped) return;
    this.setState("connecting");
    const ws = this.opts.wsFactory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoffMs = this.opts.reconnectMinMs;
      for (const topic of subscriptionList()) ws.send(subscribeFrame(topic));
      this.setState("connected");
    };
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") this.presentation.apply(ev.data);
      else this.presentation.apply(String(ev.data));
    };
    const drop = () => {
      if (this.ws !== ws) return;
      this.ws = null;
      if (this.stopped) {
        this.setState("closed");
        return;
      }
      this.setState("disconnected");
      this.scheduleReconnect();
    };
    ws.onclose = drop;
    ws.onerror = () => {
      // onclose follows; nothing to do here.
    };
  }

  private scheduleReconnect(): void {
    if (this.reconnectTimer !== null) return;
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.opts.reconnectMaxMs);
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, delay);
  }

  /** Send a command frame; suppressed (and counted) while not connected. */
  sendCommand(payload: string): boolean {
    if (this.state !== "connected" || this.ws === null || this.ws.readyState !== WS_OPEN) {
      this.commandsSuppressed++;
      return false;
    }
    this.ws.send(payload);
    this.commandsSent++;
    return true;
  }

  close(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.ws?.close();
    this.setState("closed");
  }

  private setState(state: ConnectionState): void {
    if (state === this.state) return;
    this.state = state;
    this.opts.onStateChange?.(state);
  }
}
