/** Client-paced frame loop over the render service's WebSocket.
 *
 * One JSON request goes out, one frame comes back, and only then is the
 * next request sent, so a slow render never piles up a queue server-side.
 * A dropped socket reconnects with exponential backoff; a successful frame
 * resets the backoff.
 */

import { isErrorFrame } from "./types.js";
import type { ApiErrorBody, StreamFrame, StreamRequest } from "./types.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface FrameLoopOptions {
  /** Builds the next request from current UI state at send time. */
  nextRequest: () => StreamRequest;
  onFrame: (frame: StreamFrame) => void;
  onErrorFrame?: (err: ApiErrorBody) => void;
  onStatus?: (status: "connecting" | "open" | "retrying") => void;
  baseDelayMs?: number;
  maxDelayMs?: number;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

export class FrameLoop {
  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly opts: FrameLoopOptions;
  private readonly setTimeoutFn: (fn: () => void, ms: number) => unknown;

  private socket: SocketLike | null = null;
  private stopped = true;
  private awaitingFrame = false;
  private failures = 0;

  constructor(url: string, factory: SocketFactory, opts: FrameLoopOptions) {
    this.url = url;
    this.factory = factory;
    this.opts = opts;
    this.setTimeoutFn = opts.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
  }

  get connected(): boolean {
    return this.socket !== null && !this.awaitingFrame;
  }

  /** Current reconnect delay; grows 2x per consecutive failure. */
  get retryDelayMs(): number {
    const base = this.opts.baseDelayMs ?? 250;
    const cap = this.opts.maxDelayMs ?? 8000;
    return Math.min(cap, base * 2 ** Math.max(0, this.failures - 1));
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.socket) {
      const s = this.socket;
      this.socket = null;
      s.onclose = null;
      s.close();
    }
  }

  /** Ask for another frame now if the previous one has painted. */
  requestFrame(): void {
    if (this.stopped || !this.socket || this.awaitingFrame) return;
    this.awaitingFrame = true;
    this.socket.send(JSON.stringify(this.opts.nextRequest()));
  }

  private connect(): void {
    this.opts.onStatus?.("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.opts.onStatus?.("open");
      this.requestFrame();
    };
    socket.onmessage = (ev) => {
      this.awaitingFrame = false;
      let msg: unknown;
      try {
        msg = JSON.parse(ev.data);
      } catch {
        return;
      }
      if (isErrorFrame(msg)) {
        this.opts.onErrorFrame?.(msg);
      } else {
        this.failures = 0;
        this.opts.onFrame(msg as StreamFrame);
      }
      this.requestFrame();
    };
    socket.onerror = () => {
      // the close handler owns reconnecting
    };
    socket.onclose = () => {
      if (this.stopped) return;
      this.socket = null;
      this.awaitingFrame = false;
      this.failures += 1;
      this.opts.onStatus?.("retrying");
      this.setTimeoutFn(() => {
        if (!this.stopped) this.connect();
      }, this.retryDelayMs);
    };
  }
}

const TWO_PI = 2 * Math.PI;

/** Orbit angle that only ever advances, reported modulo one revolution. */
export class Orbit {
  private accumulated = 0;
  speedRadPerSec: number;

  constructor(speedRadPerSec = 0.5, startAngle = 0) {
    this.speedRadPerSec = speedRadPerSec;
    this.accumulated = startAngle;
  }

  /** Advance by a wall-clock interval; negative intervals are ignored. */
  advance(dtMs: number): number {
    if (dtMs > 0) this.accumulated += (this.speedRadPerSec * dtMs) / 1000;
    return this.angle;
  }

  get angle(): number {
    return this.accumulated % TWO_PI;
  }

  set angle(value: number) {
    this.accumulated = ((value % TWO_PI) + TWO_PI) % TWO_PI;
  }
}
