/** Debounced transfer-function uploads with at most one request in flight.
 *
 * Drag events arrive far faster than the server needs to see them; pushes
 * within the debounce window collapse to the newest payload, and while a
 * request is in flight the newest payload waits for it to settle. Failures
 * surface through the error callback and never touch the caller's state.
 */

import type { TfRequest, TfResponse } from "./types.js";

export type PostTf = (payload: TfRequest) => Promise<TfResponse>;

export interface TfChannelOptions {
  debounceMs?: number;
  onResult: (res: TfResponse) => void;
  onError: (err: unknown) => void;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
  clearTimeoutFn?: (handle: unknown) => void;
}

export class TfChannel {
  private readonly post: PostTf;
  private readonly debounceMs: number;
  private readonly onResult: (res: TfResponse) => void;
  private readonly onError: (err: unknown) => void;
  private readonly setTimeoutFn: (fn: () => void, ms: number) => unknown;
  private readonly clearTimeoutFn: (handle: unknown) => void;

  private timer: unknown = null;
  private waiting: TfRequest | null = null;
  private flying = false;

  constructor(post: PostTf, opts: TfChannelOptions) {
    this.post = post;
    this.debounceMs = opts.debounceMs ?? 50;
    this.onResult = opts.onResult;
    this.onError = opts.onError;
    this.setTimeoutFn = opts.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimeoutFn = opts.clearTimeoutFn ?? ((h) => clearTimeout(h as never));
  }

  get inFlight(): boolean {
    return this.flying;
  }

  /** Queue a payload; only the newest one within the window is sent. */
  push(payload: TfRequest): void {
    this.waiting = payload;
    if (this.timer !== null) this.clearTimeoutFn(this.timer);
    this.timer = this.setTimeoutFn(() => {
      this.timer = null;
      this.maybeSend();
    }, this.debounceMs);
  }

  /** Send the queued payload immediately if nothing is in flight. */
  flush(): void {
    if (this.timer !== null) {
      this.clearTimeoutFn(this.timer);
      this.timer = null;
    }
    this.maybeSend();
  }

  private maybeSend(): void {
    if (this.flying || this.waiting === null) return;
    const payload = this.waiting;
    this.waiting = null;
    this.flying = true;
    this.post(payload).then(
      (res) => {
        this.flying = false;
        this.onResult(res);
        this.maybeSend(); // a newer payload may have queued meanwhile
      },
      (err) => {
        this.flying = false;
        this.onError(err);
        this.maybeSend();
      },
    );
  }
}
