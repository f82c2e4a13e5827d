/** Timing panel state: frame time every frame, update time only when earned.
 *
 * The select+combine bar reflects work the server only does when the
 * transfer function changes, so it is attached to the first frame after a
 * TF response and absent while the TF sits still.
 */

import type { RenderStats, UpdateTimings } from "./types.js";

export interface PanelFrame {
  frameMs: number;
  samplesEvaluated: number;
  /** Present only on the first frame after a TF change. */
  update: UpdateTimings | null;
}

export class TimingPanelModel {
  private pendingUpdate: UpdateTimings | null = null;
  lastFrame: PanelFrame | null = null;

  /** Record a TF response; the next frame will carry its update bar. */
  noteTfUpdate(timings: UpdateTimings): void {
    this.pendingUpdate = { ...timings };
  }

  /** Fold in one rendered frame, consuming any pending update timing. */
  noteFrame(stats: RenderStats): PanelFrame {
    const frame: PanelFrame = {
      frameMs: stats.wall_time * 1000,
      samplesEvaluated: stats.samples_evaluated,
      update: this.pendingUpdate,
    };
    this.pendingUpdate = null;
    this.lastFrame = frame;
    return frame;
  }
}

/** Bar width fraction for a duration against a full-scale duration. */
export function barFraction(ms: number, fullScaleMs: number): number {
  if (fullScaleMs <= 0) return 0;
  return Math.min(1, Math.max(0, ms / fullScaleMs));
}
