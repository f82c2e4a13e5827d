/** Editable control-point model for a transfer function.
 *
 * Points stay sorted by intensity and the two endpoints are pinned to the
 * ends of the intensity range: they can change color and alpha but never
 * move horizontally, and they cannot be removed. The server rejects
 * non-increasing intensities, so interior drags clamp against their
 * neighbors with a small gap.
 */

import type { TfControlPoint, TfRequest } from "./types.js";

const MIN_GAP = 1e-3;

export class TfModel {
  readonly bits: number;
  private points: TfControlPoint[];

  constructor(bits = 8, points?: TfControlPoint[]) {
    this.bits = bits;
    const max = this.maxIntensity;
    if (points && points.length >= 2) {
      const sorted = points
        .map((p) => ({ ...p }))
        .sort((a, b) => a.intensity - b.intensity);
      sorted[0].intensity = 0;
      sorted[sorted.length - 1].intensity = max;
      this.points = sorted;
    } else {
      // default: a mid-range bump so a fresh session shows something
      this.points = [
        { intensity: 0, r: 0, g: 0, b: 0, a: 0 },
        { intensity: max * 0.45, r: 0.9, g: 0.55, b: 0.2, a: 0.0 },
        { intensity: max * 0.62, r: 0.95, g: 0.8, b: 0.45, a: 0.55 },
        { intensity: max, r: 1, g: 1, b: 1, a: 0.75 },
      ];
    }
  }

  get maxIntensity(): number {
    return (1 << this.bits) - 1;
  }

  /** Sorted copy; mutate only through the methods below. */
  list(): TfControlPoint[] {
    return this.points.map((p) => ({ ...p }));
  }

  get length(): number {
    return this.points.length;
  }

  isEndpoint(index: number): boolean {
    return index === 0 || index === this.points.length - 1;
  }

  /** Insert a point, keeping intensities strictly increasing. Returns its
   * index, or -1 when the gap between the surrounding points is too narrow. */
  addPoint(point: TfControlPoint): number {
    const p = { ...point };
    p.intensity = clamp(p.intensity, MIN_GAP, this.maxIntensity - MIN_GAP);
    p.a = clamp(p.a, 0, 1);
    // the pinned right endpoint guarantees a strictly greater entry exists
    const i = this.points.findIndex((q) => q.intensity > p.intensity);
    const lo = this.points[i - 1].intensity + MIN_GAP;
    const hi = this.points[i].intensity - MIN_GAP;
    if (lo > hi) return -1;
    p.intensity = clamp(p.intensity, lo, hi);
    this.points.splice(i, 0, p);
    return i;
  }

  /** Move a point; endpoints only move vertically, interiors clamp between neighbors. */
  movePoint(index: number, intensity: number, alpha: number): void {
    const p = this.points[index];
    if (!p) return;
    if (!this.isEndpoint(index)) {
      const lo = this.points[index - 1].intensity + MIN_GAP;
      const hi = this.points[index + 1].intensity - MIN_GAP;
      p.intensity = clamp(intensity, lo, hi);
    }
    p.a = clamp(alpha, 0, 1);
  }

  setColor(index: number, r: number, g: number, b: number): void {
    const p = this.points[index];
    if (!p) return;
    p.r = clamp(r, 0, 1);
    p.g = clamp(g, 0, 1);
    p.b = clamp(b, 0, 1);
  }

  /** Remove an interior point. Endpoints are refused. */
  removePoint(index: number): boolean {
    if (this.isEndpoint(index) || index < 0 || index >= this.points.length) {
      return false;
    }
    this.points.splice(index, 1);
    return true;
  }

  /** Piecewise-linear alpha at an intensity, for drawing the curve. */
  alphaAt(intensity: number): number {
    const pts = this.points;
    if (intensity <= pts[0].intensity) return pts[0].a;
    for (let i = 1; i < pts.length; i++) {
      if (intensity <= pts[i].intensity) {
        const t =
          (intensity - pts[i - 1].intensity) /
          (pts[i].intensity - pts[i - 1].intensity);
        return pts[i - 1].a + t * (pts[i].a - pts[i - 1].a);
      }
    }
    return pts[pts.length - 1].a;
  }

  toRequest(): TfRequest {
    return { bits: this.bits, control_points: this.list() };
  }
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

/** Badge text for the selected-partitions selection list. */
export function formatSelection(selection: number[], n: number): string {
  if (selection.length === 0) return "∅";
  if (selection.length === n) return `all ${n}`;
  return `${selection.length} of ${n}: ${selection.join(", ")}`;
}
