/** Canvas transfer-function editor: alpha curve over a histogram underlay.
 *
 * Pointer math and drag state live here against a structural 2D-context
 * type, so the logic runs under tests without a real canvas. Intensity maps
 * to x, alpha to y (inverted, origin top-left).
 */

import { TfModel } from "./tf.js";

export const HANDLE_RADIUS = 7;

export interface Ctx2dLike {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
}

export function toPixel(
  intensity: number,
  alpha: number,
  w: number,
  h: number,
  maxIntensity: number,
): [number, number] {
  return [(intensity / maxIntensity) * w, (1 - alpha) * h];
}

export function fromPixel(
  px: number,
  py: number,
  w: number,
  h: number,
  maxIntensity: number,
): { intensity: number; alpha: number } {
  return {
    intensity: (px / w) * maxIntensity,
    alpha: 1 - py / h,
  };
}

/** Index of the nearest control point within the grab radius, or -1. */
export function hitTest(
  model: TfModel,
  px: number,
  py: number,
  w: number,
  h: number,
  radius = HANDLE_RADIUS + 3,
): number {
  let best = -1;
  let bestDist = radius;
  const pts = model.list();
  for (let i = 0; i < pts.length; i++) {
    const [x, y] = toPixel(pts[i].intensity, pts[i].a, w, h, model.maxIntensity);
    const d = Math.hypot(px - x, py - y);
    if (d <= bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

export interface EditorCallbacks {
  /** Fires on every model mutation; wiring debounces the actual upload. */
  onEdit: () => void;
}

export class TfEditor {
  readonly model: TfModel;
  width: number;
  height: number;
  private readonly callbacks: EditorCallbacks;
  private dragIndex = -1;

  constructor(model: TfModel, width: number, height: number, callbacks: EditorCallbacks) {
    this.model = model;
    this.width = width;
    this.height = height;
    this.callbacks = callbacks;
  }

  get dragging(): boolean {
    return this.dragIndex >= 0;
  }

  /** Grab an existing point, or create one under the cursor and grab it. */
  pointerDown(px: number, py: number): void {
    let idx = hitTest(this.model, px, py, this.width, this.height);
    if (idx < 0) {
      const { intensity, alpha } = fromPixel(px, py, this.width, this.height, this.model.maxIntensity);
      idx = this.model.addPoint({ intensity, r: 1, g: 1, b: 1, a: alpha });
      if (idx < 0) return; // no room between the surrounding points
      this.callbacks.onEdit();
    }
    this.dragIndex = idx;
  }

  pointerMove(px: number, py: number): void {
    if (this.dragIndex < 0) return;
    const { intensity, alpha } = fromPixel(px, py, this.width, this.height, this.model.maxIntensity);
    this.model.movePoint(this.dragIndex, intensity, alpha);
    this.callbacks.onEdit();
  }

  pointerUp(): void {
    this.dragIndex = -1;
  }

  /** Double-click removes interior points; endpoints stay. */
  doubleClick(px: number, py: number): void {
    const idx = hitTest(this.model, px, py, this.width, this.height);
    if (idx >= 0 && this.model.removePoint(idx)) {
      this.dragIndex = -1;
      this.callbacks.onEdit();
    }
  }

  draw(ctx: Ctx2dLike, bars: number[], boundaries: number[]): void {
    const { width: w, height: h } = this;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#14141c";
    ctx.fillRect(0, 0, w, h);

    ctx.fillStyle = "#2c3e5d";
    const barW = w / Math.max(1, bars.length);
    for (let i = 0; i < bars.length; i++) {
      const bh = bars[i] * h;
      if (bh > 0) ctx.fillRect(i * barW, h - bh, barW, bh);
    }

    ctx.strokeStyle = "#3a3a4a";
    ctx.lineWidth = 1;
    for (const x of boundaries) {
      ctx.beginPath();
      ctx.moveTo(x * w, 0);
      ctx.lineTo(x * w, h);
      ctx.stroke();
    }

    const pts = this.model.list();
    ctx.strokeStyle = "#e8e8f0";
    ctx.lineWidth = 2;
    ctx.beginPath();
    for (let i = 0; i < pts.length; i++) {
      const [x, y] = toPixel(pts[i].intensity, pts[i].a, w, h, this.model.maxIntensity);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.stroke();

    for (let i = 0; i < pts.length; i++) {
      const [x, y] = toPixel(pts[i].intensity, pts[i].a, w, h, this.model.maxIntensity);
      ctx.fillStyle = cssColor(pts[i].r, pts[i].g, pts[i].b);
      ctx.beginPath();
      ctx.arc(x, y, HANDLE_RADIUS, 0, 2 * Math.PI);
      ctx.fill();
      ctx.strokeStyle = this.model.isEndpoint(i) ? "#ffb454" : "#ffffff";
      ctx.stroke();
    }
  }
}

export function cssColor(r: number, g: number, b: number): string {
  const c = (v: number) => Math.round(Math.min(1, Math.max(0, v)) * 255);
  return `rgb(${c(r)}, ${c(g)}, ${c(b)})`;
}
