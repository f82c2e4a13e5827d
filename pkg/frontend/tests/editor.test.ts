import { describe, expect, it } from "vitest";

import { TfEditor, cssColor, fromPixel, hitTest, toPixel } from "../src/editor.js";
import type { Ctx2dLike } from "../src/editor.js";
import { TfModel } from "../src/tf.js";

const W = 512;
const H = 256;

function makeEditor() {
  let edits = 0;
  const model = new TfModel(8, [
    { intensity: 0, r: 0, g: 0, b: 0, a: 0 },
    { intensity: 128, r: 1, g: 0, b: 0, a: 0.5 },
    { intensity: 255, r: 1, g: 1, b: 1, a: 1 },
  ]);
  const editor = new TfEditor(model, W, H, { onEdit: () => edits++ });
  return { editor, model, edits: () => edits };
}

describe("pixel mapping", () => {
  it("round-trips intensity/alpha through pixel space", () => {
    const [px, py] = toPixel(128, 0.25, W, H, 255);
    const back = fromPixel(px, py, W, H, 255);
    expect(back.intensity).toBeCloseTo(128);
    expect(back.alpha).toBeCloseTo(0.25);
  });

  it("puts alpha 1 at the top and alpha 0 at the bottom", () => {
    expect(toPixel(0, 1, W, H, 255)[1]).toBe(0);
    expect(toPixel(0, 0, W, H, 255)[1]).toBe(H);
  });
});

describe("hitTest", () => {
  it("finds a point within the grab radius and misses outside it", () => {
    const { model } = makeEditor();
    const [px, py] = toPixel(128, 0.5, W, H, 255);
    expect(hitTest(model, px + 3, py - 3, W, H)).toBe(1);
    expect(hitTest(model, px + 60, py, W, H)).toBe(-1);
  });

  it("prefers the nearest of overlapping points", () => {
    const model = new TfModel(8, [
      { intensity: 0, r: 0, g: 0, b: 0, a: 0.5 },
      { intensity: 4, r: 0, g: 0, b: 0, a: 0.5 },
      { intensity: 255, r: 0, g: 0, b: 0, a: 0 },
    ]);
    const [px, py] = toPixel(4, 0.5, W, H, 255);
    expect(hitTest(model, px + 1, py, W, H)).toBe(1);
  });
});

describe("TfEditor interactions", () => {
  it("dragging an existing point moves it and reports edits", () => {
    const { editor, model, edits } = makeEditor();
    const [px, py] = toPixel(128, 0.5, W, H, 255);
    editor.pointerDown(px, py);
    expect(editor.dragging).toBe(true);
    editor.pointerMove(px + 30, py - 40);
    editor.pointerUp();
    const moved = model.list()[1];
    expect(moved.intensity).toBeGreaterThan(128);
    expect(moved.a).toBeGreaterThan(0.5);
    expect(edits()).toBeGreaterThan(0);
    expect(editor.dragging).toBe(false);
  });

  it("clicking empty space adds a point and starts dragging it", () => {
    const { editor, model, edits } = makeEditor();
    const before = model.length;
    editor.pointerDown(toPixel(64, 0.8, W, H, 255)[0], toPixel(64, 0.8, W, H, 255)[1]);
    expect(model.length).toBe(before + 1);
    expect(editor.dragging).toBe(true);
    expect(edits()).toBe(1);
  });

  it("double-click removes interior points but not endpoints", () => {
    const { editor, model } = makeEditor();
    const [ex, ey] = toPixel(0, 0, W, H, 255);
    editor.doubleClick(ex, ey);
    expect(model.length).toBe(3); // endpoint survives

    const [px, py] = toPixel(128, 0.5, W, H, 255);
    editor.doubleClick(px, py);
    expect(model.length).toBe(2);
  });

  it("dragging an endpoint changes only its alpha", () => {
    const { editor, model } = makeEditor();
    const [px, py] = toPixel(0, 0, W, H, 255);
    editor.pointerDown(px, py);
    editor.pointerMove(px + 100, py - 50);
    editor.pointerUp();
    const endpoint = model.list()[0];
    expect(endpoint.intensity).toBe(0);
    expect(endpoint.a).toBeGreaterThan(0);
  });
});

describe("drawing", () => {
  it("issues histogram bars, gridlines, curve, and handles to the context", () => {
    const calls: string[] = [];
    const ctx: Ctx2dLike = {
      clearRect: () => calls.push("clearRect"),
      fillRect: () => calls.push("fillRect"),
      beginPath: () => calls.push("beginPath"),
      moveTo: () => calls.push("moveTo"),
      lineTo: () => calls.push("lineTo"),
      arc: () => calls.push("arc"),
      stroke: () => calls.push("stroke"),
      fill: () => calls.push("fill"),
      fillStyle: "",
      strokeStyle: "",
      lineWidth: 1,
      globalAlpha: 1,
    };
    const { editor, model } = makeEditor();
    editor.draw(ctx, [0.5, 1.0], [0.5]);
    expect(calls[0]).toBe("clearRect");
    const count = (name: string) => calls.filter((c) => c === name).length;
    expect(count("fillRect")).toBe(1 + 2); // background plus two bars
    expect(count("arc")).toBe(model.length); // one handle per point
    expect(count("lineTo")).toBeGreaterThanOrEqual(model.length - 1 + 1); // curve + gridline
  });

  it("formats css colors from unit floats", () => {
    expect(cssColor(1, 0.5, 0)).toBe("rgb(255, 128, 0)");
    expect(cssColor(-1, 2, 0.25)).toBe("rgb(0, 255, 64)");
  });
});
