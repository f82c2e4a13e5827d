import { describe, expect, it } from "vitest";

import { logBars, partitionBoundaries } from "../src/histogram.js";

describe("logBars", () => {
  it("maps the largest bin to 1 and empty bins to 0", () => {
    const bars = logBars([0, 1, 100, 10000]);
    expect(bars[0]).toBe(0);
    expect(bars[3]).toBe(1);
    expect(bars[1]).toBeGreaterThan(0);
    expect(bars[1]).toBeLessThan(bars[2]);
    expect(bars[2]).toBeLessThan(bars[3]);
  });

  it("compresses the range: a 10000x count gap stays visible", () => {
    const bars = logBars([1, 10000]);
    // linear scaling would leave the small bin at 1e-4; log keeps it readable
    expect(bars[0]).toBeGreaterThan(0.05);
  });

  it("handles an all-zero histogram", () => {
    expect(logBars([0, 0, 0])).toEqual([0, 0, 0]);
  });
});

describe("partitionBoundaries", () => {
  it("places a line between consecutive partitions, none at the outer edges", () => {
    const scheme: [number, number][] = [
      [0, 63],
      [64, 127],
      [128, 191],
      [192, 255],
    ];
    expect(partitionBoundaries(scheme, 256)).toEqual([0.25, 0.5, 0.75]);
  });

  it("follows uneven partitions", () => {
    const scheme: [number, number][] = [
      [0, 0],
      [1, 128],
      [129, 255],
    ];
    const xs = partitionBoundaries(scheme, 256);
    expect(xs.length).toBe(2);
    expect(xs[0]).toBeCloseTo(1 / 256);
    expect(xs[1]).toBeCloseTo(129 / 256);
  });

  it("draws nothing for a single partition", () => {
    expect(partitionBoundaries([[0, 255]], 256)).toEqual([]);
  });
});
