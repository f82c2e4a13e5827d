/** Histogram underlay scaling and partition gridline placement. */

/** Log-scale bar heights in [0, 1]; empty bins stay at 0. */
export function logBars(counts: number[]): number[] {
  let max = 0;
  for (const c of counts) max = Math.max(max, c);
  if (max <= 0) return counts.map(() => 0);
  const denom = Math.log1p(max);
  return counts.map((c) => (c > 0 ? Math.log1p(c) / denom : 0));
}

/** Normalized x positions of the boundaries between consecutive partitions.
 *
 * For partitions covering [0, span - 1] the line between [lo, hi] and the
 * next partition sits at (hi + 1) / span; the outer edges get no line.
 */
export function partitionBoundaries(
  scheme: [number, number][],
  span: number,
): number[] {
  const xs: number[] = [];
  for (let i = 0; i + 1 < scheme.length; i++) {
    xs.push((scheme[i][1] + 1) / span);
  }
  return xs;
}
