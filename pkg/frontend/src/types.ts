/** Wire types matching the render service's JSON bodies. */

export type EssMode = "none" | "block" | "distance" | "pdm";

/** One transfer-function control point; intensity in [0, 2^bits - 1], channels in [0, 1]. */
export interface TfControlPoint {
  intensity: number;
  r: number;
  g: number;
  b: number;
  a: number;
}

export interface TfRequest {
  bits: number;
  control_points: TfControlPoint[];
}

export interface TfResponse {
  selection: number[];
  select_ms: number;
  combine_ms: number;
  dprime_nonzero_fraction: number;
}

export interface InfoResponse {
  dims: [number, number, number];
  bits: number;
  n: number;
  /** Inclusive [lo, hi] intensity bounds, one per partition. */
  scheme: [number, number][];
  histogram: number[];
  block_edge: number;
  occupancy_mode: string;
}

export interface VolumeLoadRequest {
  synth?: { kind: string; dims: number | [number, number, number]; seed: number };
  path?: string;
  meta_path?: string;
  partitions?: number;
  scheme?: "uniform" | "min_special";
  occupancy?: "voxel" | "range_apron";
  block_edge?: number;
  rho_min?: number;
}

export interface VolumeLoadResponse {
  dims: [number, number, number];
  bits: number;
  n: number;
  block_edge: number;
  bdims: [number, number, number];
  one_time_init_ms: number;
  extra_memory_bytes: number;
}

export interface RenderStats {
  rays: number;
  samples_evaluated: number;
  samples_skipped: number;
  blocks_skipped: number;
  ert_terminations: number;
  wall_time: number;
}

export interface StreamRequest {
  angle: number;
  w: number;
  h: number;
  ess: EssMode;
  step: number;
}

export interface UpdateTimings {
  select_ms: number;
  combine_ms: number;
}

export interface StreamFrame {
  frame_id: number;
  /** Base64-encoded PNG. */
  image: string;
  render_stats: RenderStats;
  update_timings: UpdateTimings;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export function isErrorFrame(msg: unknown): msg is ApiErrorBody {
  return typeof msg === "object" && msg !== null && "error" in msg;
}
