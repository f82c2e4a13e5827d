/** Thin fetch wrappers over the render service's JSON endpoints. */

import type {
  EssMode,
  InfoResponse,
  TfRequest,
  TfResponse,
  VolumeLoadRequest,
  VolumeLoadResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let code = `http_${resp.status}`;
    let message = resp.statusText;
    try {
      const body = await resp.json();
      if (body && body.error) {
        code = body.error.code ?? code;
        message = body.error.message ?? message;
      } else if (body && body.detail) {
        message = JSON.stringify(body.detail);
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, code, message);
  }
  return (await resp.json()) as T;
}

function postInit(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export function loadVolume(req: VolumeLoadRequest): Promise<VolumeLoadResponse> {
  return request<VolumeLoadResponse>("/api/volume", postInit(req));
}

export function getInfo(): Promise<InfoResponse> {
  return request<InfoResponse>("/api/info");
}

export function postTf(req: TfRequest): Promise<TfResponse> {
  return request<TfResponse>("/api/tf", postInit(req));
}

export interface FrameParams {
  angle: number;
  w: number;
  h: number;
  ess: EssMode;
  step: number;
}

/** URL for the one-shot PNG endpoint; handy for "save frame" links. */
export function frameUrl(params: FrameParams): string {
  const q = new URLSearchParams({
    angle: String(params.angle),
    w: String(params.w),
    h: String(params.h),
    ess: params.ess,
    step: String(params.step),
  });
  return `/api/frame?${q.toString()}`;
}

/** ws:// or wss:// address of the frame stream for the current page. */
export function streamUrl(location: { protocol: string; host: string }): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/api/stream`;
}
