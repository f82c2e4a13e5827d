/** Page wiring: DOM events in, service calls out. All logic with behavior
 * worth testing lives in the imported modules; this file only connects them
 * to elements and the real WebSocket/fetch.
 */

import { ApiError, frameUrl, getInfo, loadVolume, postTf, streamUrl } from "./api.js";
import { TfChannel } from "./channel.js";
import { TfEditor } from "./editor.js";
import { logBars, partitionBoundaries } from "./histogram.js";
import { FrameLoop, Orbit } from "./stream.js";
import type { SocketLike } from "./stream.js";
import { TfModel, formatSelection } from "./tf.js";
import { TimingPanelModel, barFraction } from "./timings.js";
import type { Ctx2dLike } from "./editor.js";
import type { EssMode, StreamFrame } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const viewport = el<HTMLImageElement>("viewport");
const editorCanvas = el<HTMLCanvasElement>("tf-editor");
const selectionBadge = el<HTMLSpanElement>("badge-selection");
const partitionBadge = el<HTMLSpanElement>("badge-n");
const fractionBadge = el<HTMLSpanElement>("badge-fraction");
const statusLine = el<HTMLSpanElement>("status");
const toast = el<HTMLDivElement>("toast");
const statsLine = el<HTMLSpanElement>("stats");
const updateBar = el<HTMLDivElement>("bar-update");
const frameBar = el<HTMLDivElement>("bar-frame");
const updateLabel = el<HTMLSpanElement>("label-update");
const frameLabel = el<HTMLSpanElement>("label-frame");
const updateRow = el<HTMLDivElement>("row-update");
const essSelect = el<HTMLSelectElement>("ess-mode");
const stepSelect = el<HTMLSelectElement>("step");
const autorotate = el<HTMLInputElement>("autorotate");
const angleSlider = el<HTMLInputElement>("angle");
const kindSelect = el<HTMLSelectElement>("volume-kind");
const dimsInput = el<HTMLInputElement>("volume-dims");
const partitionsInput = el<HTMLInputElement>("volume-partitions");
const schemeSelect = el<HTMLSelectElement>("volume-scheme");
const loadButton = el<HTMLButtonElement>("load-volume");
const saveLink = el<HTMLAnchorElement>("save-frame");

let toastTimer: number | undefined;
function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  window.clearTimeout(toastTimer);
  toastTimer = window.setTimeout(() => toast.classList.remove("visible"), 4000);
}

const model = new TfModel(8);
let histogramBars: number[] = [];
let boundaries: number[] = [];

const editor = new TfEditor(model, editorCanvas.width, editorCanvas.height, {
  onEdit: () => {
    redrawEditor();
    channel.push(model.toRequest());
  },
});

function redrawEditor(): void {
  const ctx = editorCanvas.getContext("2d");
  if (ctx) editor.draw(ctx as unknown as Ctx2dLike, histogramBars, boundaries);
}

const panel = new TimingPanelModel();

const channel = new TfChannel(postTf, {
  onResult: (res) => {
    selectionBadge.textContent = formatSelection(res.selection, currentN);
    fractionBadge.textContent = `${(res.dprime_nonzero_fraction * 100).toFixed(1)}% blocks occupied`;
    panel.noteTfUpdate({ select_ms: res.select_ms, combine_ms: res.combine_ms });
  },
  onError: (err) => {
    showToast(err instanceof ApiError ? `TF rejected: ${err.message}` : String(err));
  },
});

const orbit = new Orbit(0.4);
let currentN = 64;

function currentRequest() {
  return {
    angle: orbit.angle,
    w: 384,
    h: 384,
    ess: essSelect.value as EssMode,
    step: Number(stepSelect.value),
  };
}

function paintFrame(frame: StreamFrame): void {
  viewport.src = `data:image/png;base64,${frame.image}`;
  // the socket echoes the last TF post's timings with every frame; the panel
  // model decides when they were newly earned, so only it gates the bar
  const shown = panel.noteFrame(frame.render_stats);
  const updateMs = shown.update ? shown.update.select_ms + shown.update.combine_ms : 0;
  const fullScale = Math.max(shown.frameMs, updateMs, 33);
  frameBar.style.width = `${barFraction(shown.frameMs, fullScale) * 100}%`;
  frameLabel.textContent = `frame ${shown.frameMs.toFixed(1)} ms`;
  if (shown.update) {
    updateRow.classList.add("visible");
    updateBar.style.width = `${barFraction(updateMs, fullScale) * 100}%`;
    updateLabel.textContent = `tf update ${updateMs.toFixed(2)} ms (select ${shown.update.select_ms.toFixed(2)} + combine ${shown.update.combine_ms.toFixed(2)})`;
  } else {
    updateRow.classList.remove("visible");
  }
  const s = frame.render_stats;
  statsLine.textContent =
    `${s.rays} rays, ${s.samples_evaluated.toLocaleString()} evaluated, ` +
    `${s.samples_skipped.toLocaleString()} skipped, ${s.ert_terminations} early exits`;
  saveLink.href = frameUrl(currentRequest());
}

// the DOM WebSocket's event-typed handler slots satisfy SocketLike at runtime
const makeSocket = (url: string) => new WebSocket(url) as unknown as SocketLike;

const loop = new FrameLoop(streamUrl(window.location), makeSocket, {
  nextRequest: currentRequest,
  onFrame: paintFrame,
  onErrorFrame: (err) => {
    statusLine.textContent = `server: ${err.error.code}`;
  },
  onStatus: (status) => {
    statusLine.textContent = status === "open" ? "live" : status;
  },
});

let lastTick = performance.now();
function tick(now: number): void {
  if (autorotate.checked) {
    orbit.advance(now - lastTick);
    angleSlider.value = String(orbit.angle);
  }
  lastTick = now;
  window.requestAnimationFrame(tick);
}

angleSlider.addEventListener("input", () => {
  orbit.angle = Number(angleSlider.value);
});

editorCanvas.addEventListener("pointerdown", (ev) => {
  editorCanvas.setPointerCapture(ev.pointerId);
  const rect = editorCanvas.getBoundingClientRect();
  editor.pointerDown(ev.clientX - rect.left, ev.clientY - rect.top);
});
editorCanvas.addEventListener("pointermove", (ev) => {
  if (!editor.dragging) return;
  const rect = editorCanvas.getBoundingClientRect();
  editor.pointerMove(ev.clientX - rect.left, ev.clientY - rect.top);
});
editorCanvas.addEventListener("pointerup", () => editor.pointerUp());
editorCanvas.addEventListener("dblclick", (ev) => {
  const rect = editorCanvas.getBoundingClientRect();
  editor.doubleClick(ev.clientX - rect.left, ev.clientY - rect.top);
});

async function loadSession(): Promise<void> {
  loadButton.disabled = true;
  statusLine.textContent = "loading volume";
  try {
    const dims = Number(dimsInput.value) || 128;
    const loaded = await loadVolume({
      synth: { kind: kindSelect.value, dims, seed: 0 },
      partitions: Number(partitionsInput.value) || 64,
      scheme: schemeSelect.value as "uniform" | "min_special",
    });
    currentN = loaded.n;
    partitionBadge.textContent =
      `${loaded.n} partitions, ${(loaded.extra_memory_bytes / 1024).toFixed(0)} KiB maps, ` +
      `built in ${loaded.one_time_init_ms.toFixed(0)} ms`;
    const info = await getInfo();
    histogramBars = logBars(info.histogram);
    boundaries = partitionBoundaries(info.scheme, 1 << info.bits);
    redrawEditor();
    channel.push(model.toRequest());
    channel.flush();
    loop.start();
  } catch (err) {
    showToast(err instanceof ApiError ? `load failed: ${err.message}` : String(err));
    statusLine.textContent = "no session";
  } finally {
    loadButton.disabled = false;
  }
}

loadButton.addEventListener("click", () => void loadSession());

redrawEditor();
window.requestAnimationFrame(tick);
void loadSession();
