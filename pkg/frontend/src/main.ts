import { SeamClient } from "./api.js";
import { BrushEngine, UndoStack } from "./strokes.js";
import { TimelineModel } from "./timeline.js";
import { ViewState } from "./state.js";
import type { Label, OverlayMode, StrokeDelta } from "./types.js";

const client = new SeamClient("");
const state = new ViewState(client);
const brush = new BrushEngine();
const undo = new UndoStack();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBadge(text: string, kind: "ok" | "busy" | "stale" | "error"): void {
  const badge = el<HTMLSpanElement>("status-badge");
  badge.textContent = text;
  badge.className = `badge ${kind}`;
}

function refreshBadge(): void {
  if (state.jobRunning) setBadge("computing…", "busy");
  else if (state.resultStale) setBadge("result stale, run again", "stale");
  else if (state.resultRevision !== null) setBadge("up to date", "ok");
  else setBadge("no result yet", "ok");
}

async function reloadPreview(): Promise<void> {
  const img = el<HTMLImageElement>("preview");
  if (state.resultRevision === null) return;
  const seam = state.overlay === "seam";
  img.src = `${client.previewUrl(state.frame, seam)}&_=${Date.now()}`;
  refreshBadge();
}

async function loadPair(): Promise<void> {
  const offset = (state.project?.params.offset as number) ?? 0;
  const timeline = new TimelineModel(
    sourceLength("a"),
    sourceLength("b"),
  );
  const pair = timeline.pairAt(state.frame, offset);
  const imgA = el<HTMLImageElement>("frame-a");
  const imgB = el<HTMLImageElement>("frame-b");
  imgA.src = pair.a === null ? "" : client.frameUrl("a", pair.a, true);
  imgB.src = pair.b === null ? "" : client.frameUrl("b", pair.b, true);
  el<HTMLSpanElement>("frame-label").textContent =
    `frame ${state.frame + 1} / ${state.project?.timeline.length ?? 0}`;
}

function sourceLength(clip: "a" | "b"): number {
  const src = state.project?.sources;
  if (!src) return 1;
  const range = clip === "a" ? src.a_range : src.b_range;
  return range[1] - range[0] + 1;
}

function collectPath(canvas: HTMLElement): void {
  let path: Array<{ x: number; y: number }> = [];
  let painting = false;

  canvas.addEventListener("pointerdown", (ev) => {
    painting = true;
    path = [{ x: ev.offsetX, y: ev.offsetY }];
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (painting) path.push({ x: ev.offsetX, y: ev.offsetY });
  });
  canvas.addEventListener("pointerup", async () => {
    if (!painting) return;
    painting = false;
    const project = state.project;
    if (!project) return;
    const [w] = [project.sources.a_range];
    void w;
    const deltas: StrokeDelta[] = brush.rasterizePath(
      path, state.zoom, frameWidth(), frameHeight(),
    );
    undo.push(state.frame, deltas);
    await state.sendStrokes(state.frame, deltas);
    refreshBadge();
  });
}

let dims = { width: 0, height: 0 };

function frameWidth(): number {
  return dims.width;
}

function frameHeight(): number {
  return dims.height;
}

async function detectDims(): Promise<void> {
  const img = new Image();
  img.src = client.frameUrl("a", 0);
  await img.decode();
  dims = { width: img.naturalWidth, height: img.naturalHeight };
}

async function boot(): Promise<void> {
  await state.refresh();
  await detectDims();
  await loadPair();
  refreshBadge();

  el<HTMLInputElement>("brush-label").addEventListener("change", (ev) => {
    brush.label = (ev.target as HTMLSelectElement).value as Label;
  });
  el<HTMLInputElement>("brush-radius").addEventListener("change", (ev) => {
    brush.radius = Number((ev.target as HTMLInputElement).value);
  });
  el<HTMLInputElement>("brush-erase").addEventListener("change", (ev) => {
    brush.erase = (ev.target as HTMLInputElement).checked;
  });
  el<HTMLSelectElement>("overlay-mode").addEventListener("change", async (ev) => {
    state.overlay = (ev.target as HTMLSelectElement).value as OverlayMode;
    await reloadPreview();
  });
  el<HTMLInputElement>("zoom").addEventListener("change", (ev) => {
    state.zoom = Number((ev.target as HTMLInputElement).value);
  });

  el<HTMLButtonElement>("prev-frame").addEventListener("click", async () => {
    state.frame = state.clampFrame(state.frame - 1);
    await loadPair();
    await reloadPreview();
  });
  el<HTMLButtonElement>("next-frame").addEventListener("click", async () => {
    state.frame = state.clampFrame(state.frame + 1);
    await loadPair();
    await reloadPreview();
  });

  el<HTMLButtonElement>("offset-left").addEventListener("click", () => changeOffset(-1));
  el<HTMLButtonElement>("offset-right").addEventListener("click", () => changeOffset(1));

  el<HTMLButtonElement>("run").addEventListener("click", async () => {
    refreshBadge();
    try {
      await state.runAndTrack("composite");
      await reloadPreview();
    } catch (err) {
      setBadge(String(err), "error");
    }
  });
  el<HTMLButtonElement>("undo").addEventListener("click", async () => {
    const deltas = undo.pop(state.frame);
    if (deltas) {
      await state.sendStrokes(state.frame, deltas);
      refreshBadge();
    }
  });

  collectPath(el("paint-surface"));
}

async function changeOffset(step: number): Promise<void> {
  const current = (state.project?.params.offset as number) ?? 0;
  const timeline = new TimelineModel(sourceLength("a"), sourceLength("b"));
  const next = current + step;
  if (!timeline.hasOverlap(next)) {
    setBadge("offset would leave no overlap", "error");
    return;
  }
  await state.applyOffset(next);
  await loadPair();
  refreshBadge();
}

boot().catch((err) => setBadge(String(err), "error"));
