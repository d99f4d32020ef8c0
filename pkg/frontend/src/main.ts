import { ApiClient } from "./api.js";
import { actionForKey, KEY_HELP, type Action } from "./keyboard.js";
import {
  fitView,
  polylinePoints,
  strokeFor,
  strokeWidthFor,
  zoomAt,
  type View,
} from "./overlay.js";
import { ReviewSession } from "./state.js";
import type { ImageRow, Status } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const api = new ApiClient(window.location.origin);
const session = new ReviewSession();

let images: ImageRow[] = [];
let imageCursor = -1;
let view: View = { zoom: 1, panX: 0, panY: 0 };

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

const sidebar = $("image-list");
const viewer = $("viewer");
const statusBar = $("status-bar");
const banner = $("stale-banner");
const toast = $("toast");

function currentImage(): ImageRow | null {
  return images[imageCursor] ?? null;
}

async function refreshListing(): Promise<void> {
  images = await api.listImages();
  renderSidebar();
}

async function openImage(index: number): Promise<void> {
  if (index < 0 || index >= images.length) return;
  imageCursor = index;
  const row = images[index];
  if (!row) return;
  session.load(await api.getSegments(row.id));
  const box = viewer.getBoundingClientRect();
  view = fitView(row.width, row.height, box.width, box.height);
  renderAll();
}

function renderSidebar(): void {
  sidebar.textContent = "";
  images.forEach((row, i) => {
    const li = document.createElement("li");
    li.className = i === imageCursor ? "selected" : "";
    const done = row.counts.confirmed + row.counts.rejected;
    li.textContent = `${row.id} (${done}/${row.n_segments})`;
    li.addEventListener("click", () => void openImage(i));
    sidebar.appendChild(li);
  });
}

function renderViewer(): void {
  viewer.textContent = "";
  const payload = session.payload;
  const row = currentImage();
  if (!payload || !row) return;

  const box = viewer.getBoundingClientRect();
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(box.width));
  svg.setAttribute("height", String(box.height));

  const image = document.createElementNS(SVG_NS, "image");
  image.setAttribute("href", api.rawImageUrl(payload.id));
  image.setAttribute("x", String(view.panX));
  image.setAttribute("y", String(view.panY));
  image.setAttribute("width", String(payload.width * view.zoom));
  image.setAttribute("height", String(payload.height * view.zoom));
  image.setAttribute("preserveAspectRatio", "none");
  svg.appendChild(image);

  payload.segments.forEach((seg, i) => {
    const selected = i === session.cursor;
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", polylinePoints(seg.points, view));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", strokeFor(seg, selected));
    line.setAttribute("stroke-width", String(strokeWidthFor(selected)));
    line.addEventListener("click", () => {
      session.cursor = i;
      renderAll();
    });
    svg.appendChild(line);
  });

  svg.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = svg.getBoundingClientRect();
    const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
    view = zoomAt(view, factor, ev.clientX - rect.left, ev.clientY - rect.top);
    renderViewer();
  });

  viewer.appendChild(svg);
}

function renderStatus(): void {
  const row = currentImage();
  const seg = session.current();
  if (!row || !session.payload) {
    statusBar.textContent = "no image loaded";
    return;
  }
  const counts = session.counts();
  const parts = [
    row.id,
    seg
      ? `segment ${session.cursor + 1}/${session.payload.segments.length} [${seg.status}]`
      : "no segments",
    `confirmed ${counts.confirmed}, rejected ${counts.rejected}, candidate ${counts.candidate}`,
    `version ${session.version}`,
  ];
  if (session.hasPending) parts.push("saving…");
  statusBar.textContent = parts.join("  ·  ");
  banner.hidden = !session.isStale;
  if (session.isStale) {
    $("stale-text").textContent =
      `Another reviewer updated this image (server version ${session.staleVersion}). ` +
      "Reload to continue.";
  }
}

function renderAll(): void {
  renderSidebar();
  renderViewer();
  renderStatus();
}

function showToast(message: string): void {
  toast.textContent = message;
  toast.hidden = false;
  window.setTimeout(() => {
    toast.hidden = true;
  }, 2500);
}

async function mark(status: Status): Promise<void> {
  const row = currentImage();
  const write = session.requestMark(status);
  if (!row || !write) return;
  renderStatus();
  const result = await api.putStatus(row.id, write.index, write.status, write.version);
  if (result.kind === "ok") {
    session.ackPending(result.version);
    session.advance();
  } else if (result.kind === "stale") {
    session.failPendingStale(result.version);
  } else {
    session.abortPending();
    showToast(result.message);
  }
  await refreshListing();
  renderAll();
}

async function undo(): Promise<void> {
  const row = currentImage();
  const write = session.requestUndo();
  if (!row || !write) return;
  const result = await api.putStatus(row.id, write.index, write.status, write.version);
  if (result.kind === "ok") {
    session.ackPending(result.version);
    session.cursor = write.index;
  } else if (result.kind === "stale") {
    session.failPendingStale(result.version);
  } else {
    session.abortPending();
    showToast(result.message);
  }
  await refreshListing();
  renderAll();
}

async function exportConfirmed(): Promise<void> {
  const payload = await api.exportAll();
  const blob = new Blob([JSON.stringify(payload, null, 2)], {
    type: "application/json",
  });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = "confirmed-segments.json";
  a.click();
  URL.revokeObjectURL(url);
  showToast(`exported ${Object.keys(payload.files).length} file(s)`);
}

async function act(action: Action): Promise<void> {
  switch (action) {
    case "confirm":
      await mark("confirmed");
      break;
    case "reject":
      await mark("rejected");
      break;
    case "next-segment":
      session.advance();
      renderAll();
      break;
    case "prev-segment":
      session.retreat();
      renderAll();
      break;
    case "undo":
      await undo();
      break;
    case "next-image":
      await openImage(imageCursor + 1);
      break;
    case "prev-image":
      await openImage(imageCursor - 1);
      break;
    case "reload":
      await openImage(imageCursor);
      break;
    case "export":
      await exportConfirmed();
      break;
  }
}

function renderHelp(): void {
  const help = $("key-help");
  help.textContent = "";
  for (const [keys, what] of KEY_HELP) {
    const li = document.createElement("li");
    const kbd = document.createElement("kbd");
    kbd.textContent = keys;
    li.appendChild(kbd);
    li.appendChild(document.createTextNode(` ${what}`));
    help.appendChild(li);
  }
}

async function init(): Promise<void> {
  renderHelp();
  $("reload-button").addEventListener("click", () => void act("reload"));
  $("export-button").addEventListener("click", () => void act("export"));
  window.addEventListener("keydown", (ev) => {
    const action = actionForKey(ev.key, {
      ctrl: ev.ctrlKey,
      alt: ev.altKey,
      meta: ev.metaKey,
    });
    if (!action) return;
    ev.preventDefault();
    void act(action);
  });
  window.addEventListener("resize", () => {
    const row = currentImage();
    if (!row) return;
    const box = viewer.getBoundingClientRect();
    view = fitView(row.width, row.height, box.width, box.height);
    renderViewer();
  });
  await refreshListing();
  if (images.length > 0) await openImage(0);
  renderStatus();
}

void init().catch((err) => {
  statusBar.textContent = `failed to load: ${err}`;
});
