import type { SegmentView, Status } from "./types.js";

/** Pure image-to-screen mapping: screen = point * zoom + pan. */
export interface View {
  zoom: number;
  panX: number;
  panY: number;
}

export function transformPoint(
  point: readonly [number, number],
  view: View,
): [number, number] {
  return [point[0] * view.zoom + view.panX, point[1] * view.zoom + view.panY];
}

/** Vertex list for an SVG `<polyline points=...>` attribute. */
export function polylinePoints(
  points: readonly [number, number][],
  view: View,
): string {
  return points
    .map((p) => {
      const [x, y] = transformPoint(p, view);
      return `${round3(x)},${round3(y)}`;
    })
    .join(" ");
}

/** Letterbox fit of a width x height image into a box, centered. */
export function fitView(
  imageWidth: number,
  imageHeight: number,
  boxWidth: number,
  boxHeight: number,
): View {
  if (imageWidth <= 0 || imageHeight <= 0) {
    return { zoom: 1, panX: 0, panY: 0 };
  }
  const zoom = Math.min(boxWidth / imageWidth, boxHeight / imageHeight);
  return {
    zoom,
    panX: (boxWidth - imageWidth * zoom) / 2,
    panY: (boxHeight - imageHeight * zoom) / 2,
  };
}

export function zoomAt(
  view: View,
  factor: number,
  anchorX: number,
  anchorY: number,
): View {
  const zoom = view.zoom * factor;
  // keep the anchor's image point fixed on screen
  return {
    zoom,
    panX: anchorX - (anchorX - view.panX) * factor,
    panY: anchorY - (anchorY - view.panY) * factor,
  };
}

export const STATUS_COLORS: Record<Status, string> = {
  candidate: "#e8b84b",
  confirmed: "#2fbf5f",
  rejected: "#e05252",
};

export function strokeFor(segment: SegmentView, selected: boolean): string {
  return selected ? "#4da3ff" : STATUS_COLORS[segment.status];
}

export function strokeWidthFor(selected: boolean): number {
  return selected ? 3 : 1.5;
}

function round3(v: number): number {
  return Math.round(v * 1000) / 1000;
}
