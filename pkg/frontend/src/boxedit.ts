/** Geometry for the re-annotation canvas: dragging, resizing, drawing.
 *
 * All coordinates are image pixels; the canvas scales on render. Inverted
 * or degenerate boxes are rejected here, before anything reaches the
 * server.
 */

import type { BBoxArray } from "./types.js";

export interface Box {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export type Handle = "nw" | "ne" | "sw" | "se" | "move";

export function toBox([x1, y1, x2, y2]: BBoxArray): Box {
  return { x1, y1, x2, y2 };
}

export function toArray(box: Box): BBoxArray {
  return [box.x1, box.y1, box.x2, box.y2];
}

export function isValidBox(box: Box): boolean {
  return box.x1 >= 0 && box.y1 >= 0 && box.x2 > box.x1 && box.y2 > box.y1;
}

/** Which handle a point grabs, if any; corners win over the interior. */
export function hitHandle(box: Box, x: number, y: number, tolerance = 6): Handle | null {
  const corners: [Handle, number, number][] = [
    ["nw", box.x1, box.y1],
    ["ne", box.x2, box.y1],
    ["sw", box.x1, box.y2],
    ["se", box.x2, box.y2],
  ];
  for (const [handle, cx, cy] of corners) {
    if (Math.abs(x - cx) <= tolerance && Math.abs(y - cy) <= tolerance) return handle;
  }
  if (x >= box.x1 && x <= box.x2 && y >= box.y1 && y <= box.y2) return "move";
  return null;
}

/** The box produced by dragging a handle; may be invalid and must be checked. */
export function applyDrag(box: Box, handle: Handle, dx: number, dy: number): Box {
  switch (handle) {
    case "move":
      return { x1: box.x1 + dx, y1: box.y1 + dy, x2: box.x2 + dx, y2: box.y2 + dy };
    case "nw":
      return { ...box, x1: box.x1 + dx, y1: box.y1 + dy };
    case "ne":
      return { ...box, x2: box.x2 + dx, y1: box.y1 + dy };
    case "sw":
      return { ...box, x1: box.x1 + dx, y2: box.y2 + dy };
    case "se":
      return { ...box, x2: box.x2 + dx, y2: box.y2 + dy };
  }
}

/** Normalize a click-drag into a drawable box; null when degenerate. */
export function boxFromDrag(startX: number, startY: number,
                            endX: number, endY: number): Box | null {
  const box = {
    x1: Math.max(0, Math.min(startX, endX)),
    y1: Math.max(0, Math.min(startY, endY)),
    x2: Math.max(startX, endX),
    y2: Math.max(startY, endY),
  };
  return isValidBox(box) ? box : null;
}
