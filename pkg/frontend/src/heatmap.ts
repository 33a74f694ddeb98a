/** Similarity heatmap: cell layout and a monotone color ramp. */

import type { SimilarityDoc } from "./types.js";

export interface HeatCell {
  row: string;
  col: string;
  value: number;
  x: number;
  y: number;
  size: number;
  color: string;
  highlighted: boolean;
}

/** Dark blue at 0 up to bright yellow at 1; monotone in the value. */
export function similarityColor(value: number): string {
  const v = Math.max(0, Math.min(1, value));
  const r = Math.round(20 + 235 * v);
  const g = Math.round(24 + 210 * v);
  const b = Math.round(80 - 40 * v);
  return `rgb(${r},${g},${b})`;
}

export function heatmapCells(doc: SimilarityDoc, size: number,
                             highlight: ReadonlySet<string> = new Set()): HeatCell[] {
  const n = doc.person_ids.length;
  if (n === 0) return [];
  const cell = size / n;
  const cells: HeatCell[] = [];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const row = doc.person_ids[i];
      const col = doc.person_ids[j];
      cells.push({
        row,
        col,
        value: doc.values[i][j],
        x: j * cell,
        y: i * cell,
        size: cell,
        color: similarityColor(doc.values[i][j]),
        highlighted: highlight.has(row) && highlight.has(col),
      });
    }
  }
  return cells;
}
