/** Pure chart geometry: proportions bar chart and the projection series.
 *
 * These produce screen-space primitives; the renderer only turns them into
 * SVG elements, so the math stays testable without a DOM.
 */

import type { ClassProportion, ProjectionSnapshot } from "./types.js";

export interface Bar {
  label: string;
  value: number;
  x: number;
  y: number;
  width: number;
  height: number;
}

export function proportionBars(proportions: ClassProportion[],
                               width: number, height: number,
                               gap = 4): Bar[] {
  if (proportions.length === 0) return [];
  const barWidth = (width - gap * (proportions.length - 1)) / proportions.length;
  return proportions.map((p, i) => {
    const h = p.proportion * height;
    return {
      label: p.class,
      value: p.proportion,
      x: i * (barWidth + gap),
      y: height - h,
      width: barWidth,
      height: h,
    };
  });
}

export interface ProjectionChart {
  /** One point per snapshot, baseline first. */
  points: { x: number; y: number; label: string; mean: number; n: number }[];
  /** Variance band: mean +/- one standard deviation, clamped to [0, 1]. */
  band: { x: number; yLow: number; yHigh: number }[];
  /** Confidence gridline positions for 0, 0.25, .., 1. */
  gridY: number[];
}

export function projectionChart(series: ProjectionSnapshot[],
                                width: number, height: number): ProjectionChart {
  const usable = series.filter((s) => !s.empty && s.mean_confidence !== null);
  const n = usable.length;
  const xAt = (i: number) => (n <= 1 ? width / 2 : (i / (n - 1)) * width);
  const yAt = (conf: number) => height - conf * height;
  const points = usable.map((snap, i) => ({
    x: xAt(i),
    y: yAt(snap.mean_confidence as number),
    label: snap.after_event < 0 ? "baseline" : `event ${snap.after_event}`,
    mean: snap.mean_confidence as number,
    n: snap.n_remaining,
  }));
  const band = usable.map((snap, i) => {
    const sigma = Math.sqrt(snap.variance_confidence ?? 0);
    const mean = snap.mean_confidence as number;
    return {
      x: xAt(i),
      yLow: yAt(Math.max(0, mean - sigma)),
      yHigh: yAt(Math.min(1, mean + sigma)),
    };
  });
  const gridY = [0, 0.25, 0.5, 0.75, 1].map(yAt);
  return { points, band, gridY };
}

export function polylinePath(points: { x: number; y: number }[]): string {
  return points.map((p, i) => `${i === 0 ? "M" : "L"}${p.x},${p.y}`).join(" ");
}

export function bandPath(band: { x: number; yLow: number; yHigh: number }[]): string {
  if (band.length === 0) return "";
  const top = band.map((b, i) => `${i === 0 ? "M" : "L"}${b.x},${b.yHigh}`).join(" ");
  const bottom = [...band].reverse().map((b) => `L${b.x},${b.yLow}`).join(" ");
  return `${top} ${bottom} Z`;
}
