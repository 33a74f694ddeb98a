import { describe, expect, it } from "vitest";

import { bandPath, polylinePath, projectionChart, proportionBars } from "../src/charts.js";
import type { ProjectionSnapshot } from "../src/types.js";

const FIXTURE_SERIES: ProjectionSnapshot[] = [
  { class: "dog", after_event: -1, n_remaining: 3,
    mean_confidence: 0.6333333333333334,
    variance_confidence: 0.14333333333333334, empty: false },
  { class: "dog", after_event: 0, n_remaining: 2,
    mean_confidence: 0.8500000000000001,
    variance_confidence: 0.0049999999999999975, empty: false },
];

describe("proportionBars", () => {
  it("scales heights by proportion and keeps server order", () => {
    const bars = proportionBars([
      { class: "person", image_count: 3, proportion: 0.75 },
      { class: "dog", image_count: 1, proportion: 0.25 },
    ], 200, 100);
    expect(bars.map((b) => b.label)).toEqual(["person", "dog"]);
    expect(bars[0].height).toBeCloseTo(75, 9);
    expect(bars[1].height).toBeCloseTo(25, 9);
    expect(bars[0].y).toBeCloseTo(25, 9);
  });

  it("handles the empty dataset", () => {
    expect(proportionBars([], 200, 100)).toEqual([]);
  });
});

describe("projectionChart", () => {
  it("maps the shared fixture to a rising two-point series", () => {
    const chart = projectionChart(FIXTURE_SERIES, 640, 240);
    expect(chart.points).toHaveLength(2);
    expect(chart.points[0].mean).toBeCloseTo(0.6333333333333334, 12);
    expect(chart.points[1].mean).toBeCloseTo(0.85, 12);
    expect(chart.points[0].label).toBe("baseline");
    expect(chart.points[1].label).toBe("event 0");
    // Higher confidence means a lower y on screen.
    expect(chart.points[1].y).toBeLessThan(chart.points[0].y);
    expect(chart.points[0].x).toBe(0);
    expect(chart.points[1].x).toBe(640);
  });

  it("skips empty snapshots", () => {
    const chart = projectionChart([
      ...FIXTURE_SERIES,
      { class: "dog", after_event: 1, n_remaining: 0,
        mean_confidence: null, variance_confidence: null, empty: true },
    ], 640, 240);
    expect(chart.points).toHaveLength(2);
  });

  it("clamps the variance band to the confidence domain", () => {
    const chart = projectionChart([
      { class: "dog", after_event: -1, n_remaining: 2,
        mean_confidence: 0.95, variance_confidence: 0.25, empty: false },
    ], 100, 100);
    expect(chart.band[0].yHigh).toBe(0);
  });
});

describe("svg path builders", () => {
  it("builds a polyline", () => {
    expect(polylinePath([{ x: 0, y: 1 }, { x: 2, y: 3 }])).toBe("M0,1 L2,3");
  });

  it("closes the variance band", () => {
    const d = bandPath([{ x: 0, yLow: 10, yHigh: 0 }, { x: 5, yLow: 12, yHigh: 2 }]);
    expect(d.startsWith("M0,0")).toBe(true);
    expect(d.endsWith("Z")).toBe(true);
  });

  it("is empty for no points", () => {
    expect(bandPath([])).toBe("");
  });
});
