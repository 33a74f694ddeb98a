/** Deterministic seeded force layout for the co-occurrence graph.
 *
 * Small spring simulation: edge attraction, pairwise repulsion, mild
 * centering. Positions depend only on (nodes, links, seed, iterations), so
 * the same graph always lands in the same place.
 */

import type { GraphDoc } from "./types.js";

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  highlighted: boolean;
}

export interface LayoutEdge {
  source: string;
  target: string;
  weight: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Layout {
  nodes: LayoutNode[];
  edges: LayoutEdge[];
}

/** mulberry32: tiny deterministic PRNG. */
export function seededRandom(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function forceLayout(doc: GraphDoc, width: number, height: number,
                            options: { seed?: number; iterations?: number } = {},
                            highlight: ReadonlySet<string> = new Set()): Layout {
  const seed = options.seed ?? 42;
  const iterations = options.iterations ?? 150;
  const rand = seededRandom(seed);
  const ids = doc.nodes.map((n) => n.id);
  const index = new Map(ids.map((id, i) => [id, i]));
  const n = ids.length;
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) * 0.38;

  // Start on a circle with a seeded jitter so symmetric graphs still split.
  const xs = ids.map((_, i) => cx + radius * Math.cos((2 * Math.PI * i) / Math.max(n, 1))
    + (rand() - 0.5) * 8);
  const ys = ids.map((_, i) => cy + radius * Math.sin((2 * Math.PI * i) / Math.max(n, 1))
    + (rand() - 0.5) * 8);

  const springLength = radius * 0.6;
  const links = doc.links
    .map((l) => ({ a: index.get(l.source), b: index.get(l.target), w: l.weight }))
    .filter((l): l is { a: number; b: number; w: number } =>
      l.a !== undefined && l.b !== undefined);

  for (let step = 0; step < iterations; step++) {
    const cooling = 1 - step / iterations;
    const fx = new Array(n).fill(0);
    const fy = new Array(n).fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = xs[i] - xs[j];
        let dy = ys[i] - ys[j];
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-6) {
          dx = 0.01;
          dy = 0.01;
          d2 = 0.0002;
        }
        const repulsion = (springLength * springLength) / d2;
        const d = Math.sqrt(d2);
        fx[i] += (dx / d) * repulsion * 18;
        fy[i] += (dy / d) * repulsion * 18;
        fx[j] -= (dx / d) * repulsion * 18;
        fy[j] -= (dy / d) * repulsion * 18;
      }
    }
    for (const { a, b, w } of links) {
      const dx = xs[b] - xs[a];
      const dy = ys[b] - ys[a];
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1e-3);
      const pull = ((d - springLength / Math.sqrt(w)) / d) * 0.08;
      fx[a] += dx * pull;
      fy[a] += dy * pull;
      fx[b] -= dx * pull;
      fy[b] -= dy * pull;
    }
    for (let i = 0; i < n; i++) {
      fx[i] += (cx - xs[i]) * 0.01;
      fy[i] += (cy - ys[i]) * 0.01;
      xs[i] += Math.max(-12, Math.min(12, fx[i])) * cooling;
      ys[i] += Math.max(-12, Math.min(12, fy[i])) * cooling;
      xs[i] = Math.max(10, Math.min(width - 10, xs[i]));
      ys[i] = Math.max(10, Math.min(height - 10, ys[i]));
    }
  }

  const nodes = ids.map((id, i) => ({
    id,
    x: xs[i],
    y: ys[i],
    highlighted: highlight.has(id),
  }));
  const at = new Map(nodes.map((node) => [node.id, node]));
  const edges = doc.links.map((l) => {
    const a = at.get(l.source)!;
    const b = at.get(l.target)!;
    return { source: l.source, target: l.target, weight: l.weight,
             x1: a.x, y1: a.y, x2: b.x, y2: b.y };
  });
  return { nodes, edges };
}
