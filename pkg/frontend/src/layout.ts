/**
 * Small deterministic force-directed layout: pairwise repulsion,
 * spring forces along edges, and a weak centering pull, integrated
 * with velocity damping. No randomness beyond a seeded generator, so
 * the same graph always lands in the same arrangement.
 */

import type { Graph } from "./types.js";

export interface PlacedNode {
  id: number | string;
  label: string;
  type: string;
  weight: number;
  x: number;
  y: number;
}

export interface LayoutResult {
  nodes: PlacedNode[];
  width: number;
  height: number;
}

function lcg(seed: number): () => number {
  let state = seed >>> 0 || 1;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 0xffffffff;
  };
}

export function layoutGraph(
  graph: Graph,
  width = 900,
  height = 600,
  iterations = 250,
): LayoutResult {
  const nodes = graph.nodes.map((n) => ({ ...n, x: 0, y: 0, vx: 0, vy: 0 }));
  if (nodes.length === 0) return { nodes: [], width, height };
  const rand = lcg(nodes.length * 2654435761);
  const radius = Math.min(width, height) * 0.35;
  nodes.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / nodes.length;
    node.x = width / 2 + radius * Math.cos(angle) + (rand() - 0.5) * 10;
    node.y = height / 2 + radius * Math.sin(angle) + (rand() - 0.5) * 10;
  });

  const index = new Map(nodes.map((n, i) => [n.id, i]));
  const springs = graph.edges
    .map((e) => ({
      a: index.get(e.source),
      b: index.get(e.target),
      weight: e.weight,
    }))
    .filter((s): s is { a: number; b: number; weight: number } =>
      s.a !== undefined && s.b !== undefined && s.a !== s.b,
    );

  const repulsion = 2800;
  const restLength = 120;
  const gravity = 0.03;
  let temperature = 1.0;

  for (let step = 0; step < iterations; step++) {
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const a = nodes[i];
        const b = nodes[j];
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          dx = 0.5;
          dy = 0.5;
          d2 = 0.5;
        }
        const force = repulsion / d2;
        const d = Math.sqrt(d2);
        const fx = (dx / d) * force;
        const fy = (dy / d) * force;
        a.vx += fx;
        a.vy += fy;
        b.vx -= fx;
        b.vy -= fy;
      }
    }
    for (const spring of springs) {
      const a = nodes[spring.a];
      const b = nodes[spring.b];
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(1, Math.sqrt(dx * dx + dy * dy));
      const k = 0.02 * Math.min(4, 1 + Math.log(1 + spring.weight));
      const stretch = (d - restLength) * k;
      const fx = (dx / d) * stretch;
      const fy = (dy / d) * stretch;
      a.vx += fx;
      a.vy += fy;
      b.vx -= fx;
      b.vy -= fy;
    }
    for (const node of nodes) {
      node.vx += (width / 2 - node.x) * gravity;
      node.vy += (height / 2 - node.y) * gravity;
      node.x += node.vx * 0.08 * temperature;
      node.y += node.vy * 0.08 * temperature;
      node.vx *= 0.5;
      node.vy *= 0.5;
      node.x = Math.max(20, Math.min(width - 20, node.x));
      node.y = Math.max(20, Math.min(height - 20, node.y));
    }
    temperature *= 0.995;
  }

  return {
    nodes: nodes.map(({ id, label, type, weight, x, y }) => ({ id, label, type, weight, x, y })),
    width,
    height,
  };
}
