/**
 * SVG rendering of a co-occurrence network: node color encodes entity
 * type, node size encodes selection weight, and clicking a node adds
 * it to the filter. Layout comes from the deterministic force engine.
 */

import { typeColor } from "./colors.js";
import { clear, el, svgEl } from "./dom.js";
import { layoutGraph } from "./layout.js";
import type { Graph, GraphNode } from "./types.js";

export interface GraphViewHandlers {
  onNodeClick: (node: GraphNode) => void;
}

export function renderGraph(
  container: HTMLElement,
  graph: Graph,
  handlers: GraphViewHandlers,
): void {
  clear(container);
  if (graph.nodes.length === 0) {
    container.append(el("p", { class: "empty-state" }, [
      "No nodes in the current selection.",
    ]));
    return;
  }
  const layout = layoutGraph(graph);
  const positions = new Map(layout.nodes.map((n) => [n.id, n]));
  const maxWeight = Math.max(...graph.nodes.map((n) => n.weight), 1);
  const maxEdge = Math.max(...graph.edges.map((e) => e.weight), 1);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    class: "graph-canvas",
    role: "img",
  });

  for (const edge of graph.edges) {
    const a = positions.get(edge.source);
    const b = positions.get(edge.target);
    if (!a || !b) continue;
    svg.append(
      svgEl("line", {
        x1: String(a.x),
        y1: String(a.y),
        x2: String(b.x),
        y2: String(b.y),
        class: "graph-edge",
        "stroke-width": String(0.5 + 2.5 * (edge.weight / maxEdge)),
      }, [svgEl("title", {}, [`${edge.weight} shared units`])]),
    );
  }

  for (const node of graph.nodes) {
    const pos = positions.get(node.id);
    if (!pos) continue;
    const radius = 6 + 14 * Math.sqrt(node.weight / maxWeight);
    const group = svgEl("g", { class: "graph-node", tabindex: "0" });
    group.append(
      svgEl("circle", {
        cx: String(pos.x),
        cy: String(pos.y),
        r: String(radius),
        fill: typeColor(node.type),
      }, [svgEl("title", {}, [`${node.label} (${node.type}) — ${node.weight} units`])]),
      svgEl("text", {
        x: String(pos.x),
        y: String(pos.y - radius - 4),
        class: "graph-label",
        "text-anchor": "middle",
      }, [node.label]),
    );
    group.addEventListener("click", () => handlers.onNodeClick(node));
    svg.append(group);
  }

  const legendTypes = [...new Set(graph.nodes.map((n) => n.type))].sort();
  const legend = el("div", { class: "graph-legend" });
  for (const type of legendTypes) {
    const swatch = el("span", { class: "legend-swatch" });
    swatch.style.backgroundColor = typeColor(type);
    legend.append(el("span", { class: "legend-item" }, [swatch, type]));
  }

  container.append(svg, legend);
}
