/**
 * Left-to-right DAG layout for solution graphs.
 *
 * Columns are dependency depth (sensors in column 0, a DPC one right of
 * its deepest input); rows within a column sort by resource id then kind
 * label — the same canonical order deployment plans use, so the drawing
 * matches the emitted stage order.
 */

import type { SolutionInfo, SolutionNode } from "./api.js";

export interface PlacedNode {
  ref: string;
  node: SolutionNode;
  column: number;
  row: number;
  sink: boolean;
}

export interface PlacedEdge {
  from: string;
  to: string;
  kindLabel: string;
}

export interface DagLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  columns: number;
  rows: number;
}

/** Node reference string matching the service wire format. */
export function nodeRef(node: SolutionNode): string {
  if (node.type === "sensor") {
    return `sensor:${node.resource}:${node.kind.label}`;
  }
  return `dpc:${node.resource}[${node.signature}]:${node.kind.label}`;
}

export function layoutSolution(solution: SolutionInfo): DagLayout {
  const byRef = new Map<string, SolutionNode>();
  for (const node of solution.nodes) {
    byRef.set(nodeRef(node), node);
  }
  const producersInto = new Map<string, string[]>();
  for (const edge of solution.edges) {
    const list = producersInto.get(edge.to) ?? [];
    list.push(edge.from);
    producersInto.set(edge.to, list);
  }

  const depth = new Map<string, number>();
  const visiting = new Set<string>();
  const depthOf = (ref: string): number => {
    const known = depth.get(ref);
    if (known !== undefined) return known;
    if (visiting.has(ref)) return 0; // defensive: solutions are acyclic
    visiting.add(ref);
    const inputs = producersInto.get(ref) ?? [];
    const d = inputs.length === 0 ? 0 : 1 + Math.max(...inputs.map(depthOf));
    visiting.delete(ref);
    depth.set(ref, d);
    return d;
  };
  for (const ref of byRef.keys()) depthOf(ref);

  const sinkRefs = new Set(solution.sinks.map((s) => s.node));
  const ordered = [...byRef.entries()].sort(([refA, a], [refB, b]) => {
    const d = depthOf(refA) - depthOf(refB);
    if (d !== 0) return d;
    if (a.resource !== b.resource) return a.resource < b.resource ? -1 : 1;
    return a.kind.label < b.kind.label ? -1 : a.kind.label === b.kind.label ? 0 : 1;
  });

  const rowCounter = new Map<number, number>();
  const nodes: PlacedNode[] = ordered.map(([ref, node]) => {
    const column = depthOf(ref);
    const row = rowCounter.get(column) ?? 0;
    rowCounter.set(column, row + 1);
    return { ref, node, column, row, sink: sinkRefs.has(ref) };
  });

  const edges = solution.edges
    .map((e) => ({ from: e.from, to: e.to, kindLabel: e.kind.label }))
    .sort((a, b) => (a.from + a.to < b.from + b.to ? -1 : 1));
  return {
    nodes,
    edges,
    columns: nodes.length ? Math.max(...nodes.map((n) => n.column)) + 1 : 0,
    rows: Math.max(0, ...rowCounter.values()),
  };
}

const COL_WIDTH = 150;
const ROW_HEIGHT = 56;
const NODE_W = 120;
const NODE_H = 38;

/** Render a layout as a standalone SVG element string. */
export function dagSvg(layout: DagLayout): string {
  const width = layout.columns * COL_WIDTH + 20;
  const height = layout.rows * ROW_HEIGHT + 20;
  const pos = new Map<string, { x: number; y: number }>();
  for (const placed of layout.nodes) {
    pos.set(placed.ref, {
      x: 10 + placed.column * COL_WIDTH,
      y: 10 + placed.row * ROW_HEIGHT,
    });
  }
  const parts: string[] = [];
  for (const edge of layout.edges) {
    const a = pos.get(edge.from);
    const b = pos.get(edge.to);
    if (!a || !b) continue;
    parts.push(
      `<line class="dag-edge" x1="${a.x + NODE_W}" y1="${a.y + NODE_H / 2}"` +
      ` x2="${b.x}" y2="${b.y + NODE_H / 2}"></line>`,
    );
  }
  for (const placed of layout.nodes) {
    const { x, y } = pos.get(placed.ref)!;
    const classes = ["dag-node", placed.node.type, placed.sink ? "sink" : ""]
      .filter(Boolean).join(" ");
    const title = placed.node.type === "sensor"
      ? placed.node.resource
      : `${placed.node.resource}[${placed.node.signature}]`;
    parts.push(
      `<g class="${classes}" data-ref="${placed.ref}">` +
      `<rect x="${x}" y="${y}" width="${NODE_W}" height="${NODE_H}" rx="6"></rect>` +
      `<text x="${x + NODE_W / 2}" y="${y + 15}" class="dag-title">${title}</text>` +
      `<text x="${x + NODE_W / 2}" y="${y + 30}" class="dag-kind">${placed.node.kind.label}</text>` +
      `</g>`,
    );
  }
  return `<svg class="dag" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">` +
    parts.join("") + `</svg>`;
}
