// Layered tree layout: children centered under their parent, subtree widths
// computed bottom-up. Deterministic — identical inputs give identical geometry.

import { collapseCounts, Feature, FeatureModel } from "./model.js";

export interface CollapseState {
  /** Names of features whose subtree is collapsed into a triangle. */
  collapsed: Set<string>;
  /** Per-parent [start, end) child index ranges hidden behind an ellipsis badge. */
  hiddenRanges: Map<string, Array<[number, number]>>;
}

export function emptyCollapseState(): CollapseState {
  return { collapsed: new Set(), hiddenRanges: new Map() };
}

export type NodeKind = "feature" | "collapsed" | "ellipsis";

export interface LayoutNode {
  kind: NodeKind;
  /** Feature name for feature/collapsed nodes; synthetic id for ellipsis badges. */
  name: string;
  x: number; // center x
  y: number; // top y
  width: number;
  height: number;
  depth: number;
  parent: string | null;
  group: "and" | "or" | "alternative";
  mandatory: boolean;
  abstract: boolean;
  /** Collapse triangle labels: hidden nodes directly below over all hidden nodes. */
  direct?: number;
  total?: number;
  /** Number of siblings hidden behind an ellipsis badge. */
  hiddenCount?: number;
}

export interface Layout {
  nodes: LayoutNode[];
  byName: Map<string, LayoutNode>;
  width: number;
  height: number;
}

export interface LayoutOptions {
  charWidth: number;
  nodeHeight: number;
  hGap: number;
  vGap: number;
  padding: number;
}

export const DEFAULT_OPTIONS: LayoutOptions = {
  charWidth: 8,
  nodeHeight: 28,
  hGap: 16,
  vGap: 40,
  padding: 12,
};

function nodeWidth(label: string, opts: LayoutOptions): number {
  return Math.max(40, label.length * opts.charWidth + 16);
}

interface Pending {
  node: LayoutNode;
  children: Pending[];
  subtreeWidth: number;
}

export function computeLayout(
  model: FeatureModel,
  collapse: CollapseState = emptyCollapseState(),
  opts: LayoutOptions = DEFAULT_OPTIONS
): Layout {
  let ellipsisCounter = 0;

  const build = (f: Feature, depth: number, parent: string | null): Pending => {
    const collapsed = collapse.collapsed.has(f.name) && f.children.length > 0;
    const node: LayoutNode = {
      kind: collapsed ? "collapsed" : "feature",
      name: f.name,
      x: 0,
      y: depth * (opts.nodeHeight + opts.vGap) + opts.padding,
      width: nodeWidth(f.name, opts),
      height: opts.nodeHeight,
      depth,
      parent,
      group: f.group,
      mandatory: f.mandatory,
      abstract: f.abstract,
    };
    if (collapsed) {
      const counts = collapseCounts(f);
      node.direct = counts.direct;
      node.total = counts.total;
      return { node, children: [], subtreeWidth: node.width };
    }

    const ranges = collapse.hiddenRanges.get(f.name) ?? [];
    const hidden = (index: number) => ranges.some(([s, e]) => index >= s && index < e);
    const children: Pending[] = [];
    for (let i = 0; i < f.children.length; i++) {
      if (hidden(i)) {
        // one badge per contiguous hidden range, placed at the range start
        const range = ranges.find(([s, e]) => i >= s && i < e)!;
        if (i === range[0]) {
          const badge: LayoutNode = {
            kind: "ellipsis",
            name: `…${ellipsisCounter++}`,
            x: 0,
            y: (depth + 1) * (opts.nodeHeight + opts.vGap) + opts.padding,
            width: nodeWidth("…", opts),
            height: opts.nodeHeight,
            depth: depth + 1,
            parent: f.name,
            group: "and",
            mandatory: false,
            abstract: false,
            hiddenCount: Math.min(range[1], f.children.length) - range[0],
          };
          children.push({ node: badge, children: [], subtreeWidth: badge.width });
        }
        continue;
      }
      children.push(build(f.children[i], depth + 1, f.name));
    }

    let subtreeWidth = node.width;
    if (children.length > 0) {
      const total =
        children.reduce((sum, c) => sum + c.subtreeWidth, 0) + opts.hGap * (children.length - 1);
      subtreeWidth = Math.max(node.width, total);
    }
    return { node, children, subtreeWidth };
  };

  const rootPending = build(model.root, 0, null);

  const nodes: LayoutNode[] = [];
  const place = (p: Pending, left: number) => {
    nodes.push(p.node);
    const childrenWidth =
      p.children.reduce((sum, c) => sum + c.subtreeWidth, 0) + opts.hGap * Math.max(0, p.children.length - 1);
    let cursor = left + (p.subtreeWidth - childrenWidth) / 2;
    for (const c of p.children) {
      place(c, cursor);
      cursor += c.subtreeWidth + opts.hGap;
    }
    // parent sits at the midpoint of its children's centers, not the span center
    p.node.x =
      p.children.length > 0
        ? (p.children[0].node.x + p.children[p.children.length - 1].node.x) / 2
        : left + p.subtreeWidth / 2;
  };
  place(rootPending, opts.padding);

  const byName = new Map(nodes.map((n) => [n.name, n]));
  const width = rootPending.subtreeWidth + 2 * opts.padding;
  const maxDepth = nodes.reduce((d, n) => Math.max(d, n.depth), 0);
  const height = (maxDepth + 1) * opts.nodeHeight + maxDepth * opts.vGap + 2 * opts.padding;
  return { nodes, byName, width, height };
}
