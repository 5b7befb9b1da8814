// Diagram rendering: derives a view model (geometry + per-feature styles) from
// (FeatureModel, AnomalyReport, Configuration, CollapseState) and serializes it
// to SVG text. Border style — not color — is the primary selection channel.

import { CollapseState, computeLayout, emptyCollapseState, Layout, LayoutNode } from "./layout.js";
import { constraintVariables, FeatureModel } from "./model.js";

export interface AnomalyReport {
  void: boolean;
  core: string[];
  dead: string[];
  falseOptional: string[];
}

export const NO_ANOMALIES: AnomalyReport = { void: false, core: [], dead: [], falseOptional: [] };

export type SelectionState = "selected" | "deselected" | "undecided";
export type ProvenanceKind = "explicit" | "implied";

export interface FeatureState {
  state: SelectionState;
  provenance: ProvenanceKind;
}

export interface NodeStyle {
  borderStyle: "solid" | "dashed";
  borderWidth: number;
  shade: "dark" | "light" | "none";
  italic: boolean;
  underline: boolean;
  strikethrough: boolean;
  openMarker: boolean;
  /** Stacked colored rings for selected constraints referencing this feature. */
  rings: string[];
}

export interface EdgeStyle {
  mandatory: boolean;
  falseOptionalMark: boolean;
}

export interface ViewModel {
  layout: Layout;
  styles: Map<string, NodeStyle>;
  edges: Map<string, EdgeStyle>; // child name -> edge decoration
  searchHighlight: Set<string>;
  invalid: boolean;
}

export interface RenderInputs {
  anomalies?: AnomalyReport;
  states?: Map<string, FeatureState>;
  openFeatures?: Set<string>;
  collapse?: CollapseState;
  selectedConstraints?: string[];
  searchPath?: string[];
  invalid?: boolean;
}

const RING_PALETTE = ["#0072B2", "#E69F00", "#009E73", "#CC79A7", "#56B4E9"];

/**
 * Style mapping is injective over the visible states:
 * undecided (thin solid, no shade), explicit-selected (solid, dark),
 * implied-selected (solid, light), explicit-deselected (dashed, dark),
 * implied-deselected (dashed, light).
 */
export function styleFor(
  name: string,
  anomalies: AnomalyReport,
  state: FeatureState | undefined,
  open: boolean,
  node: LayoutNode,
  rings: string[]
): NodeStyle {
  const style: NodeStyle = {
    borderStyle: "solid",
    borderWidth: 1,
    shade: "none",
    italic: node.abstract,
    underline: anomalies.core.includes(name),
    strikethrough: anomalies.dead.includes(name),
    openMarker: open,
    rings,
  };
  if (state && state.state !== "undecided") {
    style.borderStyle = state.state === "selected" ? "solid" : "dashed";
    style.borderWidth = 2;
    style.shade = state.provenance === "explicit" ? "dark" : "light";
  }
  return style;
}

export function buildViewModel(model: FeatureModel, inputs: RenderInputs = {}): ViewModel {
  const anomalies = inputs.anomalies ?? NO_ANOMALIES;
  const collapse = inputs.collapse ?? emptyCollapseState();
  const layout = computeLayout(model, collapse);

  const ringsByFeature = new Map<string, string[]>();
  (inputs.selectedConstraints ?? []).forEach((constraint, index) => {
    const color = RING_PALETTE[index % RING_PALETTE.length];
    for (const name of new Set(constraintVariables(constraint))) {
      const rings = ringsByFeature.get(name) ?? [];
      rings.push(color);
      ringsByFeature.set(name, rings);
    }
  });

  const styles = new Map<string, NodeStyle>();
  const edges = new Map<string, EdgeStyle>();
  for (const node of layout.nodes) {
    if (node.kind === "ellipsis") continue;
    styles.set(
      node.name,
      styleFor(
        node.name,
        anomalies,
        inputs.states?.get(node.name),
        inputs.openFeatures?.has(node.name) ?? false,
        node,
        ringsByFeature.get(node.name) ?? []
      )
    );
    if (node.parent !== null) {
      edges.set(node.name, {
        mandatory: node.mandatory,
        falseOptionalMark: anomalies.falseOptional.includes(node.name),
      });
    }
  }
  return {
    layout,
    styles,
    edges,
    searchHighlight: new Set(inputs.searchPath ?? []),
    invalid: inputs.invalid ?? false,
  };
}

const SHADE_FILL = { none: "#ffffff", light: "#e8e8e8", dark: "#a8a8a8" } as const;

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function edgePath(parent: LayoutNode, child: LayoutNode): { x1: number; y1: number; x2: number; y2: number } {
  return { x1: parent.x, y1: parent.y + parent.height, x2: child.x, y2: child.y };
}

export function toSvg(view: ViewModel): string {
  const { layout } = view;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" height="${layout.height}" ` +
      `viewBox="0 0 ${layout.width} ${layout.height}" font-family="sans-serif" font-size="13">`
  );

  // edges first, under the nodes
  for (const node of layout.nodes) {
    if (node.parent === null) continue;
    const parent = layout.byName.get(node.parent);
    if (!parent) continue;
    const { x1, y1, x2, y2 } = edgePath(parent, node);
    parts.push(`<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="#444444" stroke-width="1"/>`);
    if (node.kind === "ellipsis") continue;
    const edge = view.edges.get(node.name);
    if (edge) {
      // classical decoration: filled dot = mandatory, hollow dot = optional
      if (parent.group === "and") {
        const fill = edge.mandatory ? "#444444" : "#ffffff";
        parts.push(`<circle cx="${x2}" cy="${y2}" r="4" fill="${fill}" stroke="#444444"/>`);
      }
      if (edge.falseOptionalMark) {
        // colorblind-safe edge mark: a small diamond at the edge midpoint
        const mx = (x1 + x2) / 2;
        const my = (y1 + y2) / 2;
        parts.push(
          `<path d="M ${mx} ${my - 5} L ${mx + 5} ${my} L ${mx} ${my + 5} L ${mx - 5} ${my} Z" ` +
            `fill="#ffffff" stroke="#444444" stroke-width="1.5"/>`
        );
      }
    }
  }

  // group cones: alternative = hollow arc, or = filled arc
  for (const node of layout.nodes) {
    if (node.kind !== "feature" || node.group === "and") continue;
    const children = layout.nodes.filter((n) => n.parent === node.name);
    if (children.length === 0) continue;
    const first = children[0];
    const last = children[children.length - 1];
    const apexX = node.x;
    const apexY = node.y + node.height;
    const span = 18;
    const toward = (c: LayoutNode) => {
      const dx = c.x - apexX;
      const dy = c.y - apexY;
      const len = Math.hypot(dx, dy) || 1;
      return { x: apexX + (dx / len) * span, y: apexY + (dy / len) * span };
    };
    const a = toward(first);
    const b = toward(last);
    const fill = node.group === "or" ? "#444444" : "#ffffff";
    parts.push(
      `<path d="M ${apexX} ${apexY} L ${a.x} ${a.y} Q ${apexX} ${apexY + span * 1.2} ${b.x} ${b.y} Z" ` +
        `fill="${fill}" stroke="#444444"/>`
    );
  }

  for (const node of layout.nodes) {
    const left = node.x - node.width / 2;
    if (node.kind === "ellipsis") {
      parts.push(
        `<rect x="${left}" y="${node.y}" width="${node.width}" height="${node.height}" ` +
          `fill="#f4f4f4" stroke="#999999" rx="10"/>`
      );
      parts.push(
        `<text x="${node.x}" y="${node.y + node.height / 2 + 4}" text-anchor="middle">… ${node.hiddenCount}</text>`
      );
      continue;
    }
    const style = view.styles.get(node.name)!;
    const dash = style.borderStyle === "dashed" ? ' stroke-dasharray="6 3"' : "";
    const highlight = view.searchHighlight.has(node.name) ? ' filter="url(#none)" stroke-opacity="1"' : "";

    style.rings.forEach((color, i) => {
      const pad = 3 * (i + 1) + 2;
      parts.push(
        `<rect x="${left - pad}" y="${node.y - pad}" width="${node.width + 2 * pad}" ` +
          `height="${node.height + 2 * pad}" fill="none" stroke="${color}" stroke-width="2"/>`
      );
    });

    if (node.kind === "collapsed") {
      // triangle labeled with hidden-directly-below over hidden-total
      parts.push(
        `<path d="M ${node.x} ${node.y} L ${node.x + node.width / 2} ${node.y + node.height} ` +
          `L ${node.x - node.width / 2} ${node.y + node.height} Z" ` +
          `fill="${SHADE_FILL[style.shade]}" stroke="#444444"${dash}/>`
      );
      parts.push(
        `<text x="${node.x}" y="${node.y + node.height - 14}" text-anchor="middle" font-size="10">${node.direct}</text>`
      );
      parts.push(
        `<text x="${node.x}" y="${node.y + node.height - 3}" text-anchor="middle" font-size="10">${node.total}</text>`
      );
      continue;
    }

    parts.push(
      `<rect x="${left}" y="${node.y}" width="${node.width}" height="${node.height}" ` +
        `fill="${SHADE_FILL[style.shade]}" stroke="${view.searchHighlight.has(node.name) ? "#0072B2" : "#333333"}" ` +
        `stroke-width="${style.borderWidth}"${dash}${highlight} rx="3"/>`
    );
    const decorations: string[] = [];
    if (style.underline) decorations.push("underline");
    if (style.strikethrough) decorations.push("line-through");
    const deco = decorations.length > 0 ? ` text-decoration="${decorations.join(" ")}"` : "";
    const italic = style.italic ? ' font-style="italic"' : "";
    parts.push(
      `<text x="${node.x}" y="${node.y + node.height / 2 + 4}" text-anchor="middle"${italic}${deco}>` +
        `${escapeXml(node.name)}</text>`
    );
    if (style.openMarker) {
      parts.push(
        `<circle cx="${left + node.width - 6}" cy="${node.y + 6}" r="4" fill="#ffffff" ` +
          `stroke="#0072B2" stroke-width="2"/>`
      );
    }
  }

  if (view.invalid) {
    parts.push(
      `<text x="${layout.width - 8}" y="16" text-anchor="end" font-weight="bold">invalid</text>`
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderDiagram(model: FeatureModel, inputs: RenderInputs = {}): string {
  return toSvg(buildViewModel(model, inputs));
}
