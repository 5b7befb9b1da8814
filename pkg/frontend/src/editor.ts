// Editor interaction surface: quick-edit zones around feature rectangles,
// drag-and-drop validation per move mode, and context-menu edit operations.
// All edits are emitted as wire-format ops through the session client; a
// non-editor attempt surfaces a request-edit-rights prompt instead.

import { Layout } from "./layout.js";
import { FeatureModel, findFeature, walk } from "./model.js";
import { EditOpJson, SessionClient } from "./session.js";

export type MoveMode = "lateral" | "arbitrary" | "disabled";

export interface QuickEditZone {
  kind: "add-child" | "add-sibling";
  feature: string;
  x: number;
  y: number;
  width: number;
  height: number;
}

const ZONE_THICKNESS = 8;

/** Thin bands below (add child) and beside (add sibling) each rectangle. */
export function quickEditZones(layout: Layout): QuickEditZone[] {
  const zones: QuickEditZone[] = [];
  for (const node of layout.nodes) {
    if (node.kind !== "feature") continue;
    zones.push({
      kind: "add-child",
      feature: node.name,
      x: node.x - node.width / 2,
      y: node.y + node.height,
      width: node.width,
      height: ZONE_THICKNESS,
    });
    if (node.parent !== null) {
      zones.push({
        kind: "add-sibling",
        feature: node.name,
        x: node.x + node.width / 2,
        y: node.y,
        width: ZONE_THICKNESS,
        height: node.height,
      });
    }
  }
  return zones;
}

export function zoneAt(zones: QuickEditZone[], x: number, y: number): QuickEditZone | null {
  for (const zone of zones) {
    if (x >= zone.x && x <= zone.x + zone.width && y >= zone.y && y <= zone.y + zone.height) {
      return zone;
    }
  }
  return null;
}

export interface MenuItem {
  label: string;
  op: EditOpJson;
}

export function contextMenu(model: FeatureModel, name: string): MenuItem[] {
  const feature = findFeature(model, name);
  if (!feature) return [];
  const isRoot = model.root.name === name;
  const items: MenuItem[] = [
    { label: "Add child", op: { kind: "CreateFeature", name: freshName(model), parent: name, index: null } },
    { label: feature.abstract ? "Make concrete" : "Make abstract", op: { kind: "SetAbstract", feature: name, flag: !feature.abstract } },
  ];
  if (!isRoot) {
    items.push({
      label: feature.mandatory ? "Make optional" : "Make mandatory",
      op: { kind: "SetMandatory", feature: name, flag: !feature.mandatory },
    });
    items.push({ label: "Delete", op: { kind: "DeleteFeature", feature: name } });
  }
  if (feature.children.length > 0) {
    for (const group of ["and", "or", "alternative"] as const) {
      if (group !== feature.group) {
        items.push({ label: `Group: ${group}`, op: { kind: "SetGroup", parent: name, group } });
      }
    }
  }
  return items;
}

function freshName(model: FeatureModel): string {
  const names = new Set<string>();
  walk(model, (f) => names.add(f.name));
  let i = 1;
  while (names.has(`NewFeature${i}`)) i++;
  return `NewFeature${i}`;
}

export interface DragResult {
  allowed: boolean;
  reason?: string;
  op?: EditOpJson;
}

export function validateDrag(
  model: FeatureModel,
  mode: MoveMode,
  feature: string,
  newParent: string,
  index: number | null = null
): DragResult {
  if (mode === "disabled") return { allowed: false, reason: "feature moves are disabled" };
  if (feature === model.root.name) return { allowed: false, reason: "cannot move the root" };
  const dragged = findFeature(model, feature);
  const target = findFeature(model, newParent);
  if (!dragged || !target) return { allowed: false, reason: "unknown feature" };
  let withinDragged = false;
  const descend = (f: typeof dragged) => {
    if (f.name === newParent) withinDragged = true;
    for (const c of f.children) descend(c);
  };
  descend(dragged);
  if (withinDragged) return { allowed: false, reason: "cannot move a feature below itself" };
  if (mode === "lateral") {
    let currentParent: string | null = null;
    walk(model, (f, parent) => {
      if (f.name === feature) currentParent = parent?.name ?? null;
    });
    if (currentParent !== newParent) {
      return { allowed: false, reason: "lateral moves only: reorder within the same parent" };
    }
  }
  return { allowed: true, op: { kind: "MoveFeature", feature, newParent, index } };
}

export interface EditAttempt {
  sent: boolean;
  /** Set when the user lacks edit rights; the UI shows a request prompt. */
  promptRequestRights: boolean;
}

export function emitEdit(client: SessionClient, op: EditOpJson): EditAttempt {
  if (!client.isEditor) {
    return { sent: false, promptRequestRights: true };
  }
  client.submitOp(op);
  return { sent: true, promptRequestRights: false };
}

/** Stacked ring count per feature for the currently selected constraints. */
export function constraintRingCounts(
  layout: Layout,
  ringsByFeature: Map<string, string[]>
): Map<string, number> {
  const counts = new Map<string, number>();
  for (const node of layout.nodes) {
    const rings = ringsByFeature.get(node.name);
    if (rings && rings.length > 0) counts.set(node.name, rings.length);
  }
  return counts;
}
