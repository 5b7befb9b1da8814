// Collaborative session client. Speaks the relay's JSON envelope protocol
// over any message channel (a browser WebSocket in production, a fake in
// tests): Join -> Welcome snapshot, then seq-ordered ApplyOp/Undo/Redo
// broadcasts applied to a local replica. One participant holds the edit token
// at a time; everyone applies changes only when the broadcast arrives.

import {
  cloneModel,
  constraintVariables,
  Feature,
  FeatureModel,
  findFeature,
  GroupKind,
  makeFeature,
  parentOf,
  parseUvl,
} from "./model.js";

export interface Envelope {
  type: string;
  sessionId: string;
  seq?: number;
  payload?: Record<string, unknown>;
}

export interface Channel {
  send(message: Envelope): void;
}

export type EditOpJson = { kind: string } & Record<string, unknown>;

/** Constraint ids are not part of the canonical text; they ride alongside it. */
export interface ConstraintIds {
  ids: number[];
  next: number;
}

interface HistoryEntry {
  op: EditOpJson;
  before: FeatureModel;
  beforeIds: ConstraintIds;
}

function defaultIds(model: FeatureModel): ConstraintIds {
  return { ids: model.constraints.map((_, i) => i), next: model.constraints.length };
}

function idsFromPayload(model: FeatureModel, data: Record<string, unknown>): ConstraintIds {
  const ids = data.constraintIds as number[] | undefined;
  const next = data.nextConstraintId as number | undefined;
  if (ids !== undefined && ids.length === model.constraints.length && next !== undefined) {
    return { ids: [...ids], next };
  }
  return defaultIds(model);
}

function cloneIds(ids: ConstraintIds): ConstraintIds {
  return { ids: [...ids.ids], next: ids.next };
}

export function shareLinkSessionId(link: string): string {
  const hash = link.indexOf("#");
  return hash >= 0 ? link.slice(hash + 1) : link;
}

export class SessionClient {
  participantId: string | null = null;
  sessionId: string | null = null;
  model: FeatureModel | null = null;
  participants: Record<string, string> = {};
  editor: string | null = null;
  shareLink: string | null = null;
  seq = -1;
  /** True after a disconnect: UI shows a read-only banner until re-Welcome. */
  disconnected = false;
  /** Set when a broadcast op cannot be replayed locally; UI should rejoin. */
  resyncNeeded = false;
  rejections: Envelope[] = [];
  editRequests: Array<{ from: string; name: string }> = [];
  constraintIds: ConstraintIds = { ids: [], next: 0 };

  private applied: HistoryEntry[] = [];
  private redoOps: EditOpJson[] = [];

  constructor(public name: string, private channel: Channel) {}

  get isEditor(): boolean {
    return this.participantId !== null && this.participantId === this.editor;
  }

  join(sessionId: string): void {
    this.sessionId = sessionId;
    this.channel.send({ type: "Join", sessionId, payload: { name: this.name } });
  }

  onDisconnect(): void {
    this.disconnected = true;
  }

  receive(message: Envelope): void {
    const payload = message.payload ?? {};
    switch (message.type) {
      case "Welcome": {
        this.participantId = payload.participantId as string;
        this.sessionId = message.sessionId;
        this.model = parseUvl(payload.model as string);
        this.participants = { ...(payload.participants as Record<string, string>) };
        this.editor = payload.editor as string;
        this.shareLink = (payload.shareLink as string) ?? null;
        this.seq = message.seq ?? 0;
        this.disconnected = false;
        this.resyncNeeded = false;
        this.constraintIds = idsFromPayload(this.model, payload);
        const history = payload.history as
          | {
              applied?: Array<{ op: EditOpJson; before: string } & Record<string, unknown>>;
              redo?: EditOpJson[];
            }
          | undefined;
        this.applied = (history?.applied ?? []).map((e) => {
          const before = parseUvl(e.before);
          return { op: e.op, before, beforeIds: idsFromPayload(before, e) };
        });
        this.redoOps = [...(history?.redo ?? [])];
        return;
      }
      case "Reject":
        this.rejections.push(message);
        return;
      case "ParticipantUpdate":
        this.participants = { ...(payload.participants as Record<string, string>) };
        this.editor = payload.editor as string;
        return;
      case "RequestEdit":
        this.editRequests.push({ from: payload.from as string, name: payload.name as string });
        return;
    }
    if (message.seq !== undefined) {
      if (message.seq !== this.seq + 1) {
        // a gap means we missed broadcasts; recover through a fresh Welcome
        this.resyncNeeded = true;
        return;
      }
      this.seq = message.seq;
    }
    if (!this.model) return;
    if (message.type === "ApplyOp") {
      const op = payload.op as EditOpJson;
      const before = cloneModel(this.model);
      const beforeIds = cloneIds(this.constraintIds);
      if (!applyOp(this.model, op, this.constraintIds)) {
        this.resyncNeeded = true; // e.g. a slicing delete we cannot replay
        return;
      }
      this.applied.push({ op, before, beforeIds });
      this.redoOps = [];
    } else if (message.type === "Undo") {
      const entry = this.applied.pop();
      if (!entry) {
        this.resyncNeeded = true;
        return;
      }
      this.redoOps.push(entry.op);
      this.model = cloneModel(entry.before);
      this.constraintIds = cloneIds(entry.beforeIds);
    } else if (message.type === "Redo") {
      const op = this.redoOps.pop();
      if (!op) {
        this.resyncNeeded = true;
        return;
      }
      const before = cloneModel(this.model);
      const beforeIds = cloneIds(this.constraintIds);
      if (!applyOp(this.model, op, this.constraintIds)) {
        this.resyncNeeded = true;
        return;
      }
      this.applied.push({ op, before, beforeIds });
    }
  }

  // -- outgoing ---------------------------------------------------------------

  private sendEnvelope(type: string, payload?: Record<string, unknown>): void {
    if (!this.sessionId) throw new Error("not in a session");
    this.channel.send({ type, sessionId: this.sessionId, payload });
  }

  submitOp(op: EditOpJson): void {
    this.sendEnvelope("ApplyOp", { op, baseSeq: this.seq });
  }

  submitUndo(): void {
    this.sendEnvelope("Undo");
  }

  submitRedo(): void {
    this.sendEnvelope("Redo");
  }

  requestEdit(): void {
    this.sendEnvelope("RequestEdit");
  }

  grantEdit(to: string): void {
    this.sendEnvelope("GrantEdit", { to });
  }

  revokeEdit(): void {
    this.sendEnvelope("RevokeEdit");
  }

  leave(): void {
    this.sendEnvelope("Leave");
  }
}

/**
 * Replays an edit operation on the local replica. Returns false when the op
 * cannot be reproduced faithfully client-side (deleting a feature that has
 * children or appears in constraints goes through server-side slicing); the
 * caller then resyncs via a fresh Welcome snapshot.
 */
export function applyOp(
  model: FeatureModel,
  op: EditOpJson,
  constraintIds: ConstraintIds = defaultIds(model)
): boolean {
  switch (op.kind) {
    case "CreateFeature": {
      const parent = findFeature(model, op.parent as string);
      if (!parent || findFeature(model, op.name as string)) return false;
      const index = (op.index as number | null | undefined) ?? parent.children.length;
      parent.children.splice(index, 0, makeFeature(op.name as string));
      return true;
    }
    case "Rename": {
      const feature = findFeature(model, op.feature as string);
      if (!feature || findFeature(model, op.newName as string)) return false;
      const oldName = feature.name;
      feature.name = op.newName as string;
      model.constraints = model.constraints.map((c) =>
        renameInConstraint(c, oldName, feature.name)
      );
      return true;
    }
    case "SetAbstract": {
      const feature = findFeature(model, op.feature as string);
      if (!feature) return false;
      feature.abstract = op.flag as boolean;
      return true;
    }
    case "SetMandatory": {
      const feature = findFeature(model, op.feature as string);
      if (!feature) return false;
      feature.mandatory = op.flag as boolean;
      return true;
    }
    case "SetGroup": {
      const feature = findFeature(model, op.parent as string);
      if (!feature) return false;
      feature.group = op.group as GroupKind;
      return true;
    }
    case "MoveFeature": {
      const feature = findFeature(model, op.feature as string);
      const newParent = findFeature(model, op.newParent as string);
      const oldParent = parentOf(model, op.feature as string);
      if (!feature || !newParent || !oldParent || isDescendant(feature, newParent)) return false;
      oldParent.children.splice(oldParent.children.indexOf(feature), 1);
      const index = (op.index as number | null | undefined) ?? newParent.children.length;
      newParent.children.splice(index, 0, feature);
      if (oldParent.children.length === 0) oldParent.group = "and";
      return true;
    }
    case "DeleteFeature": {
      const name = op.feature as string;
      const feature = findFeature(model, name);
      const parent = parentOf(model, name);
      if (!feature || !parent) return false;
      const referenced = model.constraints.some((c) => constraintVariables(c).includes(name));
      if (feature.children.length > 0 || referenced) return false; // slicing path
      parent.children.splice(parent.children.indexOf(feature), 1);
      if (parent.children.length === 0) parent.group = "and";
      return true;
    }
    case "AddConstraint":
      model.constraints.push(op.formula as string);
      constraintIds.ids.push(constraintIds.next++);
      return true;
    case "EditConstraint": {
      const index = constraintIds.ids.indexOf(op.constraint as number);
      if (index < 0) return false;
      model.constraints[index] = op.formula as string;
      return true;
    }
    case "DeleteConstraint": {
      const index = constraintIds.ids.indexOf(op.constraint as number);
      if (index < 0) return false;
      model.constraints.splice(index, 1);
      constraintIds.ids.splice(index, 1);
      return true;
    }
    default:
      return false;
  }
}

function isDescendant(ancestor: Feature, candidate: Feature): boolean {
  let found = false;
  const go = (f: Feature) => {
    if (f === candidate) found = true;
    for (const c of f.children) go(c);
  };
  go(ancestor);
  return found;
}

function renameInConstraint(constraint: string, from: string, to: string): string {
  const quoted = `"${from.replace(/\\/g, "\\\\").replace(/"/g, '\\"')}"`;
  const escaped = from.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
  return constraint
    .split(quoted)
    .join(`"${to}"`)
    .replace(new RegExp(`(?<![A-Za-z0-9_."])${escaped}(?![A-Za-z0-9_.-])`, "g"), to);
}
