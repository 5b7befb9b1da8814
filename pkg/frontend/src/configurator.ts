// Interactive configurator: explicit clicks cycle selected -> deselected ->
// undecided, every change triggers decision propagation through the service,
// and the decision history supports rollback to any prior point. When the
// service is unreachable, propagation can be disabled and the model configured
// freely with a local validity badge.

import { Feature, FeatureModel, serializeUvl, walk } from "./model.js";
import { FeatureState, SelectionState } from "./render.js";

export interface PropagateResponse {
  valid: boolean;
  states: Record<string, { state: string; provenance: string }>;
  open: string[];
  conflict?: unknown;
}

export type PropagateFn = (
  modelText: string,
  select: string[],
  deselect: string[]
) => Promise<PropagateResponse>;

export interface Decision {
  feature: string;
  state: SelectionState;
}

function nextState(state: SelectionState): SelectionState {
  if (state === "undecided") return "selected";
  if (state === "selected") return "deselected";
  return "undecided";
}

export class Configurator {
  readonly history: Decision[] = [];
  states = new Map<string, FeatureState>();
  openFeatures = new Set<string>();
  valid = true;
  /** Non-blocking notice shown when propagation fails; implied states freeze. */
  notice: string | null = null;
  propagationEnabled = true;

  private requestToken = 0;

  constructor(private model: FeatureModel, private propagateFn: PropagateFn) {}

  /** Explicit decision currently in force for a feature (last one wins). */
  explicitState(name: string): SelectionState {
    for (let i = this.history.length - 1; i >= 0; i--) {
      if (this.history[i].feature === name) return this.history[i].state;
    }
    return "undecided";
  }

  private explicitDecisions(upTo = this.history.length): Map<string, SelectionState> {
    const out = new Map<string, SelectionState>();
    for (const { feature, state } of this.history.slice(0, upTo)) {
      if (state === "undecided") out.delete(feature);
      else out.set(feature, state);
    }
    return out;
  }

  async click(name: string): Promise<void> {
    this.history.push({ feature: name, state: nextState(this.explicitState(name)) });
    await this.refresh();
  }

  async rollback(point: number): Promise<void> {
    this.history.length = Math.max(0, Math.min(point, this.history.length));
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const explicit = this.explicitDecisions();
    if (!this.propagationEnabled) {
      this.applyFreeMode(explicit);
      return;
    }
    const select = [...explicit].filter(([, s]) => s === "selected").map(([n]) => n);
    const deselect = [...explicit].filter(([, s]) => s === "deselected").map(([n]) => n);
    const token = ++this.requestToken;
    let response: PropagateResponse;
    try {
      response = await this.propagateFn(serializeUvl(this.model), select, deselect);
    } catch (err) {
      if (token === this.requestToken) {
        this.notice = `propagation failed: ${err instanceof Error ? err.message : String(err)}`;
      }
      return; // implied states stay frozen
    }
    if (token !== this.requestToken) return; // a newer request superseded this one
    this.notice = null;
    this.valid = response.valid;
    this.states = new Map(
      Object.entries(response.states).map(([feature, entry]) => [
        feature,
        {
          state: entry.state as SelectionState,
          provenance: entry.provenance as "explicit" | "implied",
        },
      ])
    );
    this.openFeatures = new Set(response.open);
  }

  private applyFreeMode(explicit: Map<string, SelectionState>): void {
    this.states = new Map(
      [...explicit].map(([name, state]) => [name, { state, provenance: "explicit" as const }])
    );
    this.openFeatures = new Set();
    const selected = new Set(
      [...explicit].filter(([, s]) => s === "selected").map(([n]) => n)
    );
    this.valid = isValidSelection(this.model, selected);
    this.notice = null;
  }
}

/** Full validity check against tree and constraint semantics (free mode badge). */
export function isValidSelection(model: FeatureModel, selected: Set<string>): boolean {
  if (!selected.has(model.root.name)) return false;
  let ok = true;
  walk(model, (f: Feature) => {
    const here = selected.has(f.name);
    const chosen = f.children.filter((c) => selected.has(c.name));
    if (!here && chosen.length > 0) ok = false;
    if (here) {
      if (f.group === "and") {
        for (const c of f.children) if (c.mandatory && !selected.has(c.name)) ok = false;
      } else if (f.group === "or") {
        if (f.children.length > 0 && chosen.length === 0) ok = false;
      } else if (f.children.length > 0 && chosen.length !== 1) {
        ok = false;
      }
    }
  });
  return ok && model.constraints.every((c) => evaluateConstraint(c, selected));
}

// --- constraint expression evaluation (!, &, |, =>, <=>; arrows right-assoc) ---

type Token = { kind: "name"; value: string } | { kind: string };

function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  while (i < text.length) {
    const c = text[i];
    if (c === " " || c === "\t") {
      i++;
    } else if (c === "(" || c === ")" || c === "!" || c === "&" || c === "|") {
      tokens.push({ kind: c });
      i++;
    } else if (text.startsWith("<=>", i)) {
      tokens.push({ kind: "<=>" });
      i += 3;
    } else if (text.startsWith("=>", i)) {
      tokens.push({ kind: "=>" });
      i += 2;
    } else if (c === '"') {
      let j = i + 1;
      const parts: string[] = [];
      while (j < text.length && text[j] !== '"') {
        if (text[j] === "\\" && j + 1 < text.length) {
          parts.push(text[j + 1]);
          j += 2;
        } else {
          parts.push(text[j]);
          j += 1;
        }
      }
      tokens.push({ kind: "name", value: parts.join("") });
      i = j + 1;
    } else {
      const m = text.slice(i).match(/^[^ \t()!&|=<>"]+/);
      if (!m) throw new Error(`bad constraint text at ${i}: ${text}`);
      tokens.push({ kind: "name", value: m[0] });
      i += m[0].length;
    }
  }
  return tokens;
}

export function evaluateConstraint(text: string, selected: Set<string>): boolean {
  const tokens = tokenize(text);
  let pos = 0;
  const peek = () => tokens[pos]?.kind;
  const atom = (): boolean => {
    const t = tokens[pos++];
    if (!t) throw new Error(`unexpected end of constraint: ${text}`);
    if (t.kind === "name") return selected.has((t as { kind: "name"; value: string }).value);
    if (t.kind === "!") return !atom();
    if (t.kind === "(") {
      const v = iff();
      if (tokens[pos++]?.kind !== ")") throw new Error(`missing ')' in: ${text}`);
      return v;
    }
    throw new Error(`unexpected token '${t.kind}' in: ${text}`);
  };
  const and = (): boolean => {
    let v = atom();
    while (peek() === "&") {
      pos++;
      v = atom() && v;
    }
    return v;
  };
  const or = (): boolean => {
    let v = and();
    while (peek() === "|") {
      pos++;
      v = and() || v;
    }
    return v;
  };
  const implies = (): boolean => {
    const v = or();
    if (peek() === "=>") {
      pos++;
      const rhs = implies(); // consume before short-circuiting
      return !v || rhs;
    }
    return v;
  };
  const iff = (): boolean => {
    const v = implies();
    if (peek() === "<=>") {
      pos++;
      return v === iff();
    }
    return v;
  };
  const result = iff();
  if (pos !== tokens.length) throw new Error(`trailing tokens in: ${text}`);
  return result;
}
