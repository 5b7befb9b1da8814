// Feature-model types and the UVL-subset reader/writer used by the viewer.
// The frontend receives models as UVL text from the HTTP/websocket API and
// never talks to the core's internals.

export type GroupKind = "and" | "or" | "alternative";

export interface Feature {
  name: string;
  mandatory: boolean;
  abstract: boolean;
  group: GroupKind;
  children: Feature[];
}

export interface FeatureModel {
  root: Feature;
  constraints: string[];
}

export class UvlParseError extends Error {
  constructor(public line: number, message: string) {
    super(`${line}: ${message}`);
  }
}

export function makeFeature(name: string, opts: Partial<Feature> = {}): Feature {
  return {
    name,
    mandatory: opts.mandatory ?? false,
    abstract: opts.abstract ?? false,
    group: opts.group ?? "and",
    children: opts.children ?? [],
  };
}

export function cloneModel(model: FeatureModel): FeatureModel {
  const cloneFeature = (f: Feature): Feature => ({
    ...f,
    children: f.children.map(cloneFeature),
  });
  return { root: cloneFeature(model.root), constraints: [...model.constraints] };
}

export function walk(model: FeatureModel, visit: (f: Feature, parent: Feature | null) => void): void {
  const go = (f: Feature, parent: Feature | null) => {
    visit(f, parent);
    for (const c of f.children) go(c, f);
  };
  go(model.root, null);
}

export function findFeature(model: FeatureModel, name: string): Feature | null {
  let found: Feature | null = null;
  walk(model, (f) => {
    if (f.name === name) found = f;
  });
  return found;
}

export function parentOf(model: FeatureModel, name: string): Feature | null {
  let found: Feature | null = null;
  walk(model, (f, parent) => {
    if (f.name === name) found = parent;
  });
  return found;
}

export function featureNames(model: FeatureModel): string[] {
  const names: string[] = [];
  walk(model, (f) => names.push(f.name));
  return names;
}

/** (direct, total) strict-descendant counts, used to label collapse triangles. */
export function collapseCounts(feature: Feature): { direct: number; total: number } {
  let total = 0;
  const count = (f: Feature) => {
    for (const c of f.children) {
      total += 1;
      count(c);
    }
  };
  count(feature);
  return { direct: feature.children.length, total };
}

const GROUP_WORDS = new Set(["mandatory", "optional", "or", "alternative"]);

interface Line {
  number: number;
  level: number;
  text: string;
}

function splitLines(text: string): Line[] {
  let unit: string | null = null;
  const out: Line[] = [];
  const rows = text.split(/\r?\n/);
  for (let i = 0; i < rows.length; i++) {
    const number = i + 1;
    const stripped = rows[i].replace(/\s+$/, "");
    if (!stripped.trim()) continue;
    const body = stripped.replace(/^[ \t]+/, "");
    const indent = stripped.slice(0, stripped.length - body.length);
    if (!indent) {
      out.push({ number, level: 0, text: body });
      continue;
    }
    if (indent.includes(" ") && indent.includes("\t")) {
      throw new UvlParseError(number, "mixed tabs and spaces in indentation");
    }
    if (unit === null) {
      if (indent.includes("\t")) unit = "\t";
      else if (indent.length % 4 === 0) unit = "    ";
      else if (indent.length % 2 === 0) unit = "  ";
      else throw new UvlParseError(number, "indentation must be tabs or runs of 2 or 4 spaces");
    }
    if (indent.length % unit.length !== 0 || indent !== unit.repeat(indent.length / unit.length)) {
      throw new UvlParseError(number, "inconsistent indentation");
    }
    out.push({ number, level: indent.length / unit.length, text: body });
  }
  return out;
}

function parseName(text: string, line: number): [string, string] {
  if (text.startsWith('"')) {
    let i = 1;
    const parts: string[] = [];
    while (i < text.length && text[i] !== '"') {
      if (text[i] === "\\" && i + 1 < text.length) {
        parts.push(text[i + 1]);
        i += 2;
      } else {
        parts.push(text[i]);
        i += 1;
      }
    }
    if (i >= text.length) throw new UvlParseError(line, "unterminated quoted name");
    return [parts.join(""), text.slice(i + 1).trim()];
  }
  const m = text.match(/^[^ \t{]+/);
  if (!m) throw new UvlParseError(line, "expected feature name");
  return [m[0], text.slice(m[0].length).trim()];
}

export function parseUvl(text: string): FeatureModel {
  const lines = splitLines(text);
  if (lines.length === 0) throw new UvlParseError(1, "empty document; expected 'features'");
  if (lines[0].level !== 0 || lines[0].text !== "features") {
    throw new UvlParseError(lines[0].number, "expected 'features' at top level");
  }
  let pos = 1;
  const seen = new Set<string>();

  const parseFeature = (level: number, mandatory: boolean): Feature => {
    const ln = lines[pos++];
    const [name, rest] = parseName(ln.text, ln.number);
    let abstract = false;
    if (rest === "{abstract}") abstract = true;
    else if (rest) throw new UvlParseError(ln.number, `unexpected trailing text '${rest}'`);
    if (seen.has(name)) throw new UvlParseError(ln.number, `duplicate feature name '${name}'`);
    seen.add(name);
    const feature = makeFeature(name, { mandatory, abstract });

    let groupClass: "and" | "group" | null = null;
    while (pos < lines.length && lines[pos].level === level + 1) {
      const word = lines[pos].text;
      if (!GROUP_WORDS.has(word)) {
        throw new UvlParseError(lines[pos].number, "expected group keyword (mandatory/optional/or/alternative)");
      }
      const groupLine = lines[pos].number;
      pos += 1;
      if (word === "mandatory" || word === "optional") {
        if (groupClass === "group") {
          throw new UvlParseError(groupLine, `cannot mix '${word}' with an or/alternative group`);
        }
        groupClass = "and";
      } else {
        if (groupClass !== null) {
          throw new UvlParseError(groupLine, `feature already has a group; cannot add '${word}'`);
        }
        groupClass = "group";
        feature.group = word === "or" ? "or" : "alternative";
      }
      let childSeen = false;
      while (pos < lines.length && lines[pos].level === level + 2 && !GROUP_WORDS.has(lines[pos].text)) {
        feature.children.push(parseFeature(level + 2, word === "mandatory"));
        childSeen = true;
      }
      if (!childSeen) throw new UvlParseError(groupLine, `group '${word}' has no child features`);
    }
    return feature;
  };

  if (pos >= lines.length || lines[pos].level !== 1 || GROUP_WORDS.has(lines[pos].text)) {
    throw new UvlParseError(lines[Math.min(pos, lines.length - 1)].number, "expected a single root feature under 'features'");
  }
  const root = parseFeature(1, false);
  const constraints: string[] = [];
  if (pos < lines.length) {
    if (lines[pos].level !== 0 || lines[pos].text !== "constraints") {
      throw new UvlParseError(lines[pos].number, "expected 'constraints' section");
    }
    pos += 1;
    while (pos < lines.length) {
      const ln = lines[pos++];
      if (ln.level < 1) throw new UvlParseError(ln.number, "unexpected top-level line after constraints");
      constraints.push(ln.text);
    }
  }
  return { root, constraints };
}

function renderName(name: string): string {
  if (/^[^ \t{"!&|=<>()]+$/.test(name) && !GROUP_WORDS.has(name) && name.length > 0) {
    return name;
  }
  return `"${name.replace(/\\/g, "\\\\").replace(/"/g, '\\"')}"`;
}

/** Canonical tab-indented rendering; matches the service's session snapshots. */
export function serializeUvl(model: FeatureModel): string {
  const out: string[] = ["features"];
  const emit = (f: Feature, depth: number) => {
    const suffix = f.abstract ? " {abstract}" : "";
    out.push("\t".repeat(depth) + renderName(f.name) + suffix);
    if (f.children.length === 0) return;
    if (f.group === "and") {
      let current: string | null = null;
      for (const c of f.children) {
        const word = c.mandatory ? "mandatory" : "optional";
        if (word !== current) {
          out.push("\t".repeat(depth + 1) + word);
          current = word;
        }
        emit(c, depth + 2);
      }
    } else {
      out.push("\t".repeat(depth + 1) + f.group);
      for (const c of f.children) emit(c, depth + 2);
    }
  };
  emit(model.root, 1);
  if (model.constraints.length > 0) {
    out.push("constraints");
    for (const c of model.constraints) out.push("\t" + c);
  }
  return out.join("\n") + "\n";
}

/** Feature names referenced by a constraint's expression text. */
export function constraintVariables(constraint: string): string[] {
  const names: string[] = [];
  const re = /"((?:[^"\\]|\\.)*)"|[A-Za-z0-9_][A-Za-z0-9_.-]*/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(constraint)) !== null) {
    names.push(m[1] !== undefined ? m[1].replace(/\\(.)/g, "$1") : m[0]);
  }
  return names;
}

/** Levenshtein distance, used for the search box suggestions. */
export function levenshtein(a: string, b: string): number {
  let prev = Array.from({ length: b.length + 1 }, (_, j) => j);
  for (let i = 1; i <= a.length; i++) {
    const cur = [i];
    for (let j = 1; j <= b.length; j++) {
      cur.push(Math.min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] === b[j - 1] ? 0 : 1)));
    }
    prev = cur;
  }
  return prev[b.length];
}

/** Top search suggestions by edit distance, preorder position breaking ties. */
export function searchFeatures(model: FeatureModel, query: string, limit = 8): string[] {
  const scored = featureNames(model).map((name, position) => ({
    name,
    distance: levenshtein(query.toLowerCase(), name.toLowerCase()),
    position,
  }));
  scored.sort((x, y) => x.distance - y.distance || x.position - y.position);
  return scored.slice(0, limit).map((s) => s.name);
}
