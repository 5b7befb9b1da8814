"""UVL subset reader/writer.

Supported: the feature tree with mandatory/optional/or/alternative groups,
{abstract} markers, quoted names, and a constraints section over
!, &, |, =>, <=>. No imports, attributes, or cardinalities.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..formula import FormulaError, parse_expr, render, render_name
from ..model import FeatureModel, GroupKind, add_feature, attach_constraint, make_model
from .diagnostics import ParseDiagnostic, ParseError

_GROUP_WORDS = {"mandatory", "optional", "or", "alternative"}


@dataclass
class _Line:
    number: int
    level: int
    text: str


def _fail(line: int, column: int, message: str):
    raise ParseError([ParseDiagnostic(line, column, message)])


def _split_lines(text: str) -> list[_Line]:
    unit: str | None = None
    out: list[_Line] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.rstrip()
        if not stripped.strip():
            continue
        body = stripped.lstrip(" \t")
        indent = stripped[: len(stripped) - len(body)]
        if not indent:
            out.append(_Line(number, 0, body))
            continue
        if " " in indent and "\t" in indent:
            _fail(number, 1, "mixed tabs and spaces in indentation")
        if unit is None:
            if "\t" in indent:
                unit = "\t"
            elif len(indent) % 4 == 0:
                unit = "    "
            elif len(indent) % 2 == 0:
                unit = "  "
            else:
                _fail(number, 1, "indentation must be tabs or runs of 2 or 4 spaces")
        if indent != unit * (len(indent) // len(unit)) or len(indent) % len(unit) != 0:
            _fail(number, 1, "inconsistent indentation")
        out.append(_Line(number, len(indent) // len(unit), body))
    return out


def _parse_name(text: str, line: int):
    """Returns (name, rest-of-line). Name is a bare word or a double-quoted string."""
    if text.startswith('"'):
        i = 1
        parts = []
        while i < len(text) and text[i] != '"':
            if text[i] == "\\" and i + 1 < len(text):
                parts.append(text[i + 1])
                i += 2
            else:
                parts.append(text[i])
                i += 1
        if i >= len(text):
            _fail(line, len(text), "unterminated quoted name")
        return "".join(parts), text[i + 1 :].strip()
    for i, c in enumerate(text):
        if c in ' \t{':
            return text[:i], text[i:].strip()
    return text, ""


class _TreeParser:
    def __init__(self, lines: list[_Line]):
        self.lines = lines
        self.pos = 0
        self.model: FeatureModel | None = None
        self.seen_names: set[str] = set()

    def peek(self) -> _Line | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def parse_feature(self, level: int, parent: int | None, mandatory: bool) -> int:
        ln = self.lines[self.pos]
        self.pos += 1
        name, rest = _parse_name(ln.text, ln.number)
        if not name:
            _fail(ln.number, 1, "expected feature name")
        abstract = False
        if rest == "{abstract}":
            abstract = True
        elif rest:
            _fail(ln.number, len(ln.text) - len(rest) + 1, f"unexpected trailing text {rest!r}")
        if name in self.seen_names:
            _fail(ln.number, 1, f"duplicate feature name {name!r}")
        self.seen_names.add(name)

        if parent is None:
            self.model = make_model(name, abstract=abstract)
            fid = self.model.root
        else:
            assert self.model is not None
            fid = add_feature(
                self.model, name, parent, abstract=abstract, mandatory=mandatory
            )

        group_class: str | None = None  # "and" | "group"
        while True:
            nxt = self.peek()
            if nxt is None or nxt.level != level + 1:
                break
            if nxt.text not in _GROUP_WORDS:
                _fail(
                    nxt.number,
                    1,
                    "expected group keyword (mandatory/optional/or/alternative)",
                )
            word = nxt.text
            self.pos += 1
            if word in ("mandatory", "optional"):
                if group_class == "group":
                    _fail(nxt.number, 1, f"cannot mix {word!r} with an or/alternative group")
                group_class = "and"
            else:
                if group_class is not None:
                    _fail(nxt.number, 1, f"feature already has a group; cannot add {word!r}")
                group_class = "group"
                self.model.feature(fid).group = (
                    GroupKind.OR if word == "or" else GroupKind.ALTERNATIVE
                )
            child_seen = False
            while True:
                child = self.peek()
                if child is None or child.level != level + 2:
                    break
                if child.level == level + 2 and child.text in _GROUP_WORDS:
                    break
                self.parse_feature(level + 2, fid, mandatory=(word == "mandatory"))
                child_seen = True
            if not child_seen:
                _fail(nxt.number, 1, f"group {word!r} has no child features")
        return fid


def parse_uvl(text: str) -> FeatureModel:
    """Parse a UVL document; raises ParseError with line/column diagnostics."""
    try:
        lines = _split_lines(text)
    except ParseError:
        raise
    except Exception as exc:  # defensive: arbitrary input must yield diagnostics
        raise ParseError([ParseDiagnostic(1, 1, f"unreadable input: {exc}")]) from exc

    if not lines:
        _fail(1, 1, "empty document; expected 'features'")
    if lines[0].level != 0 or lines[0].text != "features":
        _fail(lines[0].number, 1, "expected 'features' at top level")

    parser = _TreeParser(lines)
    parser.pos = 1
    nxt = parser.peek()
    if nxt is None or nxt.level != 1 or nxt.text in _GROUP_WORDS:
        line = nxt.number if nxt else lines[0].number
        _fail(line, 1, "expected a single root feature under 'features'")
    parser.parse_feature(1, None, mandatory=False)
    model = parser.model
    assert model is not None

    nxt = parser.peek()
    if nxt is not None and nxt.level == 1:
        _fail(nxt.number, 1, "only one root feature is allowed")

    if nxt is not None:
        if nxt.level != 0 or nxt.text != "constraints":
            _fail(nxt.number, 1, "expected 'constraints' section")
        parser.pos += 1
        while True:
            ln = parser.peek()
            if ln is None:
                break
            if ln.level < 1:
                _fail(ln.number, 1, "unexpected top-level line after constraints")
            parser.pos += 1
            try:
                formula = parse_expr(ln.text)
            except FormulaError as exc:
                _fail(ln.number, 1, str(exc))
            for var in sorted(formula.variables()):
                if var not in parser.seen_names:
                    _fail(ln.number, 1, f"constraint references unknown feature {var!r}")
            attach_constraint(model, formula)

    return model


def serialize_uvl(model: FeatureModel) -> str:
    """Canonical UVL rendering; tab-indented, child and constraint order preserved."""
    out: list[str] = ["features"]

    def emit(fid: int, depth: int):
        f = model.feature(fid)
        suffix = " {abstract}" if f.abstract else ""
        out.append("\t" * depth + render_name(f.name) + suffix)
        if not f.children:
            return
        if f.group is GroupKind.AND:
            current = None
            for c in f.children:
                word = "mandatory" if model.feature(c).mandatory else "optional"
                if word != current:
                    out.append("\t" * (depth + 1) + word)
                    current = word
                emit(c, depth + 2)
        else:
            word = "or" if f.group is GroupKind.OR else "alternative"
            out.append("\t" * (depth + 1) + word)
            for c in f.children:
                emit(c, depth + 2)

    emit(model.root, 1)
    if model.constraints:
        out.append("constraints")
        for _, formula in model.constraints:
            out.append("\t" + render(formula))
    return "\n".join(out) + "\n"
