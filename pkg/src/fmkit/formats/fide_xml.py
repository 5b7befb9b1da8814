"""FeatureIDE-style XML reader/writer.

Shape: featureModel > struct > (feature | and | or | alt)*, plus
featureModel > constraints > rule > (imp | conj | disj | eq | not | var).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from ..formula import And, Formula, Iff, Implies, Not, Or, Var
from ..model import FeatureModel, GroupKind, add_feature, attach_constraint, make_model
from .diagnostics import ParseDiagnostic, ParseError

_STRUCT_TAGS = {"feature", "and", "or", "alt"}
_GROUP_OF_TAG = {"and": GroupKind.AND, "or": GroupKind.OR, "alt": GroupKind.ALTERNATIVE}
_RULE_TAGS = {"imp", "conj", "disj", "eq", "not", "var"}


def _fail(message: str, line: int = 0, column: int = 0):
    raise ParseError([ParseDiagnostic(line, column, message)])


def _flag(elem: ET.Element, attr: str) -> bool:
    return elem.get(attr, "false").lower() == "true"


def _check_attrs(elem: ET.Element, allowed: set[str], warnings: list[ParseDiagnostic]):
    for attr in elem.attrib:
        if attr not in allowed:
            warnings.append(
                ParseDiagnostic(0, 0, f"unknown attribute {attr!r} on <{elem.tag}>", "warning")
            )


def parse_fide_xml(text: str) -> FeatureModel:
    """Parse a FeatureIDE XML document; raises ParseError on malformed input."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (0, 0))
        _fail(f"malformed XML: {exc}", line, column + 1)
    except Exception as exc:  # defensive: arbitrary input must yield diagnostics
        _fail(f"unreadable input: {exc}")

    if root.tag != "featureModel":
        _fail(f"expected <featureModel> root, got <{root.tag}>")
    struct = root.find("struct")
    if struct is None:
        _fail("missing <struct> element")
    tops = [e for e in struct if isinstance(e.tag, str)]
    if len(tops) != 1:
        _fail(f"<struct> must hold exactly one root feature element, got {len(tops)}")

    warnings: list[ParseDiagnostic] = []
    seen: set[str] = set()

    def read_feature(elem: ET.Element, model: FeatureModel | None, parent: int | None) -> FeatureModel:
        if elem.tag not in _STRUCT_TAGS:
            _fail(f"unknown structure element <{elem.tag}>")
        name = elem.get("name")
        if not name:
            _fail(f"<{elem.tag}> element without a name attribute")
        if name in seen:
            _fail(f"duplicate feature name {name!r}")
        seen.add(name)
        _check_attrs(elem, {"name", "mandatory", "abstract"}, warnings)
        abstract = _flag(elem, "abstract")
        mandatory = _flag(elem, "mandatory")
        group = _GROUP_OF_TAG.get(elem.tag, GroupKind.AND)
        if model is None:
            model = make_model(name, abstract=abstract)
            fid = model.root
            model.features[fid].group = group
        else:
            fid = add_feature(
                model, name, parent, abstract=abstract, mandatory=mandatory, group=group
            )
        children = [e for e in elem if isinstance(e.tag, str)]
        if elem.tag == "feature" and children:
            _fail(f"<feature> {name!r} must be a leaf; use <and>/<or>/<alt>")
        if elem.tag != "feature" and not children:
            _fail(f"<{elem.tag}> {name!r} requires at least one child")
        for child in children:
            read_feature(child, model, fid)
        return model

    model = read_feature(tops[0], None, None)

    def read_rule(elem: ET.Element) -> Formula:
        if elem.tag not in _RULE_TAGS:
            _fail(f"unknown rule element <{elem.tag}>")
        kids = [e for e in elem if isinstance(e.tag, str)]
        if elem.tag == "var":
            name = (elem.text or "").strip()
            if name not in seen:
                _fail(f"rule references unknown feature {name!r}")
            return Var(name)
        if elem.tag == "not":
            if len(kids) != 1:
                _fail("<not> requires exactly one operand")
            return Not(read_rule(kids[0]))
        if elem.tag in ("imp", "eq"):
            if len(kids) != 2:
                _fail(f"<{elem.tag}> requires exactly two operands")
            cls = Implies if elem.tag == "imp" else Iff
            return cls(read_rule(kids[0]), read_rule(kids[1]))
        if len(kids) < 2:
            _fail(f"<{elem.tag}> requires at least two operands")
        cls = And if elem.tag == "conj" else Or
        return cls(tuple(read_rule(k) for k in kids))

    constraints = root.find("constraints")
    if constraints is not None:
        for rule in constraints:
            if not isinstance(rule.tag, str):
                continue
            if rule.tag != "rule":
                _fail(f"expected <rule>, got <{rule.tag}>")
            kids = [e for e in rule if isinstance(e.tag, str)]
            if len(kids) != 1:
                _fail("<rule> must hold exactly one formula element")
            attach_constraint(model, read_rule(kids[0]))

    return model


def serialize_fide_xml(model: FeatureModel) -> str:
    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<featureModel>", "\t<struct>"]

    def emit(fid: int, depth: int, in_and_group: bool):
        f = model.feature(fid)
        tag = "feature"
        if f.children:
            tag = {GroupKind.AND: "and", GroupKind.OR: "or", GroupKind.ALTERNATIVE: "alt"}[f.group]
        attrs = ""
        if f.abstract:
            attrs += ' abstract="true"'
        if f.mandatory and in_and_group and fid != model.root:
            attrs += ' mandatory="true"'
        attrs += f" name={quoteattr(f.name)}"
        indent = "\t" * depth
        if not f.children:
            out.append(f"{indent}<{tag}{attrs}/>")
            return
        out.append(f"{indent}<{tag}{attrs}>")
        for c in f.children:
            emit(c, depth + 1, f.group is GroupKind.AND)
        out.append(f"{indent}</{tag}>")

    emit(model.root, 2, False)
    out.append("\t</struct>")

    def emit_rule(f: Formula, depth: int):
        indent = "\t" * depth
        if isinstance(f, Var):
            out.append(f"{indent}<var>{escape(f.name)}</var>")
        elif isinstance(f, Not):
            out.append(f"{indent}<not>")
            emit_rule(f.operand, depth + 1)
            out.append(f"{indent}</not>")
        elif isinstance(f, (And, Or)):
            tag = "conj" if isinstance(f, And) else "disj"
            out.append(f"{indent}<{tag}>")
            for op in f.operands:
                emit_rule(op, depth + 1)
            out.append(f"{indent}</{tag}>")
        elif isinstance(f, (Implies, Iff)):
            tag = "imp" if isinstance(f, Implies) else "eq"
            out.append(f"{indent}<{tag}>")
            emit_rule(f.left, depth + 1)
            emit_rule(f.right, depth + 1)
            out.append(f"{indent}</{tag}>")

    if model.constraints:
        out.append("\t<constraints>")
        for _, formula in model.constraints:
            out.append("\t\t<rule>")
            emit_rule(formula, 3)
            out.append("\t\t</rule>")
        out.append("\t</constraints>")
    out.append("</featureModel>")
    return "\n".join(out) + "\n"
