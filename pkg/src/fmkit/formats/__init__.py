"""Feature-model format parsing, serialization, and transformation."""

from __future__ import annotations

import enum

from ..cnf import encode
from ..model import FeatureModel
from .diagnostics import ParseDiagnostic, ParseError
from .dimacs import export_dimacs
from .fide_xml import parse_fide_xml, serialize_fide_xml
from .uvl import parse_uvl, serialize_uvl

__all__ = [
    "FormatKind",
    "ParseDiagnostic",
    "ParseError",
    "UnsupportedDirection",
    "export_dimacs",
    "parse",
    "parse_fide_xml",
    "parse_uvl",
    "serialize",
    "serialize_fide_xml",
    "serialize_uvl",
    "transform",
]


class FormatKind(enum.Enum):
    UVL = "uvl"
    FIDE_XML = "xml"
    DIMACS = "dimacs"
    SVG = "svg"  # export-only; rendered by the browser frontend


class UnsupportedDirection(ValueError):
    pass


def parse(text: str, kind: FormatKind) -> FeatureModel:
    if kind is FormatKind.UVL:
        return parse_uvl(text)
    if kind is FormatKind.FIDE_XML:
        return parse_fide_xml(text)
    raise UnsupportedDirection(f"{kind.value} is an export-only format")


def serialize(model: FeatureModel, kind: FormatKind) -> str:
    if kind is FormatKind.UVL:
        return serialize_uvl(model)
    if kind is FormatKind.FIDE_XML:
        return serialize_fide_xml(model)
    if kind is FormatKind.DIMACS:
        return export_dimacs(encode(model))
    raise UnsupportedDirection(f"{kind.value} is not serialized by the core")


def transform(text: str, source: FormatKind, target: FormatKind) -> str:
    """Parse-then-serialize composition; DIMACS targets go through CNF encoding."""
    return serialize(parse(text, source), target)
