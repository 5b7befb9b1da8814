"""Well-formed edit operations with undo/redo; deletion routes through slicing."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .formula import And, Formula, FormulaError, Iff, Implies, Not, Or, Var, parse_expr, render
from .formats.uvl import serialize_uvl
from .model import Feature, FeatureModel, GroupKind, ModelError
from .slicing import slice_model


class EditError(ValueError):
    pass


class MoveMode(enum.Enum):
    LATERAL_ONLY = "lateral"
    ARBITRARY = "arbitrary"
    DISABLED = "disabled"


@dataclass(frozen=True)
class EditOp:
    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CreateFeature(EditOp):
    name: str
    parent: str
    index: Optional[int] = None

    def to_json(self):
        return {"kind": "CreateFeature", "name": self.name, "parent": self.parent, "index": self.index}


@dataclass(frozen=True)
class Rename(EditOp):
    feature: str
    new_name: str

    def to_json(self):
        return {"kind": "Rename", "feature": self.feature, "newName": self.new_name}


@dataclass(frozen=True)
class SetAbstract(EditOp):
    feature: str
    flag: bool

    def to_json(self):
        return {"kind": "SetAbstract", "feature": self.feature, "flag": self.flag}


@dataclass(frozen=True)
class SetMandatory(EditOp):
    feature: str
    flag: bool

    def to_json(self):
        return {"kind": "SetMandatory", "feature": self.feature, "flag": self.flag}


@dataclass(frozen=True)
class SetGroup(EditOp):
    parent: str
    group: GroupKind

    def to_json(self):
        return {"kind": "SetGroup", "parent": self.parent, "group": self.group.value}


@dataclass(frozen=True)
class MoveFeature(EditOp):
    feature: str
    new_parent: str
    index: Optional[int] = None

    def to_json(self):
        return {
            "kind": "MoveFeature",
            "feature": self.feature,
            "newParent": self.new_parent,
            "index": self.index,
        }


@dataclass(frozen=True)
class DeleteFeature(EditOp):
    feature: str

    def to_json(self):
        return {"kind": "DeleteFeature", "feature": self.feature}


@dataclass(frozen=True)
class AddConstraint(EditOp):
    formula: Formula

    def to_json(self):
        return {"kind": "AddConstraint", "formula": render(self.formula)}


@dataclass(frozen=True)
class EditConstraint(EditOp):
    constraint: int
    formula: Formula

    def to_json(self):
        return {"kind": "EditConstraint", "constraint": self.constraint, "formula": render(self.formula)}


@dataclass(frozen=True)
class DeleteConstraint(EditOp):
    constraint: int

    def to_json(self):
        return {"kind": "DeleteConstraint", "constraint": self.constraint}


def op_from_json(data: dict) -> EditOp:
    try:
        kind = data["kind"]
        if kind == "CreateFeature":
            return CreateFeature(data["name"], data["parent"], data.get("index"))
        if kind == "Rename":
            return Rename(data["feature"], data["newName"])
        if kind == "SetAbstract":
            return SetAbstract(data["feature"], bool(data["flag"]))
        if kind == "SetMandatory":
            return SetMandatory(data["feature"], bool(data["flag"]))
        if kind == "SetGroup":
            return SetGroup(data["parent"], GroupKind(data["group"]))
        if kind == "MoveFeature":
            return MoveFeature(data["feature"], data["newParent"], data.get("index"))
        if kind == "DeleteFeature":
            return DeleteFeature(data["feature"])
        if kind == "AddConstraint":
            return AddConstraint(parse_expr(data["formula"]))
        if kind == "EditConstraint":
            return EditConstraint(int(data["constraint"]), parse_expr(data["formula"]))
        if kind == "DeleteConstraint":
            return DeleteConstraint(int(data["constraint"]))
    except (KeyError, ValueError, FormulaError) as exc:
        raise EditError(f"malformed edit operation: {exc}") from exc
    raise EditError(f"unknown edit operation kind {data.get('kind')!r}")


@dataclass
class InverseRecord:
    op: Optional[EditOp] = None
    snapshot: Optional[FeatureModel] = None


@dataclass
class EditHistory:
    applied: list[tuple[EditOp, InverseRecord]] = field(default_factory=list)
    redo_stack: list[EditOp] = field(default_factory=list)


def canonical(model: FeatureModel) -> str:
    """Canonical serialization used for equality checks across the toolbox."""
    return serialize_uvl(model)


def _descendants(model: FeatureModel, fid: int) -> set[int]:
    out = set()
    stack = [fid]
    while stack:
        f = stack.pop()
        out.add(f)
        stack.extend(model.feature(f).children)
    return out


def _check_formula_vars(model: FeatureModel, formula: Formula):
    known = {f.name for f in model.features.values()}
    for var in sorted(formula.variables()):
        if var not in known:
            raise EditError(f"constraint references unknown feature {var!r}")


def apply(
    model: FeatureModel, op: EditOp, mode: MoveMode = MoveMode.ARBITRARY
) -> tuple[FeatureModel, InverseRecord]:
    """Apply one edit, returning the new model and the record that reverses it."""
    m = model.clone()

    if isinstance(op, CreateFeature):
        if m.has_name(op.name):
            raise EditError(f"feature name {op.name!r} already in use")
        try:
            parent = m.by_name(op.parent)
        except ModelError as exc:
            raise EditError(str(exc)) from exc
        if op.index is not None and not 0 <= op.index <= len(parent.children):
            raise EditError(f"index {op.index} out of range")
        fid = m.next_feature_id
        m.next_feature_id += 1
        m.features[fid] = Feature(id=fid, name=op.name)
        if op.index is None:
            parent.children.append(fid)
        else:
            parent.children.insert(op.index, fid)
        return m, InverseRecord(op=DeleteFeature(op.name))

    if isinstance(op, Rename):
        f = _feature(m, op.feature)
        if op.new_name != op.feature and m.has_name(op.new_name):
            raise EditError(f"feature name {op.new_name!r} already in use")
        _rename_in_constraints(m, op.feature, op.new_name)
        f.name = op.new_name
        return m, InverseRecord(op=Rename(op.new_name, op.feature))

    if isinstance(op, SetAbstract):
        f = _feature(m, op.feature)
        old = f.abstract
        f.abstract = op.flag
        return m, InverseRecord(op=SetAbstract(op.feature, old))

    if isinstance(op, SetMandatory):
        f = _feature(m, op.feature)
        old = f.mandatory
        f.mandatory = op.flag
        return m, InverseRecord(op=SetMandatory(op.feature, old))

    if isinstance(op, SetGroup):
        f = _feature(m, op.parent)
        if op.group is not GroupKind.AND and not f.children:
            raise EditError(f"{op.group.value} group requires at least one child")
        old = f.group
        f.group = op.group
        return m, InverseRecord(op=SetGroup(op.parent, old))

    if isinstance(op, MoveFeature):
        if mode is MoveMode.DISABLED:
            raise EditError("feature moves are disabled")
        f = _feature(m, op.feature)
        if f.id == m.root:
            raise EditError("cannot move the root feature")
        new_parent = _feature(m, op.new_parent)
        if new_parent.id in _descendants(m, f.id):
            raise EditError("cannot move a feature below itself")
        parents = m.parent_map()
        old_parent = m.feature(parents[f.id])
        if mode is MoveMode.LATERAL_ONLY and new_parent.id != old_parent.id:
            raise EditError("lateral moves only: target parent must stay the same")
        old_index = old_parent.children.index(f.id)
        old_parent.children.remove(f.id)
        index = len(new_parent.children) if op.index is None else op.index
        if not 0 <= index <= len(new_parent.children):
            raise EditError(f"index {op.index} out of range")
        new_parent.children.insert(index, f.id)
        if not old_parent.children and old_parent.group is not GroupKind.AND:
            # a group needs members; an emptied or/alternative parent reverts
            # to a plain feature, so undo must restore the full snapshot
            old_parent.group = GroupKind.AND
            return m, InverseRecord(snapshot=model.clone())
        return m, InverseRecord(op=MoveFeature(op.feature, old_parent.name, old_index))

    if isinstance(op, DeleteFeature):
        f = _feature(m, op.feature)
        if f.id == m.root:
            raise EditError("cannot delete the root feature")
        referenced = any(
            op.feature in formula.variables() for _, formula in m.constraints
        )
        if f.children or referenced:
            result = slice_model(m, {op.feature})
            return result.model, InverseRecord(snapshot=model.clone())
        parents = m.parent_map()
        parent = m.feature(parents[f.id])
        parent.children.remove(f.id)
        if not parent.children and parent.group is not GroupKind.AND:
            parent.group = GroupKind.AND
        del m.features[f.id]
        return m, InverseRecord(snapshot=model.clone())

    if isinstance(op, AddConstraint):
        _check_formula_vars(m, op.formula)
        cid = m.next_constraint_id
        m.next_constraint_id += 1
        m.constraints.append((cid, op.formula))
        return m, InverseRecord(op=DeleteConstraint(cid))

    if isinstance(op, EditConstraint):
        _check_formula_vars(m, op.formula)
        for i, (cid, formula) in enumerate(m.constraints):
            if cid == op.constraint:
                m.constraints[i] = (cid, op.formula)
                return m, InverseRecord(op=EditConstraint(cid, formula))
        raise EditError(f"unknown constraint id {op.constraint}")

    if isinstance(op, DeleteConstraint):
        for cid, _ in m.constraints:
            if cid == op.constraint:
                m.constraints = [(c, f) for c, f in m.constraints if c != op.constraint]
                return m, InverseRecord(snapshot=model.clone())
        raise EditError(f"unknown constraint id {op.constraint}")

    raise EditError(f"unknown edit operation {op!r}")


def _feature(m: FeatureModel, name: str):
    try:
        return m.by_name(name)
    except ModelError as exc:
        raise EditError(str(exc)) from exc


def _rename_in_constraints(m: FeatureModel, old: str, new: str):
    def rewrite(f: Formula) -> Formula:
        if isinstance(f, Var):
            return Var(new) if f.name == old else f
        if isinstance(f, Not):
            return Not(rewrite(f.operand))
        if isinstance(f, And):
            return And(tuple(rewrite(x) for x in f.operands))
        if isinstance(f, Or):
            return Or(tuple(rewrite(x) for x in f.operands))
        if isinstance(f, Implies):
            return Implies(rewrite(f.left), rewrite(f.right))
        if isinstance(f, Iff):
            return Iff(rewrite(f.left), rewrite(f.right))
        raise EditError(f"unknown formula node {f!r}")

    m.constraints = [(cid, rewrite(f)) for cid, f in m.constraints]


def apply_with_history(
    model: FeatureModel,
    history: EditHistory,
    op: EditOp,
    mode: MoveMode = MoveMode.ARBITRARY,
) -> FeatureModel:
    new_model, inverse = apply(model, op, mode)
    history.applied.append((op, inverse))
    history.redo_stack.clear()
    return new_model


def undo(model: FeatureModel, history: EditHistory) -> FeatureModel:
    if not history.applied:
        raise EditError("nothing to undo")
    op, inverse = history.applied.pop()
    history.redo_stack.append(op)
    if inverse.snapshot is not None:
        return inverse.snapshot.clone()
    restored, _ = apply(model, inverse.op)
    return restored


def redo(model: FeatureModel, history: EditHistory) -> FeatureModel:
    if not history.redo_stack:
        raise EditError("nothing to redo")
    op = history.redo_stack.pop()
    new_model, inverse = apply(model, op)
    history.applied.append((op, inverse))
    return new_model


__all__ = [
    "AddConstraint",
    "CreateFeature",
    "DeleteConstraint",
    "DeleteFeature",
    "EditConstraint",
    "EditError",
    "EditHistory",
    "EditOp",
    "InverseRecord",
    "MoveFeature",
    "MoveMode",
    "Rename",
    "SetAbstract",
    "SetGroup",
    "SetMandatory",
    "apply",
    "apply_with_history",
    "canonical",
    "op_from_json",
    "redo",
    "undo",
]
