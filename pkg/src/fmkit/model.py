"""Core feature-model representation: feature tree, groups, cross-tree constraints.

Models are treated as immutable values once built; editing produces new models.
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field

from .formula import Formula, Var

FeatureId = int
ConstraintId = int


class GroupKind(enum.Enum):
    AND = "and"
    OR = "or"
    ALTERNATIVE = "alternative"


@dataclass
class Feature:
    id: FeatureId
    name: str
    abstract: bool = False
    mandatory: bool = False
    children: list[FeatureId] = field(default_factory=list)
    group: GroupKind = GroupKind.AND


@dataclass
class Violation:
    code: str
    message: str
    feature: FeatureId | None = None
    constraint: ConstraintId | None = None


class ModelError(ValueError):
    pass


@dataclass
class FeatureModel:
    root: FeatureId
    features: dict[FeatureId, Feature]
    constraints: list[tuple[ConstraintId, Formula]] = field(default_factory=list)
    next_feature_id: int = 0
    next_constraint_id: int = 0

    def __post_init__(self):
        if self.next_feature_id <= max(self.features, default=-1):
            self.next_feature_id = max(self.features, default=-1) + 1
        top = max((cid for cid, _ in self.constraints), default=-1)
        if self.next_constraint_id <= top:
            self.next_constraint_id = top + 1

    # -- lookups ------------------------------------------------------------

    def feature(self, fid: FeatureId) -> Feature:
        try:
            return self.features[fid]
        except KeyError:
            raise ModelError(f"unknown feature id {fid}") from None

    def by_name(self, name: str) -> Feature:
        for f in self.features.values():
            if f.name == name:
                return f
        raise ModelError(f"unknown feature name {name!r}")

    def has_name(self, name: str) -> bool:
        return any(f.name == name for f in self.features.values())

    def parent_map(self) -> dict[FeatureId, FeatureId]:
        parents: dict[FeatureId, FeatureId] = {}
        for f in self.features.values():
            for c in f.children:
                parents[c] = f.id
        return parents

    def preorder(self) -> list[FeatureId]:
        """Feature ids in depth-first pre-order from the root."""
        order: list[FeatureId] = []
        stack = [self.root]
        seen = set()
        while stack:
            fid = stack.pop()
            if fid in seen or fid not in self.features:
                continue
            seen.add(fid)
            order.append(fid)
            stack.extend(reversed(self.features[fid].children))
        return order

    def feature_names(self) -> list[str]:
        return [self.features[fid].name for fid in self.preorder()]

    def constraint(self, cid: ConstraintId) -> Formula:
        for c, formula in self.constraints:
            if c == cid:
                return formula
        raise ModelError(f"unknown constraint id {cid}")

    def clone(self) -> "FeatureModel":
        return copy.deepcopy(self)


@dataclass
class CollapseState:
    """Pure view bookkeeping; never alters the model."""

    collapsed_subtrees: set[FeatureId] = field(default_factory=set)
    hidden_sibling_ranges: set[tuple[FeatureId, int, int]] = field(default_factory=set)


def make_model(root_name: str = "Root", abstract: bool = False) -> FeatureModel:
    root = Feature(id=0, name=root_name, abstract=abstract)
    return FeatureModel(root=0, features={0: root})


def validate(model: FeatureModel) -> list[Violation]:
    """Check all structural invariants; an empty list means the model is well-formed."""
    violations: list[Violation] = []

    if model.root not in model.features:
        violations.append(Violation("missing-root", f"root id {model.root} not in feature table"))
        return violations

    names: dict[str, FeatureId] = {}
    for f in model.features.values():
        if not f.name:
            violations.append(Violation("empty-name", f"feature {f.id} has an empty name", f.id))
        elif any(ord(c) < 32 or ord(c) == 127 for c in f.name):
            violations.append(
                Violation("control-char-name", f"feature {f.id} name contains control characters", f.id)
            )
        if f.name in names:
            violations.append(
                Violation("duplicate-name", f"feature name {f.name!r} used more than once", f.id)
            )
        else:
            names[f.name] = f.id

    parents: dict[FeatureId, FeatureId] = {}
    for f in model.features.values():
        for c in f.children:
            if c not in model.features:
                violations.append(
                    Violation("dangling-child", f"feature {f.name!r} lists unknown child id {c}", f.id)
                )
                continue
            if c in parents:
                violations.append(
                    Violation("multiple-parents", f"feature id {c} has more than one parent", c)
                )
            parents[c] = f.id

    if model.root in parents:
        violations.append(Violation("root-has-parent", "root feature has a parent", model.root))

    reachable = set(model.preorder())
    for fid in model.features:
        if fid not in reachable:
            violations.append(
                Violation("unreachable", f"feature id {fid} not reachable from root", fid)
            )

    for f in model.features.values():
        if f.group in (GroupKind.OR, GroupKind.ALTERNATIVE) and not f.children:
            violations.append(
                Violation(
                    "empty-group",
                    f"{f.group.value} group at {f.name!r} requires at least one child",
                    f.id,
                )
            )

    known = set(names)
    for cid, formula in model.constraints:
        for var in sorted(formula.variables()):
            if var not in known:
                violations.append(
                    Violation(
                        "unknown-feature",
                        f"constraint {cid} references unknown feature {var!r}",
                        constraint=cid,
                    )
                )

    return violations


def collapse_counts(model: FeatureModel, fid: FeatureId) -> tuple[int, int]:
    """(direct children, total strict descendants) for the collapse triangle label."""
    f = model.feature(fid)
    total = 0
    stack = list(f.children)
    while stack:
        c = stack.pop()
        total += 1
        stack.extend(model.feature(c).children)
    return len(f.children), total


def path_to_root(model: FeatureModel, fid: FeatureId) -> list[FeatureId]:
    """Ids from the root down to the given feature, inclusive."""
    model.feature(fid)
    parents = model.parent_map()
    path = [fid]
    while path[-1] != model.root:
        if path[-1] not in parents:
            raise ModelError(f"feature id {fid} not connected to root")
        path.append(parents[path[-1]])
    path.reverse()
    return path


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[len(b)]


def search_features(
    model: FeatureModel, query: str, limit: int
) -> list[tuple[FeatureId, int]]:
    """Features ranked by edit distance to the query; ties broken by pre-order position."""
    if limit < 1:
        raise ModelError("limit must be >= 1")
    ranked = [
        (levenshtein(query, model.features[fid].name), pos, fid)
        for pos, fid in enumerate(model.preorder())
    ]
    ranked.sort()
    return [(fid, dist) for dist, _, fid in ranked[:limit]]


def attach_constraint(model: FeatureModel, formula: Formula) -> ConstraintId:
    """Add a cross-tree constraint, checking that all referenced features exist."""
    known = {f.name for f in model.features.values()}
    for var in sorted(formula.variables()):
        if var not in known:
            raise ModelError(f"constraint references unknown feature {var!r}")
    cid = model.next_constraint_id
    model.next_constraint_id += 1
    model.constraints.append((cid, formula))
    return cid


def add_feature(
    model: FeatureModel,
    name: str,
    parent: FeatureId,
    index: int | None = None,
    abstract: bool = False,
    mandatory: bool = False,
    group: GroupKind = GroupKind.AND,
) -> FeatureId:
    """Builder helper used by parsers and tests; mutates the (under-construction) model."""
    if model.has_name(name):
        raise ModelError(f"feature name {name!r} already used")
    p = model.feature(parent)
    fid = model.next_feature_id
    model.next_feature_id += 1
    model.features[fid] = Feature(
        id=fid, name=name, abstract=abstract, mandatory=mandatory, group=group
    )
    if index is None:
        p.children.append(fid)
    else:
        p.children.insert(index, fid)
    return fid


def effective_mandatory(model: FeatureModel, fid: FeatureId, parents=None) -> bool:
    """Mandatory flag as it counts semantically: only for AND-children below the root."""
    if fid == model.root:
        return False
    parents = parents if parents is not None else model.parent_map()
    parent = model.feature(parents[fid])
    if parent.group is not GroupKind.AND:
        return False
    return model.feature(fid).mandatory


def is_isomorphic(a: FeatureModel, b: FeatureModel) -> bool:
    """Structural equality ignoring feature-id numbering and inert mandatory flags."""

    def shape(model: FeatureModel, fid: FeatureId, mandatory_counts: bool):
        f = model.feature(fid)
        return (
            f.name,
            f.abstract,
            f.mandatory if mandatory_counts else False,
            f.group,
            tuple(
                shape(model, c, f.group is GroupKind.AND) for c in f.children
            ),
        )

    from .formula import flatten_associative

    return shape(a, a.root, False) == shape(b, b.root, False) and [
        flatten_associative(formula) for _, formula in a.constraints
    ] == [flatten_associative(formula) for _, formula in b.constraints]


def var_formula(name: str) -> Formula:
    return Var(name)
