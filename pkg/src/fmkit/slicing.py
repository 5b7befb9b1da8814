"""Feature-model slicing: remove features while preserving projected semantics.

Procedure: encode to CNF, eliminate the removed feature variables and all
auxiliary variables by resolution (Davis-Putnam), drop tautologies and
subsumed clauses, rebuild the tree deterministically, and attach surviving
clauses that the rebuilt tree does not already imply as derived constraints.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cnf import encode
from .formula import Formula, Not, Or, Var
from .model import FeatureModel, GroupKind, ModelError, validate
from .solver import SatSolver


class SliceError(ValueError):
    pass


@dataclass
class SliceResult:
    model: FeatureModel  # derived constraints attached
    derived_constraints: list[Formula]


def eliminate_variables(
    clauses: list[tuple[int, ...]], eliminate: set[int]
) -> list[frozenset[int]]:
    """Davis-Putnam existential elimination; returns irredundant surviving clauses."""
    working = {frozenset(c) for c in clauses}
    remaining = set(eliminate)
    while remaining:
        # cheapest variable first bounds intermediate growth
        def cost(v: int) -> int:
            pos = sum(1 for c in working if v in c)
            neg = sum(1 for c in working if -v in c)
            return pos * neg

        v = min(remaining, key=lambda x: (cost(x), x))
        remaining.discard(v)
        pos = [c for c in working if v in c]
        neg = [c for c in working if -v in c]
        working.difference_update(pos)
        working.difference_update(neg)
        for p in pos:
            for q in neg:
                resolvent = (p - {v}) | (q - {-v})
                if any(-lit in resolvent for lit in resolvent):
                    continue
                working.add(resolvent)

    # subsumption: keep only minimal clauses
    ordered = sorted(working, key=lambda c: (len(c), sorted(abs(l) for l in c)))
    kept: list[frozenset[int]] = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


def _rebuild_tree(model: FeatureModel, removed_ids: set[int]) -> FeatureModel:
    result = model.clone()
    result.constraints = []

    # splice deepest removed features first so children land on kept ancestors
    depth: dict[int, int] = {result.root: 0}
    for fid in result.preorder():
        for c in result.feature(fid).children:
            depth[c] = depth[fid] + 1
    for fid in sorted(removed_ids, key=lambda f: -depth[f]):
        parents = result.parent_map()
        parent = result.feature(parents[fid])
        feature = result.feature(fid)
        index = parent.children.index(fid)
        parent.children[index : index + 1] = feature.children
        # mandatory-ness was relative to the removed parent; derived clauses
        # re-assert it where still semantically forced
        for c in feature.children:
            result.feature(c).mandatory = False
        del result.features[fid]

    # a kept or/alternative parent that lost or gained children degenerates
    for f in result.features.values():
        if f.group is GroupKind.AND:
            continue
        original = model.feature(f.id)
        if f.children != original.children:
            f.group = GroupKind.AND
            for c in f.children:
                result.feature(c).mandatory = False
    return result


def slice_model(model: FeatureModel, remove: set[str]) -> SliceResult:
    if not remove:
        raise SliceError("removal set must be non-empty")
    if validate(model):
        raise SliceError("model fails validation")
    root_name = model.feature(model.root).name
    if root_name in remove:
        raise SliceError("cannot remove the root feature")
    removed_ids = set()
    for name in remove:
        try:
            removed_ids.add(model.by_name(name).id)
        except ModelError:
            raise SliceError(f"unknown feature name {name!r}") from None

    problem = encode(model)
    eliminate = set(problem.aux_vars)
    eliminate.update(problem.var_of_feature[name] for name in remove)
    surviving = eliminate_variables(problem.clauses, eliminate)

    result = _rebuild_tree(model, removed_ids)

    # drop surviving clauses that the rebuilt tree already implies
    tree_cnf = encode(result)
    tree_solver = SatSolver(tree_cnf.num_vars, tree_cnf.clauses)
    names = problem.feature_of_var()
    derived: list[Formula] = []
    for clause in sorted(surviving, key=lambda c: (len(c), sorted(abs(l) for l in c))):
        if not clause:
            derived.append(Not(Var(root_name)))  # void projection
            continue
        mapped = [
            tree_cnf.var_of_feature[names[abs(lit)]] * (1 if lit > 0 else -1)
            for lit in sorted(clause, key=abs)
        ]
        if tree_solver.solve([-lit for lit in mapped]) is not None:
            literals = [
                Var(names[abs(lit)]) if lit > 0 else Not(Var(names[abs(lit)]))
                for lit in sorted(clause, key=abs)
            ]
            derived.append(literals[0] if len(literals) == 1 else Or(tuple(literals)))

    for formula in derived:
        cid = result.next_constraint_id
        result.next_constraint_id += 1
        result.constraints.append((cid, formula))
    return SliceResult(model=result, derived_constraints=derived)
