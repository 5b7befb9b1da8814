"""CNF encoding of feature models and propositional formulas.

Diagram semantics: the root is always selected; every child implies its
parent; mandatory AND-children are implied by their parent; an OR parent
implies the disjunction of its children; an ALTERNATIVE parent implies
exactly one selected child.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import And, Formula, Iff, Implies, Not, Or, Var
from .model import FeatureModel, GroupKind

# A constraint whose distributed CNF stays at or below this many literals is
# emitted directly; larger non-clausal constraints go through Tseitin.
DISTRIBUTION_LITERAL_LIMIT = 8


@dataclass
class CnfProblem:
    num_vars: int
    clauses: list[tuple[int, ...]]
    var_of_feature: dict[str, int]
    aux_vars: set[int] = field(default_factory=set)

    def feature_of_var(self) -> dict[int, str]:
        return {v: name for name, v in self.var_of_feature.items()}

    def feature_literals(self, assignment: dict[str, bool]) -> list[int]:
        return [
            v if assignment[name] else -v
            for name, v in self.var_of_feature.items()
            if name in assignment
        ]


def clean_clause(lits) -> tuple[int, ...] | None:
    """Dedupe literals; None for tautologies."""
    seen = set(lits)
    if any(-lit in seen for lit in seen):
        return None
    return tuple(sorted(seen, key=abs))


def _nnf(f: Formula, positive: bool = True) -> Formula:
    if isinstance(f, Var):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.operand, not positive)
    if isinstance(f, And):
        ops = tuple(_nnf(op, positive) for op in f.operands)
        return And(ops) if positive else Or(ops)
    if isinstance(f, Or):
        ops = tuple(_nnf(op, positive) for op in f.operands)
        return Or(ops) if positive else And(ops)
    if isinstance(f, Implies):
        return _nnf(Or((Not(f.left), f.right)), positive)
    if isinstance(f, Iff):
        expanded = Or((And((f.left, f.right)), And((Not(f.left), Not(f.right)))))
        return _nnf(expanded, positive)
    raise TypeError(f"unknown formula node: {f!r}")


def _distribute(f: Formula, var_of: dict[str, int], cap: int) -> list[list[int]] | None:
    """CNF by distribution, or None once the result exceeds `cap` total literals."""
    if isinstance(f, Var):
        return [[var_of[f.name]]]
    if isinstance(f, Not):  # NNF: operand is a Var
        return [[-var_of[f.operand.name]]]
    if isinstance(f, And):
        out: list[list[int]] = []
        for op in f.operands:
            sub = _distribute(op, var_of, cap)
            if sub is None:
                return None
            out.extend(sub)
            if sum(len(c) for c in out) > cap and len(out) > 1:
                return None
        return out
    if isinstance(f, Or):
        out = [[]]
        for op in f.operands:
            sub = _distribute(op, var_of, cap)
            if sub is None:
                return None
            out = [a + b for a in out for b in sub]
            if len(out) > 1 and sum(len(c) for c in out) > cap:
                return None
        return out
    raise TypeError(f"non-NNF node in distribution: {f!r}")


def _tseitin(f: Formula, var_of: dict[str, int], next_var: int):
    """Full (biconditional) Tseitin over an NNF And/Or tree.

    Returns (root literal, clauses, aux vars, next free var). Biconditional
    definitions keep auxiliary variables functionally determined by the
    feature variables, so solution counting needs no projection.
    """
    clauses: list[list[int]] = []
    aux: list[int] = []

    def lit_of(node: Formula) -> int:
        nonlocal next_var
        if isinstance(node, Var):
            return var_of[node.name]
        if isinstance(node, Not):
            return -var_of[node.operand.name]
        ops = [lit_of(op) for op in node.operands]
        x = next_var
        next_var += 1
        aux.append(x)
        if isinstance(node, And):
            for lit in ops:
                clauses.append([-x, lit])
            clauses.append([x] + [-lit for lit in ops])
        else:
            for lit in ops:
                clauses.append([-lit, x])
            clauses.append([-x] + ops)
        return x

    root = lit_of(f)
    return root, clauses, aux, next_var


def formula_clauses(
    formula: Formula, var_of: dict[str, int], next_var: int
) -> tuple[list[tuple[int, ...]], list[int], int]:
    """Clauses asserting the formula; returns (clauses, new aux vars, next free var)."""
    nnf = _nnf(formula)
    flat = _distribute(nnf, var_of, DISTRIBUTION_LITERAL_LIMIT * 4)
    if flat is not None:
        cleaned = [c for c in (clean_clause(c) for c in flat) if c is not None]
        if len(cleaned) <= 1 or sum(len(c) for c in cleaned) <= DISTRIBUTION_LITERAL_LIMIT:
            return cleaned, [], next_var
    root, raw, aux, next_var = _tseitin(nnf, var_of, next_var)
    raw.append([root])
    cleaned = [c for c in (clean_clause(c) for c in raw) if c is not None]
    return cleaned, aux, next_var


def encode(model: FeatureModel) -> CnfProblem:
    """Encode a validated model; satisfying assignments projected onto feature
    variables are exactly the valid configurations."""
    order = model.preorder()
    var_of = {model.feature(fid).name: i for i, fid in enumerate(order, start=1)}
    clauses: list[tuple[int, ...]] = [(var_of[model.feature(model.root).name],)]

    for fid in order:
        f = model.feature(fid)
        vp = var_of[f.name]
        child_vars = [var_of[model.feature(c).name] for c in f.children]
        for c, vc in zip(f.children, child_vars):
            clauses.append(clean_clause((-vc, vp)))
            if f.group is GroupKind.AND and model.feature(c).mandatory:
                clauses.append(clean_clause((-vp, vc)))
        if f.group is GroupKind.OR and child_vars:
            clauses.append(clean_clause([-vp] + child_vars))
        elif f.group is GroupKind.ALTERNATIVE and child_vars:
            clauses.append(clean_clause([-vp] + child_vars))
            for i in range(len(child_vars)):
                for j in range(i + 1, len(child_vars)):
                    clauses.append(clean_clause((-child_vars[i], -child_vars[j])))

    next_var = len(order) + 1
    aux_vars: set[int] = set()
    for _, formula in model.constraints:
        extra, aux, next_var = formula_clauses(formula, var_of, next_var)
        clauses.extend(extra)
        aux_vars.update(aux)

    clauses = [c for c in clauses if c is not None]
    # dedupe while preserving order
    seen: set[tuple[int, ...]] = set()
    unique = []
    for c in clauses:
        if c not in seen:
            seen.add(c)
            unique.append(c)
    return CnfProblem(
        num_vars=next_var - 1,
        clauses=unique,
        var_of_feature=var_of,
        aux_vars=aux_vars,
    )
