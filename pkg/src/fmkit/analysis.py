"""Satisfiability-based model analyses: anomalies, decision propagation, counting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .cnf import CnfProblem, encode
from .model import FeatureModel, GroupKind
from .solver import SatSolver

DEFAULT_ENUMERATION_BOUND = 24


class AnalysisError(ValueError):
    pass


class State(enum.Enum):
    SELECTED = "selected"
    DESELECTED = "deselected"
    UNDECIDED = "undecided"


class Provenance(enum.Enum):
    EXPLICIT = "explicit"
    IMPLIED = "implied"


@dataclass
class AnomalyReport:
    void: bool
    core: set[str] = field(default_factory=set)
    dead: set[str] = field(default_factory=set)
    false_optional: set[str] = field(default_factory=set)

    def to_json(self) -> dict:
        return {
            "void": self.void,
            "core": sorted(self.core),
            "dead": sorted(self.dead),
            "falseOptional": sorted(self.false_optional),
        }


@dataclass
class Configuration:
    """Partial assignment with per-feature provenance and an explicit-decision history."""

    states: dict[str, tuple[State, Provenance]] = field(default_factory=dict)
    history: list[tuple[str, State]] = field(default_factory=list)

    def decide(self, feature: str, state: State) -> None:
        """Record an explicit decision; UNDECIDED frees the feature again."""
        self.history.append((feature, state))
        if state is State.UNDECIDED:
            self.states.pop(feature, None)
        else:
            self.states[feature] = (state, Provenance.EXPLICIT)

    def explicit(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for name, (state, prov) in self.states.items():
            if prov is Provenance.EXPLICIT and state is not State.UNDECIDED:
                out[name] = state is State.SELECTED
        return out

    def rollback(self, steps: int) -> "Configuration":
        """Configuration rebuilt from the first `steps` history entries."""
        fresh = Configuration()
        for feature, state in self.history[:steps]:
            fresh.decide(feature, state)
        return fresh

    @classmethod
    def from_decisions(cls, select=(), deselect=()) -> "Configuration":
        config = cls()
        for name in select:
            config.decide(name, State.SELECTED)
        for name in deselect:
            config.decide(name, State.DESELECTED)
        return config


@dataclass
class PropagationResult:
    configuration: Configuration
    open_features: set[str]
    valid: bool
    conflict: str | None = None

    def to_json(self) -> dict:
        states = {
            name: {"state": state.value, "provenance": prov.value}
            for name, (state, prov) in self.configuration.states.items()
        }
        return {
            "valid": self.valid,
            "states": states,
            "open": sorted(self.open_features),
            "conflict": self.conflict,
        }


def solve(problem: CnfProblem, assumptions=()) -> dict[int, bool] | None:
    """One-shot satisfiability query; reuse SatSolver directly for query batches."""
    return SatSolver(problem.num_vars, problem.clauses).solve(assumptions)


def analyze(model: FeatureModel, problem: CnfProblem | None = None) -> AnomalyReport:
    """Void/core/dead/false-optional detection via assumption queries."""
    problem = problem if problem is not None else encode(model)
    solver = SatSolver(problem.num_vars, problem.clauses)
    if solver.solve() is None:
        return AnomalyReport(void=True)

    report = AnomalyReport(void=False)
    for name, v in problem.var_of_feature.items():
        if solver.solve([-v]) is None:
            report.core.add(name)
        elif solver.solve([v]) is None:
            report.dead.add(name)

    parents = model.parent_map()
    for fid, pid in parents.items():
        f = model.feature(fid)
        parent = model.feature(pid)
        if parent.group is not GroupKind.AND or f.mandatory:
            continue
        if f.name in report.dead:
            continue
        vf = problem.var_of_feature[f.name]
        vp = problem.var_of_feature[parent.name]
        if solver.solve([vp, -vf]) is None:
            report.false_optional.add(f.name)
    return report


def propagate(
    model: FeatureModel, config: Configuration, problem: CnfProblem | None = None
) -> PropagationResult:
    """Fill in implied selections/deselections and mark open features."""
    problem = problem if problem is not None else encode(model)
    known = {f.name for f in model.features.values()}
    explicit = config.explicit()
    for name in explicit:
        if name not in known:
            raise AnalysisError(f"decision references unknown feature {name!r}")

    solver = SatSolver(problem.num_vars, problem.clauses)
    assumptions = [
        problem.var_of_feature[name] if value else -problem.var_of_feature[name]
        for name, value in explicit.items()
    ]

    result_config = Configuration(states=dict(config.states), history=list(config.history))
    # drop implied states from any previous propagation; they are recomputed
    result_config.states = {
        name: sp for name, sp in result_config.states.items() if sp[1] is Provenance.EXPLICIT
    }

    if solver.solve(assumptions) is None:
        return PropagationResult(
            configuration=result_config,
            open_features=set(),
            valid=False,
            conflict="explicit decisions are contradictory",
        )

    decided: dict[int, bool] = {}
    for name, value in explicit.items():
        decided[problem.var_of_feature[name]] = value

    for name, v in problem.var_of_feature.items():
        if name in explicit:
            continue
        if solver.solve(assumptions + [-v]) is None:
            result_config.states[name] = (State.SELECTED, Provenance.IMPLIED)
            decided[v] = True
        elif solver.solve(assumptions + [v]) is None:
            result_config.states[name] = (State.DESELECTED, Provenance.IMPLIED)
            decided[v] = False

    open_features: set[str] = set()
    feature_of_var = problem.feature_of_var()
    for clause in problem.clauses:
        if any(decided.get(abs(lit)) == (lit > 0) for lit in clause):
            continue
        for lit in clause:
            name = feature_of_var.get(abs(lit))
            if name is not None and abs(lit) not in decided:
                open_features.add(name)

    return PropagationResult(
        configuration=result_config, open_features=open_features, valid=True
    )


def count_solutions(
    model: FeatureModel,
    bound: int = DEFAULT_ENUMERATION_BOUND,
    problem: CnfProblem | None = None,
) -> int:
    """Exact number of valid configurations by blocking-clause enumeration."""
    if len(model.features) > bound:
        raise AnalysisError(
            f"model has {len(model.features)} features; enumeration bound is {bound}"
        )
    problem = problem if problem is not None else encode(model)
    solver = SatSolver(problem.num_vars, problem.clauses)
    feature_vars = sorted(problem.var_of_feature.values())
    count = 0
    while True:
        assignment = solver.solve()
        if assignment is None:
            return count
        count += 1
        solver.add_clause([-v if assignment[v] else v for v in feature_vars])


def satisfies(model: FeatureModel, assignment: dict[str, bool]) -> bool:
    """Evaluate a total feature assignment directly against diagram semantics."""
    get = lambda fid: assignment[model.feature(fid).name]
    if not get(model.root):
        return False
    for f in model.features.values():
        selected_children = [c for c in f.children if get(c)]
        for c in selected_children:
            if not get(f.id):
                return False
        if not get(f.id):
            continue
        if f.group is GroupKind.AND:
            for c in f.children:
                if model.feature(c).mandatory and not get(c):
                    return False
        elif f.group is GroupKind.OR:
            if f.children and not selected_children:
                return False
        elif f.group is GroupKind.ALTERNATIVE:
            if f.children and len(selected_children) != 1:
                return False
    return all(formula.evaluate(assignment) for _, formula in model.constraints)
