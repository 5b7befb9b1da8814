"""Greedy t-wise sample generation and coverage measurement."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable

from .cnf import CnfProblem, encode
from .model import FeatureModel
from .solver import SatSolver


class SamplingError(ValueError):
    pass


class Canceled(Exception):
    pass


@dataclass
class Sample:
    configurations: list[dict[str, bool]]
    t: int


def valid_tuples(
    problem: CnfProblem,
    solver: SatSolver,
    t: int,
    should_cancel: Callable[[], bool] | None = None,
) -> list[tuple[int, ...]]:
    """All satisfiable sign combinations of t distinct feature variables."""
    feature_vars = sorted(problem.var_of_feature.values())
    out = []
    for combo in itertools.combinations(feature_vars, t):
        if should_cancel is not None and should_cancel():
            raise Canceled()
        for signs in itertools.product((1, -1), repeat=t):
            tup = tuple(v * s for v, s in zip(combo, signs))
            if solver.solve(tup) is not None:
                out.append(tup)
    return out


def sample_twise(
    model: FeatureModel,
    t: int,
    seed: int = 0,
    problem: CnfProblem | None = None,
    should_cancel: Callable[[], bool] | None = None,
) -> Sample:
    """Valid configurations covering every satisfiable t-tuple; deterministic per seed."""
    if t not in (1, 2, 3):
        raise SamplingError(f"t must be 1, 2, or 3, got {t}")
    problem = problem if problem is not None else encode(model)
    solver = SatSolver(problem.num_vars, problem.clauses)
    if solver.solve() is None:
        raise SamplingError("model is void; nothing to sample")

    rng = random.Random(seed)
    uncovered = valid_tuples(problem, solver, t, should_cancel)
    rng.shuffle(uncovered)
    names = problem.feature_of_var()
    configurations: list[dict[str, bool]] = []

    while uncovered:
        if should_cancel is not None and should_cancel():
            raise Canceled()
        partial: dict[int, int] = {}
        seeded = uncovered[0]
        for lit in seeded:
            partial[abs(lit)] = lit
        for tup in uncovered[1:]:
            if should_cancel is not None and should_cancel():
                raise Canceled()
            if any(partial.get(abs(lit)) == -lit for lit in tup):
                continue
            candidate = dict(partial)
            for lit in tup:
                candidate[abs(lit)] = lit
            if len(candidate) == len(partial):
                continue  # already absorbed
            if solver.solve(list(candidate.values())) is not None:
                partial = candidate
        assignment = solver.solve(list(partial.values()))
        assert assignment is not None
        config = {name: assignment[v] for v, name in names.items()}
        configurations.append(config)
        literal_set = {v if assignment[v] else -v for v in names}
        uncovered = [tup for tup in uncovered if not all(l in literal_set for l in tup)]

    return Sample(configurations=configurations, t=t)


def coverage(
    model: FeatureModel,
    sample: Sample,
    t: int,
    problem: CnfProblem | None = None,
) -> tuple[int, int, float]:
    """(covered, valid total, ratio) plus per-configuration validity checking."""
    problem = problem if problem is not None else encode(model)
    solver = SatSolver(problem.num_vars, problem.clauses)
    invalid = []
    for i, config in enumerate(sample.configurations):
        missing = set(problem.var_of_feature) - set(config)
        if missing:
            raise SamplingError(f"configuration {i} is incomplete: missing {sorted(missing)}")
        if solver.solve(problem.feature_literals(config)) is None:
            invalid.append(i)
    if invalid:
        raise SamplingError(f"invalid configurations in sample: {invalid}")

    tuples = valid_tuples(problem, solver, t)
    literal_sets = [
        {v if config[name] else -v for name, v in problem.var_of_feature.items()}
        for config in sample.configurations
    ]
    covered = sum(
        1
        for tup in tuples
        if any(all(l in ls for l in tup) for ls in literal_sets)
    )
    total = len(tuples)
    return covered, total, (covered / total if total else 1.0)
