import itertools
import random

import pytest

from fmkit.cnf import encode
from fmkit.formula import Not, Var
from fmkit.model import add_feature, attach_constraint, make_model
from fmkit.sampling import Canceled, Sample, SamplingError, coverage, sample_twise
from fmkit.solver import SatSolver

from genmodels import random_model
from oracle import valid_selections


def oracle_valid_pairs(model, t):
    """Valid t-tuples by enumerating configurations (independent of the SAT filter)."""
    configs = valid_selections(model)
    names = sorted(model.feature_names())
    tuples = set()
    for combo in itertools.combinations(names, t):
        for signs in itertools.product([True, False], repeat=t):
            tup = tuple(zip(combo, signs))
            if any(all((n in c) == v for n, v in tup) for c in configs):
                tuples.add(tup)
    return tuples


def covered_by(config, tup):
    return all(config[name] == value for name, value in tup)


def test_single_root_t1():
    sample = sample_twise(make_model("A"), 1)
    assert sample.configurations == [{"A": True}]


def test_car_t2_full_coverage(car_model):
    sample = sample_twise(car_model, 2, seed=3)
    covered, total, ratio = coverage(car_model, sample, 2)
    assert ratio == 1.0
    assert covered == total
    # three specific pairs force three distinct configurations
    assert len(sample.configurations) == 3
    assert len(sample.configurations) <= len(valid_selections(car_model))


def test_car_t2_needs_three_configurations(car_model):
    # (Electric,!Radio), (Electric,Radio), (Gas,!Radio) are pairwise incompatible
    # within a single configuration pair set of size 2
    required = [
        (("Electric", True), ("Radio", False)),
        (("Electric", True), ("Radio", True)),
        (("Gas", True), ("Radio", False)),
    ]
    configs = [dict.fromkeys(car_model.feature_names()) for _ in range(2)]
    valid = list(valid_selections(car_model))
    for pair in itertools.combinations(valid, 2):
        as_dicts = [
            {n: (n in sel) for n in car_model.feature_names()} for sel in pair
        ]
        hits = [any(covered_by(c, tup) for c in as_dicts) for tup in required]
        assert not all(hits)  # no two valid configurations cover all three


def test_car_t1_two_configs_suffice(car_model):
    sample = sample_twise(car_model, 1, seed=0)
    _, _, ratio = coverage(car_model, sample, 1)
    assert ratio == 1.0
    assert len(sample.configurations) <= 3


def test_void_model_rejected():
    m = make_model("R")
    add_feature(m, "A", m.root, mandatory=True)
    attach_constraint(m, Not(Var("A")))
    with pytest.raises(SamplingError):
        sample_twise(m, 2)


def test_invalid_t():
    with pytest.raises(SamplingError):
        sample_twise(make_model("A"), 4)


def test_determinism(car_model):
    a = sample_twise(car_model, 2, seed=7)
    b = sample_twise(car_model, 2, seed=7)
    assert a.configurations == b.configurations


def test_coverage_of_all_valid_configurations(car_model):
    configs = [
        {n: (n in sel) for n in car_model.feature_names()}
        for sel in sorted(valid_selections(car_model), key=sorted)
    ]
    for t in (1, 2, 3):
        _, _, ratio = coverage(car_model, Sample(configs, t), t)
        assert ratio == 1.0


def test_coverage_empty_sample(car_model):
    covered, total, ratio = coverage(car_model, Sample([], 2), 2)
    assert covered == 0 and ratio == 0.0 and total > 0


def test_coverage_single_config_partial(car_model):
    gas_config = {"Car": True, "Engine": True, "Gas": True, "Electric": False, "Radio": False}
    covered, total, ratio = coverage(car_model, Sample([gas_config], 2), 2)
    oracle_total = len(oracle_valid_pairs(car_model, 2))
    assert total == oracle_total
    assert covered == sum(
        1
        for tup in oracle_valid_pairs(car_model, 2)
        if covered_by(gas_config, tup)
    )
    assert 0 < ratio < 1


def test_coverage_rejects_invalid_configuration(car_model):
    bad = {"Car": True, "Engine": True, "Gas": True, "Electric": True, "Radio": False}
    with pytest.raises(SamplingError):
        coverage(car_model, Sample([bad], 2), 2)


def test_coverage_rejects_incomplete_configuration(car_model):
    with pytest.raises(SamplingError):
        coverage(car_model, Sample([{"Car": True}], 2), 2)


def test_cancellation():
    m = make_model("R")
    for i in range(12):
        add_feature(m, f"C{i}", m.root)
    with pytest.raises(Canceled):
        sample_twise(m, 2, should_cancel=lambda: True)


def test_random_models_full_coverage_and_bounds():
    rng = random.Random(314)
    for _ in range(30):
        model = random_model(rng, max_features=12, max_constraints=3)
        problem = encode(model)
        if SatSolver(problem.num_vars, problem.clauses).solve() is None:
            continue
        sample = sample_twise(model, 2, seed=11, problem=problem)
        covered, total, ratio = coverage(model, sample, 2, problem=problem)
        assert ratio == 1.0
        assert len(sample.configurations) <= len(valid_selections(model))
        # sampled tuple universe matches the enumeration oracle
        assert total == len(oracle_valid_pairs(model, 2))
