import random

import pytest

from fmkit.formula import render
from fmkit.model import GroupKind, add_feature, validate
from fmkit.slicing import SliceError, slice_model

from genmodels import random_model
from oracle import valid_selections


def projection(model, remove):
    kept = set(model.feature_names()) - set(remove)
    return {frozenset(c & kept) for c in valid_selections(model)}


def test_slice_car_remove_radio(car_model):
    result = slice_model(car_model, {"Radio"})
    assert "Radio" not in result.model.feature_names()
    assert result.derived_constraints == []
    assert valid_selections(result.model) == projection(car_model, {"Radio"})
    assert len(valid_selections(result.model)) == 2


def test_slice_car_remove_electric(car_model):
    result = slice_model(car_model, {"Electric"})
    assert "Electric" not in result.model.feature_names()
    # alternative group degenerates: Gas becomes an optional AND-child
    engine = result.model.by_name("Engine")
    assert engine.group is GroupKind.AND
    assert not result.model.by_name("Gas").mandatory
    # derived constraint equivalent to Radio => !Gas
    assert [render(f) for f in result.derived_constraints] == ["!Gas | !Radio"]
    assert valid_selections(result.model) == projection(car_model, {"Electric"})


def test_slice_unconstrained_leaf_is_plain_removal(car_model):
    # Gas participates only in its group; removing it must not leave junk
    result = slice_model(car_model, {"Gas"})
    got = valid_selections(result.model)
    assert got == projection(car_model, {"Gas"})


def test_slice_errors(car_model):
    with pytest.raises(SliceError):
        slice_model(car_model, set())
    with pytest.raises(SliceError):
        slice_model(car_model, {"Car"})
    with pytest.raises(SliceError):
        slice_model(car_model, {"Ghost"})


def test_slice_removed_names_absent(car_model):
    result = slice_model(car_model, {"Engine", "Gas"})
    names = set(result.model.feature_names())
    assert names.isdisjoint({"Engine", "Gas"})
    for f in result.derived_constraints:
        assert f.variables().isdisjoint({"Engine", "Gas"})
    assert validate(result.model) == []


def test_slice_projection_equivalence_random():
    rng = random.Random(60601)
    for _ in range(100):
        model = random_model(rng, max_features=12, max_constraints=4, min_features=2)
        names = model.feature_names()
        removable = [n for n in names if n != model.feature(model.root).name]
        remove = set(rng.sample(removable, rng.randint(1, len(removable))))
        result = slice_model(model, remove)
        assert validate(result.model) == []
        assert valid_selections(result.model) == projection(model, remove)


def test_slice_never_gains_configurations():
    rng = random.Random(808)
    for _ in range(30):
        model = random_model(rng, max_features=10, max_constraints=3, min_features=2)
        removable = [n for n in model.feature_names() if n != model.feature(model.root).name]
        remove = {rng.choice(removable)}
        result = slice_model(model, remove)
        assert len(valid_selections(result.model)) <= len(valid_selections(model))


def test_slice_composes():
    rng = random.Random(1213)
    for _ in range(25):
        model = random_model(rng, max_features=9, max_constraints=3, min_features=3)
        root_name = model.feature(model.root).name
        removable = [n for n in model.feature_names() if n != root_name]
        if len(removable) < 2:
            continue
        a, b = rng.sample(removable, 2)
        two_step = slice_model(slice_model(model, {a}).model, {b})
        one_step = slice_model(model, {a, b})
        assert valid_selections(two_step.model) == valid_selections(one_step.model)
