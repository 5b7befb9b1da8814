import random

from fmkit.formula import Var
from fmkit.model import (
    CollapseState,
    GroupKind,
    add_feature,
    collapse_counts,
    levenshtein,
    make_model,
    path_to_root,
    search_features,
    validate,
)


def test_validate_minimal_model():
    assert validate(make_model("A")) == []


def test_validate_duplicate_name():
    m = make_model("A")
    add_feature(m, "B", m.root)
    m.features[1].name = "A"
    codes = [v.code for v in validate(m)]
    assert "duplicate-name" in codes


def test_validate_unknown_constraint_feature():
    m = make_model("A")
    m.constraints.append((0, Var("Ghost")))
    violations = validate(m)
    assert [v.code for v in violations] == ["unknown-feature"]
    assert "Ghost" in violations[0].message


def test_validate_empty_group():
    m = make_model("A")
    m.features[m.root].group = GroupKind.OR
    assert [v.code for v in validate(m)] == ["empty-group"]


def test_validate_cycle_and_unreachable():
    m = make_model("A")
    b = add_feature(m, "B", m.root)
    c = add_feature(m, "C", b)
    # detach C's subtree and make it self-contained
    m.features[b].children = []
    m.features[c].children = []
    codes = [v.code for v in validate(m)]
    assert "unreachable" in codes


def test_collapse_counts_leaf():
    m = make_model("A")
    assert collapse_counts(m, m.root) == (0, 0)


def test_collapse_counts_flat():
    m = make_model("A")
    for name in "BCD":
        add_feature(m, name, m.root)
    assert collapse_counts(m, m.root) == (3, 3)


def test_collapse_counts_deep():
    # 11-node subtree: root with 3 children, 10 strict descendants total
    m = make_model("R")
    kids = [add_feature(m, f"C{i}", m.root) for i in range(3)]
    extra = [add_feature(m, f"D{i}", kids[0]) for i in range(4)]
    for i in range(3):
        add_feature(m, f"E{i}", extra[0])
    direct, total = collapse_counts(m, m.root)
    assert (direct, total) == (3, 10)
    # consistency: total = sum over children of (1 + child total)
    assert total == sum(1 + collapse_counts(m, c)[1] for c in m.features[m.root].children)


def test_path_to_root():
    m = make_model("A")
    b = add_feature(m, "B", m.root)
    c = add_feature(m, "C", b)
    d = add_feature(m, "D", c)
    assert path_to_root(m, m.root) == [m.root]
    assert path_to_root(m, b) == [m.root, b]
    assert path_to_root(m, d) == [m.root, b, c, d]


def test_levenshtein_known_values():
    assert levenshtein("Logging", "Logging") == 0
    assert levenshtein("Loging", "Logging") == 1
    assert levenshtein("kitten", "sitting") == 3


def test_levenshtein_against_dp_oracle():
    def oracle(a, b):
        dp = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
        for i in range(len(a) + 1):
            dp[i][0] = i
        for j in range(len(b) + 1):
            dp[0][j] = j
        for i in range(1, len(a) + 1):
            for j in range(1, len(b) + 1):
                dp[i][j] = min(
                    dp[i - 1][j] + 1,
                    dp[i][j - 1] + 1,
                    dp[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
                )
        return dp[len(a)][len(b)]

    rng = random.Random(7)
    for _ in range(100):
        a = "".join(rng.choice("abc") for _ in range(rng.randint(0, 8)))
        b = "".join(rng.choice("abc") for _ in range(rng.randint(0, 8)))
        assert levenshtein(a, b) == oracle(a, b)


def test_search_exact_match_first(car_model):
    results = search_features(car_model, "Radio", limit=3)
    top_id, dist = results[0]
    assert car_model.feature(top_id).name == "Radio"
    assert dist == 0
    distances = [d for _, d in results]
    assert distances == sorted(distances)


def test_search_empty_query(car_model):
    results = search_features(car_model, "", limit=10)
    assert len(results) == 5
    for fid, dist in results:
        assert dist == len(car_model.feature(fid).name)


def test_search_tie_break_preorder():
    m = make_model("Root")
    add_feature(m, "Aa", m.root)
    add_feature(m, "Ab", m.root)
    results = search_features(m, "Ax", limit=2)
    assert [m.feature(fid).name for fid, _ in results] == ["Aa", "Ab"]


def test_collapse_state_does_not_touch_model(car_model):
    state = CollapseState()
    state.collapsed_subtrees.add(car_model.root)
    assert validate(car_model) == []
    assert len(car_model.features) == 5
