import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kaclab.prescribed_trees import PlanSizeError, build_plan, step1_split, validate_y_sequence


def test_step1_examples():
    s = step1_split(1, 2, 1)
    assert s.N == 2 and np.allclose(s.leaf_weights, [0.5, 0.5]) and s.pairs[0] == pytest.approx((0.5, 0.5))
    s = step1_split(1, 2, 2)
    assert s.N == 4 and np.allclose(s.leaf_weights, 0.5) and np.sum(s.leaf_weights ** 2) == pytest.approx(1)
    s = step1_split(1, 3, 1)
    assert s.N == 3 and np.allclose(s.leaf_weights, 1 / 3)


def test_step1_precondition():
    with pytest.raises(ValueError):
        step1_split(2, 2, 1)


def _brute_valid(y, eps, a):
    if y[0] ** a <= 1 / eps:
        return False
    return all(y[n + 1] ** a > (1 / eps) * sum(v ** a + 1 for v in y[:n + 1]) for n in range(len(y) - 1))


def test_validate_examples():
    assert validate_y_sequence((3, 10, 200), 0.5, 1)
    assert not validate_y_sequence((1, 2, 3), 0.5, 1)
    with pytest.raises(ValueError):
        validate_y_sequence((3, 2), 0.5, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1.1, 500), min_size=1, max_size=4, unique=True), st.floats(0.05, 0.9),
       st.floats(0.5, 2.0))
def test_validator_agrees_with_brute_force(ys, eps, a):
    y = sorted(ys)
    assert validate_y_sequence(y, eps, a) == _brute_valid(y, eps, a)


def test_plan_examples():
    p = build_plan((3,), 0.5, 1)
    assert p.N_seq == [1, 3] and p.R_sets == [[1]] and np.allclose(p.level_weights[0], 1 / 3)
    p = build_plan((3, 10), 0.5, 1)
    assert len(p.R_sets[1]) == 3 and sum(p.level_weights[1]) == pytest.approx(1, abs=1e-12)
    d = p.to_dict()
    assert d["N_0"] == 1 and d["N_seq"][0] == 3


def test_plan_rejects_invalid_and_huge():
    with pytest.raises(ValueError):
        build_plan((1, 2, 3), 0.5, 1)
    with pytest.raises(PlanSizeError):
        build_plan((3, 10, 200, 10 ** 5), 0.5, 1, max_leaves=10 ** 4)


def test_ratio_just_below_an_integer():
    # (x/c)^alpha = 8 up to round-off from below
    x = 8.0 * (1 - 2e-16)
    s = step1_split(1.0, x, 1.0)
    assert s.N == 8
