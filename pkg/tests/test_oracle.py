import numpy as np
import pytest

from credal_lp.decision import CandidateSet
from credal_lp.errors import BudgetExceededError, InvalidArgumentError
from credal_lp.model import UncertainLp
from credal_lp.oracle import (OracleConfig, brute_lower_expectation, brute_maximal, brute_maximin,
                              brute_upper_difference, brute_upper_expectation, grid_error_bound, oracle_utility)
from credal_lp.uncertainty import DsStructure, Interval, JointModel, Point

ONE_D = UncertainLp.from_intervals([(1, 2)], [[(1, 2)]], [(4, 6)], [(0, 10)])


def test_config_invariants():
    with pytest.raises(InvalidArgumentError):
        OracleConfig(grid_per_axis=1)
    with pytest.raises(InvalidArgumentError):
        OracleConfig(selection_mode="random")


def test_expectation_examples():
    assert brute_lower_expectation(Point(3), lambda v: v[0]) == 3
    low = brute_lower_expectation(Interval(0, 1), lambda v: (v[0] - 0.3) ** 2)
    assert 0 <= low <= (1 / 32) ** 2
    ds = DsStructure(((Interval(0, 1), 0.5), (Interval(1, 2), 0.5)))
    cfg = OracleConfig(selection_mode="endpoints")
    assert brute_lower_expectation(ds, lambda v: v[0], cfg) == 0.5
    assert brute_upper_expectation(ds, lambda v: v[0], cfg) == 1.5


def test_grid_error_bound():
    assert grid_error_bound([1.0], [1.0], 33) == 1 / 64


def test_decision_examples():
    grid = CandidateSet.from_points(np.arange(1, 21).reshape(-1, 1) * 0.5)
    assert brute_maximin(ONE_D, None, grid, 0.25) == [3]
    two = CandidateSet.from_points([[1.0], [2.0]])
    assert brute_maximal(ONE_D, None, two, 0.25) == [1]
    assert brute_upper_difference(ONE_D, None, [1.0], [2.0], 0.25) == pytest.approx(-1.0)
    assert brute_maximal(ONE_D, None, CandidateSet.from_points([[3.0]]), 0.25) == [0]
    vac = UncertainLp.from_intervals([(1, 2)], [[(1, 2)]], [(0, 0.1)], [(0, 10)])
    assert brute_maximin(vac, None, grid, 0.25) == list(range(20))


def test_twin_candidates_both_maximal():
    p = UncertainLp.precise([1, 1], [[1, 1]], [10], [(0, 5)] * 2)
    c = CandidateSet.from_points([[1.0, 2.0], [2.0, 1.0]])
    assert brute_maximal(p, None, c, 0.5) == [0, 1]


def test_oracle_utility_matches_hand_values():
    g = oracle_utility([2.0, 0.0], 2, 2, 1.0)
    assert g(np.array([[3, 2, 1, 1, 1, 3, 4, 6]]))[0] == 6
    assert g(np.array([[3, 2, 3, 1, 1, 3, 4, 6]]))[0] == 1


def test_budget():
    joint = JointModel.of(*[Interval(0, 1)] * 6)
    with pytest.raises(BudgetExceededError):
        brute_lower_expectation(joint, lambda v: 0.0)
