import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from credal_lp.errors import DimensionLimitError, InvalidArgumentError, WrongModelError
from credal_lp.lp import (DeterministicLp, feasible_vertices, nominal_vertices, robust_counterpart, solve_exact)
from credal_lp.model import UncertainLp
from credal_lp.uncertainty import Contamination, DiscreteDistribution, Interval, Point


def test_solve_examples():
    sol = solve_exact(DeterministicLp([1], [[1]], [5], [(0, 10)]))
    assert sol.optimal and sol.x.tolist() == [5.0] and sol.value == 5.0
    sol = solve_exact(DeterministicLp([3, 2], [[1, 1], [1, 3]], [4, 6], [(0, 10)] * 2))
    assert sol.x.tolist() == [4.0, 0.0] and sol.value == 12.0
    assert solve_exact(DeterministicLp([1], [[1]], [-1], [(0, 10)])).status == "infeasible"


def test_ties_go_to_lexicographically_smallest():
    sol = solve_exact(DeterministicLp([1, 1], [[1, 1]], [2], [(0, 5)] * 2))
    assert sol.x.tolist() == [0.0, 2.0]


def test_dimension_guard():
    with pytest.raises(DimensionLimitError):
        solve_exact(DeterministicLp(np.ones(8), np.ones((7, 8)), np.ones(7), [(0, 1)] * 8))


def test_negative_lower_bound_rejected():
    with pytest.raises(InvalidArgumentError):
        DeterministicLp([1], [[1]], [1], [(-1, 1)])


def test_robust_counterpart_examples():
    p = UncertainLp.from_intervals([(1, 2)], [[(1, 2)]], [(4, 6)], [(0, 10)])
    lp = robust_counterpart(p)
    assert lp.c.tolist() == [1.0] and lp.A.tolist() == [[2.0]] and lp.b.tolist() == [4.0]
    sol = solve_exact(lp)
    assert sol.x.tolist() == [2.0] and sol.value == 2.0
    sol = solve_exact(robust_counterpart(UncertainLp([Interval(-1, 1)], [[Point(1)]], [Point(5)], [(0, 10)])))
    assert sol.x.tolist() == [0.0] and sol.value == 0.0
    precise = UncertainLp.precise([3, 2], [[1, 1]], [4], [(0, 10)] * 2)
    lp = robust_counterpart(precise)
    assert lp.c.tolist() == [3, 2] and lp.A.tolist() == [[1, 1]] and lp.b.tolist() == [4]


def test_robust_counterpart_rejects_other_models():
    c = Contamination(DiscreteDistribution.dirac(1), 0.1, Interval(0, 2))
    with pytest.raises(WrongModelError):
        robust_counterpart(UncertainLp([c], [[Point(1)]], [Point(5)], [(0, 10)]))


def test_nominal_vertices_examples():
    p = UncertainLp.precise([3, 2], [[1, 1], [1, 3]], [4, 6], [(0, 10)] * 2)
    assert [v.tolist() for v in nominal_vertices(p)] == [[0, 0], [0, 2], [3, 1], [4, 0]]
    p = UncertainLp([Point(1)], [[Interval(1, 2)]], [Point(5)], [(0, 10)])
    assert [float(v[0]) for v in nominal_vertices(p)] == pytest.approx([0.0, 10 / 3])
    assert nominal_vertices(UncertainLp.precise([1], [[1]], [-1], [(0, 10)])) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 31))
def test_vertex_optimality(n, m, seed):
    rng = np.random.default_rng(seed)
    lp = DeterministicLp(rng.uniform(-1, 2, n), rng.uniform(-0.5, 2, (m, n)), rng.uniform(0.5, 5, m), [(0, 3)] * n)
    sol = solve_exact(lp)
    assert sol.optimal  # the origin is always feasible here
    assert lp.is_feasible(sol.x)
    pts = rng.uniform(0, 3, (1000, n))
    ok = np.all(pts @ lp.A.T <= lp.b, axis=1)
    assert np.all(pts[ok] @ lp.c <= sol.value + 1e-9)


def test_vertices_satisfy_constraints_exactly():
    # boundary vertices must count as feasible in plain left-to-right arithmetic
    rng = np.random.default_rng(3)
    for _ in range(200):
        lp = DeterministicLp(rng.uniform(0, 1, 2), rng.uniform(0.1, 2, (2, 2)), rng.uniform(1, 5, 2), [(0, 5)] * 2)
        for x in feasible_vertices(lp):
            for i in range(lp.m):
                assert lp.A[i, 0] * x[0] + lp.A[i, 1] * x[1] <= lp.b[i]
