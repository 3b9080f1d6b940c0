import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from credal_lp.errors import BudgetExceededError, InvalidArgumentError, UnboundedFunctionError
from credal_lp.uncertainty import (Cdf, Contamination, DiscreteDistribution, DsStructure, EvaluationPlan, Interval,
                                   JointModel, PBox, Point, expectation_precise, lower_expectation, to_ds,
                                   upper_expectation, vectorized)


def ident(v):
    return v[0]


def test_interval_invariants():
    with pytest.raises(InvalidArgumentError):
        Interval(2, 1)
    with pytest.raises(InvalidArgumentError):
        Interval(0, math.inf)
    assert Interval(1, 3).width == 2 and Interval(1, 3).mid == 2


def test_distribution_invariants():
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution((1, 2), (0.5, 0.6))
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution((2, 1), (0.5, 0.5))
    with pytest.raises(InvalidArgumentError):
        Contamination(DiscreteDistribution.dirac(11), 0.1, Interval(0, 10))
    with pytest.raises(InvalidArgumentError):
        Contamination(DiscreteDistribution.dirac(1), 1.5, Interval(0, 10))


def test_pbox_invariants():
    lo = Cdf((0.0, 1.0), (0.0, 1.0))
    hi = Cdf((0.0, 0.5), (0.0, 1.0))
    PBox(Interval(0, 1), lo, hi)
    with pytest.raises(InvalidArgumentError):
        PBox(Interval(0, 1), hi, lo)  # swapped bounds cross
    with pytest.raises(InvalidArgumentError):
        Cdf((0.0, 1.0), (0.0, 0.9))


def test_ds_invariants():
    with pytest.raises(InvalidArgumentError):
        DsStructure(((Interval(0, 1), 0.4),))
    with pytest.raises(InvalidArgumentError):
        DsStructure(((Interval(0, 2), 1.0),), Interval(0, 1))


def test_to_ds_examples():
    assert to_ds(Point(2), 4).focal == ((Interval(2, 2), 1.0),)
    c = Contamination(DiscreteDistribution.dirac(3), 0.25, Interval(0, 10))
    assert to_ds(c, 5).focal == ((Interval(3, 3), 0.75), (Interval(0, 10), 0.25))
    u = Cdf((0.0, 1.0), (0.0, 1.0))
    assert to_ds(PBox.precise(u), 2).focal == ((Interval(0.25, 0.25), 0.5), (Interval(0.75, 0.75), 0.5))
    assert to_ds(Interval(1, 4), 9).focal == ((Interval(1, 4), 1.0),)


def test_step_cdf_quantiles():
    c = Cdf((0.0, 1.0, 2.0), (0.25, 0.5, 1.0), "step")
    assert c(0.5) == 0.25 and c.left_limit(1.0) == 0.25 and c(1.0) == 0.5
    assert c.quantile(0.25) == 0.0 and c.quantile(0.3) == 1.0 and c.quantile(0.75) == 2.0


def test_expectation_examples():
    assert lower_expectation(Point(3), ident) == 3
    sq = lambda v: v[0] ** 2  # noqa: E731
    assert lower_expectation(Interval(0, 1), sq) == 0
    assert upper_expectation(Interval(0, 1), sq) == 1
    c = Contamination(DiscreteDistribution.uniform([1, 2, 3]), 0.5, Interval(1, 3))
    assert lower_expectation(c, ident) == pytest.approx(1.5, abs=1e-12)
    ds = DsStructure(((Interval(0, 1), 0.5), (Interval(1, 2), 0.5)))
    assert lower_expectation(ds, ident) == 0.5 and upper_expectation(ds, ident) == 1.5


def test_expectation_precise_examples():
    assert expectation_precise(DiscreteDistribution.dirac(3), lambda v: v) == 3
    assert expectation_precise(DiscreteDistribution.uniform([1, 2, 3]), lambda v: v) == 2
    assert expectation_precise(DiscreteDistribution.uniform([0, 1]), lambda v: v * v) == 0.5


def test_monotone_plan_matches_grid_for_monotone_f():
    joint = JointModel.of(Interval(0, 1), Contamination(DiscreteDistribution.dirac(2), 0.3, Interval(1, 3)))
    f = vectorized(lambda p: p[:, 0] - 2 * p[:, 1])
    a = lower_expectation(joint, f, EvaluationPlan.monotone((1, -1)))
    b = lower_expectation(joint, f, EvaluationPlan.grid(5))
    assert a == pytest.approx(b, abs=1e-12)
    assert upper_expectation(joint, f, EvaluationPlan.monotone((1, -1))) == pytest.approx(
        upper_expectation(joint, f, EvaluationPlan.grid(5)), abs=1e-12)


def test_non_finite_function_rejected():
    with pytest.raises(UnboundedFunctionError):
        lower_expectation(Interval(0, 1), lambda v: math.inf)


def test_budget_guard():
    joint = JointModel.of(*[Interval(0, 1)] * 8)
    with pytest.raises(BudgetExceededError):
        lower_expectation(joint, lambda v: 0.0, EvaluationPlan.grid(17))


def test_joint_length_checked():
    with pytest.raises(InvalidArgumentError):
        JointModel((Point(1),) * 4, n=1, m=1)


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 3), st.floats(0, 1), st.integers(0, 2 ** 16))
def test_superadditivity_and_conjugacy(lo, w, eps, seed):
    rng = np.random.default_rng(seed)
    model = Contamination(DiscreteDistribution.dirac(lo + w / 2), eps, Interval(lo, lo + w))
    a, b = rng.uniform(-2, 2, 2)
    f = vectorized(lambda p: np.sin(a * p[:, 0]))
    g = vectorized(lambda p: np.cos(b * p[:, 0]))
    fg = vectorized(lambda p: f(p) + g(p))
    plan = EvaluationPlan.grid(9)
    assert lower_expectation(model, fg, plan) >= lower_expectation(model, f, plan) + lower_expectation(model, g, plan) - 1e-12
    neg = vectorized(lambda p: -f(p))
    assert upper_expectation(model, f, plan) == -lower_expectation(model, neg, plan)
