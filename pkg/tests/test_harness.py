import math

import numpy as np
import pytest

from credal_lp.cli import grid_regret_bound
from credal_lp.decision import build_candidates, choose_punishment, discretize, filter_candidates, lower_utilities
from credal_lp.errors import InsufficientResidualsError, InvalidArgumentError, RankDeficiencyError
from credal_lp.harness import (ContaminationBand, Dataset, IntervalBand, PBoxBand, PointOnly, TaskSpec,
                               build_imprecise_prediction, evaluate_regret, fit_point_predictor, generate_dataset,
                               ks_half_width, residual_band, residual_pbox, run_experiment)
from credal_lp.model import Realization
from credal_lp.uncertainty import Contamination, Interval, Point


def spec(noise=0.0, train=30, test=10, seed=3):
    return TaskSpec(2, 1, 2, TaskSpec.random_weights(2, 1, 2, seed=0), noise, [(0, 4), (0, 4)], train, test, seed)


def test_noiseless_data_and_exact_fit():
    s = spec()
    train, _ = generate_dataset(s)
    X = np.column_stack([np.ones(len(train)), train.features])
    mean = X @ s.true_weights.T
    # only the right-hand sides may be shifted for feasibility
    assert np.array_equal(train.params[:, :4], mean[:, :4])
    pred = fit_point_predictor(train)
    assert np.max(np.abs(pred.residuals[:, :4])) <= 1e-9
    assert np.max(np.abs(pred.weights[:4] - s.true_weights[:4])) <= 1e-8


def test_dataset_determinism():
    a, b = generate_dataset(spec(1.0)), generate_dataset(spec(1.0))
    assert np.array_equal(a[0].params, b[0].params) and np.array_equal(a[1].features, b[1].features)


def test_square_training_system():
    s = TaskSpec(1, 1, 2, TaskSpec.random_weights(1, 1, 2), 0.5, [(0, 1)], 3, 1, 0)
    pred = fit_point_predictor(generate_dataset(s)[0])
    assert np.max(np.abs(pred.residuals)) <= 1e-9


def test_rank_deficiency():
    feats = np.column_stack([np.ones(10), np.ones(10)])
    with pytest.raises(RankDeficiencyError):
        fit_point_predictor(Dataset(feats, np.zeros((10, 3)), 1, 1))


def test_residual_scale_anchor():
    s = TaskSpec(1, 1, 2, TaskSpec.random_weights(1, 1, 2), 0.1, [(0, 1)], 200, 1, 7)
    pred = fit_point_predictor(generate_dataset(s)[0])
    sd = float(np.std(pred.residuals[:, :2]))
    assert abs(sd - 0.1) <= 0.02


def test_band_examples():
    res = np.array([-1.0, 0.0, 1.0])
    assert residual_band(5.0, res, 1.0) == Interval(4.0, 6.0)
    assert ks_half_width(0.05, 100) == pytest.approx(math.sqrt(math.log(40) / 200))
    assert ks_half_width(0.05, 100) == pytest.approx(0.1358, abs=1e-4)
    box = residual_pbox(0.0, np.linspace(-1, 1, 100), 0.05)
    gap = np.array(box.upper.ps) - np.array(box.lower.ps)
    inner = (np.array(box.upper.ps) < 1) & (np.array(box.lower.ps) > 0)
    assert np.allclose(gap[inner], 2 * ks_half_width(0.05, 100))


def test_sparse_data_widening():
    widths = [ks_half_width(0.1, n) for n in range(2, 200)]
    assert all(b < a for a, b in zip(widths, widths[1:]))


def test_method_invariants():
    with pytest.raises(InvalidArgumentError):
        IntervalBand(0.0)
    with pytest.raises(InvalidArgumentError):
        PBoxBand(1.0)
    with pytest.raises(InvalidArgumentError):
        ContaminationBand(-0.1)


def test_prediction_models():
    s = spec(0.5)
    train, test = generate_dataset(s)
    pred = fit_point_predictor(train)
    f = test.features[0]
    p = build_imprecise_prediction(pred, pred.residuals, f, PointOnly(), 2, 1, s.x_bounds)
    assert all(isinstance(e, Point) for e in p.entries)
    c = build_imprecise_prediction(pred, pred.residuals, f, ContaminationBand(0.2), 2, 1, s.x_bounds)
    assert all(isinstance(e, Contamination) and e.epsilon == 0.2 for e in c.entries)
    with pytest.raises(InsufficientResidualsError):
        build_imprecise_prediction(pred, pred.residuals[:1], f, IntervalBand(0.9), 2, 1, s.x_bounds)


def test_coverage_monotonicity():
    s = spec(0.5)
    train, test = generate_dataset(s)
    pred = fit_point_predictor(train)
    f = test.features[1]
    wide = build_imprecise_prediction(pred, pred.residuals, f, IntervalBand(1.0), 2, 1, s.x_bounds)
    cands = filter_candidates(wide, build_candidates(wide, 9))
    L = choose_punishment(wide, cands)
    prev = None
    for cov in (0.5, 0.8, 0.95, 1.0):
        p = build_imprecise_prediction(pred, pred.residuals, f, IntervalBand(cov), 2, 1, s.x_bounds)
        low = lower_utilities(discretize(p.joint()), cands.points, L)
        if prev is not None:
            assert np.all(low <= prev + 1e-12)
        prev = low
    prev = None
    for alpha in (0.5, 0.2, 0.05, 0.01):
        p = build_imprecise_prediction(pred, pred.residuals, f, PBoxBand(alpha), 2, 1, s.x_bounds)
        low = lower_utilities(discretize(p.joint()), cands.points, L)
        if prev is not None:
            assert np.all(low <= prev + 1e-12)
        prev = low


def test_regret_examples():
    truth = Realization([2.0], [[1.0]], [4.0])
    assert evaluate_regret([2.0], truth, [Interval(0, 10)]) == 4.0
    assert evaluate_regret([5.0], truth, [Interval(0, 10)]) == 8.0
    assert evaluate_regret([2.0], Realization([2.0], [[1.0]], [-1.0]), [Interval(0, 10)]) is None


def test_noiseless_point_pipeline():
    s = spec(0.0, test=15)
    r = run_experiment(s, [PointOnly()], grid_resolution=21)
    summary = r.summary("point")
    assert summary.errors == 0 and summary.mean_regret <= grid_regret_bound(s, 21)
    assert all(row["regret"] >= -1e-9 for row in r.rows)


def test_experiment_determinism_and_order():
    s = spec(1.0, test=8)
    methods = [PointOnly(), IntervalBand(0.9), ContaminationBand(0.1), PBoxBand(0.1)]
    a, b = run_experiment(s, methods), run_experiment(s, methods)
    assert a.to_csv() == b.to_csv() and a.to_dict() == b.to_dict()
    assert [m.name for m in a.methods] == [m.name for m in methods]


def test_maximal_then_first_selector():
    s = spec(1.0, test=3)
    r = run_experiment(s, [IntervalBand(1.0)], criterion="maximal-then-first", grid_resolution=6)
    assert r.criterion == "maximal-then-first" and r.methods[0].evaluated + r.methods[0].errors == 3
