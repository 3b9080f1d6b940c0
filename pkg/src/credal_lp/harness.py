"""Predict-then-optimize experiments on synthetic uncertain LPs.

Every LP parameter is a noisy linear function of observed features. A least
squares predictor is fit on a training split; its residuals turn each point
prediction into an imprecise one (interval, contamination or p-box), the
decision layer picks an action, and regret is measured against the optimum
under the true parameters of the test instance.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .decision import build_candidates, decide
from .errors import CredalLpError, InsufficientResidualsError, InvalidArgumentError, RankDeficiencyError
from .lp import DeterministicLp, solve_exact
from .model import Realization, UncertainLp
from .uncertainty import (Cdf, Contamination, DiscreteDistribution, Interval, PBox, Point)

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class TaskSpec:
    """Synthetic task: parameter means are ``true_weights @ [1, features]``."""

    n: int
    m: int
    feature_dim: int
    true_weights: np.ndarray      # (n + m*n + m, feature_dim + 1); column 0 is the intercept
    noise_scale: float
    x_bounds: tuple[Interval, ...]
    train_size: int
    test_size: int
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.true_weights, dtype=float)
        object.__setattr__(self, "true_weights", w)
        object.__setattr__(self, "x_bounds", tuple(b if isinstance(b, Interval) else Interval(*b)
                                                    for b in self.x_bounds))
        P = self.n + self.m * self.n + self.m
        if w.shape != (P, self.feature_dim + 1):
            raise InvalidArgumentError(f"true_weights must have shape {(P, self.feature_dim + 1)}, got {w.shape}")
        if self.train_size < self.feature_dim + 1:
            raise InvalidArgumentError("train_size must be at least feature_dim + 1")
        if not self.noise_scale >= 0:
            raise InvalidArgumentError("noise_scale must be nonnegative")
        if len(self.x_bounds) != self.n:
            raise InvalidArgumentError("one decision bound per variable required")
        if self.test_size < 1:
            raise InvalidArgumentError("test_size must be positive")

    @property
    def n_params(self) -> int:
        return self.n + self.m * self.n + self.m

    @staticmethod
    def random_weights(n: int, m: int, feature_dim: int, seed: int = 0) -> np.ndarray:
        """Weights giving positive objectives, positive constraint rows and roomy right-hand sides."""
        rng = np.random.default_rng(seed)
        slopes = rng.uniform(-1.0, 1.0, size=(n + m * n + m, feature_dim))
        intercept = np.concatenate([rng.uniform(2.0, 4.0, n),
                                    rng.uniform(0.5, 1.5, m * n),
                                    rng.uniform(4.0, 8.0, m) * n])
        return np.column_stack([intercept, slopes])


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray   # (N, feature_dim)
    params: np.ndarray     # (N, n + m*n + m) true realizations as vectors
    n: int
    m: int

    def __len__(self):
        return len(self.features)

    def realization(self, k: int) -> Realization:
        return Realization.from_vector(self.params[k], self.n, self.m)


def _design(features: np.ndarray) -> np.ndarray:
    features = np.atleast_2d(features)
    return np.column_stack([np.ones(len(features)), features])


def generate_dataset(spec: TaskSpec) -> tuple[Dataset, Dataset]:
    """Seeded train/test splits of (features, true parameters)."""
    rng = np.random.default_rng(spec.seed)
    total = spec.train_size + spec.test_size
    feats = rng.uniform(0.0, 1.0, size=(total, spec.feature_dim))
    params = _design(feats) @ spec.true_weights.T
    if spec.noise_scale > 0:
        params = params + spec.noise_scale * rng.standard_normal(params.shape)

    # keep 0.1 * box centre feasible in every sampled polytope
    n, m = spec.n, spec.m
    x0 = 0.1 * np.array([b.mid for b in spec.x_bounds])
    y = params[:, n:n + m * n].reshape(total, m, n)
    z = params[:, n + m * n:]
    params[:, n + m * n:] = np.maximum(z, y @ x0)

    cut = spec.train_size
    return (Dataset(feats[:cut], params[:cut], n, m), Dataset(feats[cut:], params[cut:], n, m))


@dataclass(frozen=True)
class Predictor:
    weights: np.ndarray    # (P, feature_dim + 1)
    residuals: np.ndarray  # (N, P), observed minus fitted

    def predict(self, features) -> np.ndarray:
        return _design(np.atleast_2d(features)) @ self.weights.T


def fit_point_predictor(train: Dataset) -> Predictor:
    """Ordinary least squares per parameter, with an intercept."""
    A = _design(train.features)
    if len(A) < A.shape[1]:
        raise InvalidArgumentError("need at least feature_dim + 1 training samples")
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise RankDeficiencyError("design matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(A, train.params, rcond=None)
    weights = coef.T
    residuals = train.params - A @ coef
    return Predictor(weights, residuals)


@dataclass(frozen=True)
class PointOnly:
    name: str = "point"


@dataclass(frozen=True)
class IntervalBand:
    coverage: float

    def __post_init__(self):
        if not 0.0 < self.coverage <= 1.0:
            raise InvalidArgumentError("coverage must lie in (0, 1]")

    @property
    def name(self) -> str:
        return f"interval(coverage={self.coverage!r})"


@dataclass(frozen=True)
class ContaminationBand:
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise InvalidArgumentError("epsilon must lie in [0, 1]")

    @property
    def name(self) -> str:
        return f"contamination(epsilon={self.epsilon!r})"


@dataclass(frozen=True)
class PBoxBand:
    ks_alpha: float

    def __post_init__(self):
        if not 0.0 < self.ks_alpha < 1.0:
            raise InvalidArgumentError("ks_alpha must lie in (0, 1)")

    @property
    def name(self) -> str:
        return f"pbox(ks_alpha={self.ks_alpha!r})"


ImprecisePredictionMethod = Union[PointOnly, IntervalBand, ContaminationBand, PBoxBand]


def ks_half_width(ks_alpha: float, n: int) -> float:
    """Half-width of the two-sided Kolmogorov-Smirnov (DKW) band."""
    return math.sqrt(math.log(2.0 / ks_alpha) / (2.0 * n))


def residual_band(center: float, residuals: np.ndarray, coverage: float) -> Interval:
    qlo = float(np.quantile(residuals, (1.0 - coverage) / 2.0))
    qhi = float(np.quantile(residuals, (1.0 + coverage) / 2.0))
    return Interval(center + qlo, center + qhi)


def residual_pbox(center: float, residuals: np.ndarray, ks_alpha: float) -> PBox:
    """Empirical residual CDF around ``center`` widened by the KS band."""
    r = np.sort(np.asarray(residuals, dtype=float))
    N = len(r)
    xs, counts = np.unique(center + r, return_counts=True)
    ecdf = np.cumsum(counts) / N
    ecdf[-1] = 1.0
    h = ks_half_width(ks_alpha, N)
    upper = np.minimum(ecdf + h, 1.0)
    lower = np.maximum(ecdf - h, 0.0)
    upper[-1] = lower[-1] = 1.0
    support = Interval(xs[0], xs[-1])
    return PBox(support, Cdf(tuple(xs), tuple(lower), "step"), Cdf(tuple(xs), tuple(upper), "step"))


def _scalar_model(center: float, res: np.ndarray, method):
    if isinstance(method, PointOnly):
        return Point(center)
    if len(res) < 2:
        raise InsufficientResidualsError("band methods need at least two residuals")
    if isinstance(method, IntervalBand):
        return residual_band(center, res, method.coverage)
    if isinstance(method, ContaminationBand):
        band = residual_band(center, res, 1.0)
        support = Interval(min(band.lo, center), max(band.hi, center))
        return Contamination(DiscreteDistribution.dirac(center), method.epsilon, support)
    if isinstance(method, PBoxBand):
        return residual_pbox(center, res, method.ks_alpha)
    raise InvalidArgumentError(f"unknown prediction method {method!r}")


def build_imprecise_prediction(predictor: Predictor, residuals: np.ndarray, features, method,
                               n: int, m: int, x_bounds) -> UncertainLp:
    """Turn a point prediction for one feature vector into an uncertain LP."""
    centers = predictor.predict(features)[0]
    residuals = np.atleast_2d(residuals)
    entries = [_scalar_model(float(centers[p]), residuals[:, p], method) for p in range(len(centers))]
    return UncertainLp(entries[:n], [entries[n + i * n:n + (i + 1) * n] for i in range(m)],
                       entries[n + m * n:], x_bounds)


def true_lp(truth: Realization, x_bounds) -> DeterministicLp:
    return DeterministicLp(truth.u, truth.y, truth.z, x_bounds)


def evaluate_regret(decision, truth: Realization, x_bounds) -> float | None:
    """Optimal true objective minus the achieved one; ``None`` if the true LP is infeasible.

    An action that violates a true constraint achieves 0.
    """
    sol = solve_exact(true_lp(truth, x_bounds))
    if not sol.optimal:
        return None
    x = np.asarray(decision, dtype=float)
    feasible = bool(np.all(truth.y @ x <= truth.z + FEAS_TOL))
    achieved = float(truth.u @ x) if feasible else 0.0
    return max(sol.value - achieved, 0.0)


@dataclass
class MethodSummary:
    name: str
    mean_regret: float | None
    worst_case_regret: float | None
    vacuous_rate: float | None
    evaluated: int
    errors: int


@dataclass
class RegretReport:
    methods: list[MethodSummary]
    rows: list[dict]
    instance_count: int
    skipped_infeasible: int
    seed: int
    criterion: str

    def summary(self, name: str) -> MethodSummary:
        for s in self.methods:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "criterion": self.criterion,
            "instance_count": self.instance_count,
            "skipped_infeasible": self.skipped_infeasible,
            "methods": [vars(s) for s in self.methods],
        }

    def to_csv(self) -> str:
        n = max((len(r["decision"]) for r in self.rows if r["decision"] is not None), default=0)
        buf = io.StringIO()
        header = ["instance", "method", "status", "regret", "vacuous"] + [f"x{j}" for j in range(n)]
        buf.write(",".join(header) + "\n")
        for r in self.rows:
            dec = r["decision"] if r["decision"] is not None else [None] * n
            cells = [str(r["instance"]), r["method"], r["status"], _fmt(r["regret"]),
                     "" if r["vacuous"] is None else str(int(r["vacuous"]))] + [_fmt(v) for v in dec]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def _select(outcome, criterion: str) -> np.ndarray:
    idx = outcome.maximin if criterion == "maximin" else outcome.maximal
    pts = outcome.candidates.points[list(idx)]
    order = sorted(range(len(pts)), key=lambda k: tuple(pts[k]))
    return pts[order[0]]


def method_name(method) -> str:
    return method.name


def run_experiment(spec: TaskSpec, methods: Sequence, criterion: str = "maximin",
                   grid_resolution: int = 21, n_focal: int = 8) -> RegretReport:
    """Fit, predict, decide and score every test instance with every method."""
    if criterion not in ("maximin", "maximal-then-first"):
        raise InvalidArgumentError(f"unknown criterion {criterion!r}")
    train, test = generate_dataset(spec)
    pred = fit_point_predictor(train)
    rows: list[dict] = []
    skipped = 0
    for k in range(len(test)):
        truth = test.realization(k)
        if not solve_exact(true_lp(truth, spec.x_bounds)).optimal:
            skipped += 1
            continue
        for method in methods:
            row = {"instance": k, "method": method.name, "status": "ok", "regret": None,
                   "vacuous": None, "decision": None}
            try:
                problem = build_imprecise_prediction(pred, pred.residuals, test.features[k], method,
                                                     spec.n, spec.m, spec.x_bounds)
                outcome = decide(problem, build_candidates(problem, grid_resolution), n_focal=n_focal,
                                 compute_maximal=(criterion != "maximin"))
                action = _select(outcome, criterion)
                row.update(regret=evaluate_regret(action, truth, spec.x_bounds),
                           vacuous=outcome.vacuous, decision=action.tolist())
            except CredalLpError as exc:
                row["status"] = f"error:{type(exc).__name__}"
            rows.append(row)

    summaries = []
    for method in methods:
        mine = [r for r in rows if r["method"] == method.name]
        ok = [r for r in mine if r["status"] == "ok"]
        regrets = [r["regret"] for r in ok]
        summaries.append(MethodSummary(
            name=method.name,
            mean_regret=float(np.mean(regrets)) if regrets else None,
            worst_case_regret=float(np.max(regrets)) if regrets else None,
            vacuous_rate=float(np.mean([r["vacuous"] for r in ok])) if ok else None,
            evaluated=len(ok),
            errors=len(mine) - len(ok),
        ))
    return RegretReport(summaries, rows, len(test), skipped, spec.seed, criterion)
