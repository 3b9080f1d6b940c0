"""Imprecise uncertainty models for scalar parameters and their lower/upper
expectations.

Three models are supported besides precise points: the vacuous interval,
the epsilon-contamination class and the probability box. All of them are
reduced to a finite Dempster-Shafer structure (focal intervals with masses)
before any expectation is taken; joint models combine entries under
random-set independence, so a joint focal element is the Cartesian product
of one focal interval per entry with the product of their masses.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import BudgetExceededError, InvalidArgumentError, UnboundedFunctionError

#: Absolute tolerance for "within tolerance" comparisons on exact paths.
TOL = 1e-9
#: Tolerance on probability masses summing to one.
MASS_TOL = 1e-12
#: Default number of focal elements a p-box entry is sliced into.
DEFAULT_N_FOCAL = 8
#: Default per-coordinate grid size for non-monotone box minimization.
DEFAULT_GRID = 17
#: Maximum number of function evaluations a single expectation may request.
EVAL_BUDGET = 10_000_000


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``; as a model, the vacuous credal set on it."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not _finite(self.lo, self.hi):
            raise InvalidArgumentError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise InvalidArgumentError(f"interval lo > hi: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def support(self) -> Interval:
        return self

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    def contains_interval(self, other: Interval, tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol


@dataclass(frozen=True)
class Point:
    """A precisely known parameter value."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise InvalidArgumentError(f"point value must be finite, got {self.value}")

    @property
    def support(self) -> Interval:
        return Interval(self.value, self.value)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported probability distribution with increasing atoms."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        if not values or len(values) != len(probs):
            raise InvalidArgumentError("distribution needs matching, nonempty values and probs")
        if not _finite(*values, *probs):
            raise InvalidArgumentError("distribution atoms must be finite")
        if any(p < 0 for p in probs):
            raise InvalidArgumentError("negative probability in distribution")
        if abs(math.fsum(probs) - 1.0) > MASS_TOL:
            raise InvalidArgumentError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidArgumentError("atom values must be strictly increasing")

    @classmethod
    def dirac(cls, value: float) -> DiscreteDistribution:
        return cls((value,), (1.0,))

    @classmethod
    def uniform(cls, values: Iterable[float]) -> DiscreteDistribution:
        values = sorted(float(v) for v in values)
        return cls(tuple(values), tuple(1.0 / len(values) for _ in values))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))


@dataclass(frozen=True)
class Contamination:
    """The class ``(1 - epsilon) * center + epsilon * Q`` with ``Q`` arbitrary on ``support``."""

    center: DiscreteDistribution
    epsilon: float
    support: Interval

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not 0.0 <= self.epsilon <= 1.0:
            raise InvalidArgumentError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        for v in self.center.values:
            if not self.support.contains(v):
                raise InvalidArgumentError(f"center atom {v} outside support [{self.support.lo}, {self.support.hi}]")


@dataclass(frozen=True)
class Cdf:
    """Nondecreasing CDF given by breakpoints.

    ``kind="step"`` is right-continuous and constant between breakpoints;
    ``kind="linear"`` interpolates linearly between them. In both cases the
    function is 0 left of the first breakpoint and 1 right of the last one,
    which must carry probability 1.
    """

    xs: tuple[float, ...]
    ps: tuple[float, ...]
    kind: str = "linear"

    def __post_init__(self):
        xs = tuple(float(v) for v in self.xs)
        ps = tuple(float(p) for p in self.ps)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)
        if self.kind not in ("step", "linear"):
            raise InvalidArgumentError(f"unknown cdf kind {self.kind!r}")
        if not xs or len(xs) != len(ps):
            raise InvalidArgumentError("cdf needs matching, nonempty breakpoints")
        if not _finite(*xs, *ps):
            raise InvalidArgumentError("cdf breakpoints must be finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidArgumentError("cdf breakpoints must be strictly increasing")
        if any(b < a for a, b in zip(ps, ps[1:])):
            raise InvalidArgumentError("cdf must be nondecreasing")
        if ps[0] < 0.0 or ps[-1] != 1.0:
            raise InvalidArgumentError("cdf values must start at >= 0 and end at exactly 1")

    def __call__(self, v: float) -> float:
        xs, ps = self.xs, self.ps
        if v < xs[0]:
            return 0.0
        if v >= xs[-1]:
            return 1.0
        k = int(np.searchsorted(xs, v, side="right")) - 1
        if self.kind == "step" or xs[k] == v:
            return ps[k]
        t = (v - xs[k]) / (xs[k + 1] - xs[k])
        return ps[k] + t * (ps[k + 1] - ps[k])

    def left_limit(self, v: float) -> float:
        """``F(v-)``."""
        xs, ps = self.xs, self.ps
        if v <= xs[0]:
            return 0.0
        if v > xs[-1]:
            return 1.0
        k = int(np.searchsorted(xs, v, side="left")) - 1
        if self.kind == "step":
            return ps[k]
        t = (v - xs[k]) / (xs[k + 1] - xs[k])
        return ps[k] + t * (ps[k + 1] - ps[k])

    def quantile(self, p: float) -> float:
        """Generalized inverse ``inf {v : F(v) >= p}`` for ``p`` in ``(0, 1]``."""
        xs, ps = self.xs, self.ps
        k = int(np.searchsorted(ps, p, side="left"))
        k = min(k, len(xs) - 1)
        if self.kind == "step" or k == 0:
            return xs[k]
        lo_p, hi_p = ps[k - 1], ps[k]
        t = (p - lo_p) / (hi_p - lo_p)
        return xs[k - 1] + t * (xs[k] - xs[k - 1])


@dataclass(frozen=True)
class PBox:
    """All distributions on ``support`` whose CDF lies between ``lower`` and ``upper``."""

    support: Interval
    lower: Cdf
    upper: Cdf

    def __post_init__(self):
        s = self.support
        for name, cdf in (("lower", self.lower), ("upper", self.upper)):
            if cdf.xs[0] < s.lo or cdf.xs[-1] > s.hi:
                raise InvalidArgumentError(f"{name} cdf breakpoints leave the support")
        probes = sorted(set(self.lower.xs) | set(self.upper.xs))
        for v in probes:
            if self.lower(v) > self.upper(v) + MASS_TOL or self.lower.left_limit(v) > self.upper.left_limit(v) + MASS_TOL:
                raise InvalidArgumentError(f"lower cdf exceeds upper cdf at {v}")

    @classmethod
    def precise(cls, cdf: Cdf, support: Interval | None = None) -> PBox:
        if support is None:
            support = Interval(cdf.xs[0], cdf.xs[-1])
        return cls(support, cdf, cdf)


@dataclass(frozen=True)
class DsStructure:
    """Finite random set: focal intervals with masses summing to one."""

    focal: tuple[tuple[Interval, float], ...]
    support: Interval | None = None

    def __post_init__(self):
        focal = tuple((iv, float(m)) for iv, m in self.focal)
        object.__setattr__(self, "focal", focal)
        if not focal:
            raise InvalidArgumentError("DS structure needs at least one focal element")
        if any(m < 0 for _, m in focal):
            raise InvalidArgumentError("negative focal mass")
        total = math.fsum(m for _, m in focal)
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidArgumentError(f"focal masses sum to {total!r}, not 1")
        if self.support is not None:
            for iv, _ in focal:
                if not self.support.contains_interval(iv, tol=MASS_TOL):
                    raise InvalidArgumentError("focal interval outside declared support")

    @property
    def los(self) -> np.ndarray:
        return np.array([iv.lo for iv, _ in self.focal])

    @property
    def his(self) -> np.ndarray:
        return np.array([iv.hi for iv, _ in self.focal])

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.focal])

    def hull(self) -> Interval:
        return Interval(min(iv.lo for iv, _ in self.focal), max(iv.hi for iv, _ in self.focal))


UncertainScalar = Union[Point, Interval, Contamination, PBox, DsStructure]


def support_of(model: UncertainScalar) -> Interval:
    """Smallest interval containing every value the model admits."""
    if isinstance(model, DsStructure):
        return model.support if model.support is not None else model.hull()
    return model.support


def to_ds(model: UncertainScalar, n_focal: int = DEFAULT_N_FOCAL) -> DsStructure:
    """Discretize a scalar model into a Dempster-Shafer structure.

    P-boxes are sliced into ``n_focal`` equal-mass focal elements whose
    endpoints are the generalized inverses of the upper and lower CDF at the
    slice midpoints; the other models are represented exactly.

    >>> to_ds(Point(2.0), 4).focal
    ((Interval(lo=2.0, hi=2.0), 1.0),)
    """
    if n_focal < 1:
        raise InvalidArgumentError(f"n_focal must be >= 1, got {n_focal}")
    if isinstance(model, DsStructure):
        return model
    if isinstance(model, Point):
        iv = Interval(model.value, model.value)
        return DsStructure(((iv, 1.0),), iv)
    if isinstance(model, Interval):
        return DsStructure(((model, 1.0),), model)
    if isinstance(model, Contamination):
        eps = model.epsilon
        focal = [(Interval(v, v), (1.0 - eps) * p) for v, p in model.center.atoms]
        focal.append((model.support, eps))
        return DsStructure(tuple(focal), model.support)
    if isinstance(model, PBox):
        s = model.support
        focal = []
        for i in range(n_focal):
            p = (i + 0.5) / n_focal
            lo = min(max(model.upper.quantile(p), s.lo), s.hi)
            hi = min(max(model.lower.quantile(p), s.lo), s.hi)
            focal.append((Interval(lo, hi), 1.0 / n_focal))
        return DsStructure(tuple(focal), s)
    raise InvalidArgumentError(f"not an uncertainty model: {model!r}")


@dataclass(frozen=True)
class JointModel:
    """Independent product of scalar models, ordered as ``u``, ``y`` (row-major), ``z``."""

    entries: tuple[UncertainScalar, ...]
    n: int | None = None
    m: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.n is not None and self.m is not None:
            expected = self.n + self.m * self.n + self.m
            if len(self.entries) != expected:
                raise InvalidArgumentError(
                    f"joint model has {len(self.entries)} entries, expected {expected} for n={self.n}, m={self.m}")

    @classmethod
    def of(cls, *entries: UncertainScalar) -> JointModel:
        return cls(tuple(entries))

    def __len__(self):
        return len(self.entries)

    def supports(self) -> list[Interval]:
        return [support_of(e) for e in self.entries]


def _as_joint(model) -> JointModel:
    if isinstance(model, JointModel):
        return model
    return JointModel((model,))


@dataclass(frozen=True)
class EvaluationPlan:
    """How focal boxes are discretized and minimized over.

    ``strategy="monotone"`` takes the box minimum at the single corner given
    by ``signs`` (+1 nondecreasing, -1 nonincreasing, 0 constant in that
    coordinate); exact whenever the declared signs are right.
    ``strategy="grid"`` minimizes over ``grid_resolution`` points per
    non-degenerate coordinate, which over-estimates the true minimum by at
    most the function's modulus of continuity at the grid spacing.
    """

    n_focal: int | tuple[int, ...] = DEFAULT_N_FOCAL
    strategy: str = "grid"
    signs: tuple[int, ...] | None = None
    grid_resolution: int = DEFAULT_GRID
    budget: int = EVAL_BUDGET

    def __post_init__(self):
        if self.strategy not in ("monotone", "grid"):
            raise InvalidArgumentError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "monotone" and self.signs is None:
            raise InvalidArgumentError("monotone strategy needs per-coordinate signs")
        if self.signs is not None:
            object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
            if any(s not in (-1, 0, 1) for s in self.signs):
                raise InvalidArgumentError("signs must be -1, 0 or +1")
        if self.grid_resolution < 2:
            raise InvalidArgumentError("grid_resolution must be >= 2")

    @classmethod
    def monotone(cls, signs: Sequence[int], n_focal=DEFAULT_N_FOCAL) -> EvaluationPlan:
        return cls(n_focal=n_focal, strategy="monotone", signs=tuple(signs))

    @classmethod
    def grid(cls, resolution: int = DEFAULT_GRID, n_focal=DEFAULT_N_FOCAL) -> EvaluationPlan:
        return cls(n_focal=n_focal, strategy="grid", grid_resolution=resolution)

    def negated(self) -> EvaluationPlan:
        """Plan for ``-f``: monotone signs flip, everything else is unchanged."""
        if self.signs is None:
            return self
        return EvaluationPlan(self.n_focal, self.strategy, tuple(-s for s in self.signs),
                              self.grid_resolution, self.budget)

    def focal_count(self, index: int) -> int:
        if isinstance(self.n_focal, int):
            return self.n_focal
        return self.n_focal[index]


def vectorized(fn: Callable[[np.ndarray], np.ndarray]) -> Callable:
    """Mark ``fn`` as accepting a ``(k, d)`` array of realizations at once."""
    fn.vectorized = True
    return fn


def evaluate_rows(f: Callable, points: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on every row of ``points`` and reject non-finite values."""
    if getattr(f, "vectorized", False):
        values = np.asarray(f(points), dtype=float).reshape(len(points))
    else:
        values = np.fromiter((f(row) for row in points), dtype=float, count=len(points))
    if not np.all(np.isfinite(values)):
        raise UnboundedFunctionError("function is non-finite on the support")
    return values


def focal_products(dss: Sequence[DsStructure]):
    """Enumerate joint focal elements as ``(lo, hi, mass)`` arrays.

    ``lo`` and ``hi`` have shape ``(P, d)``; ``mass`` has shape ``(P,)``.
    """
    counts = [len(ds.focal) for ds in dss]
    index = np.array(list(itertools.product(*[range(c) for c in counts])), dtype=np.intp)
    index = index.reshape(-1, len(dss))
    lo = np.empty(index.shape)
    hi = np.empty(index.shape)
    mass = np.ones(len(index))
    for j, ds in enumerate(dss):
        lo[:, j] = ds.los[index[:, j]]
        hi[:, j] = ds.his[index[:, j]]
        mass *= ds.masses[index[:, j]]
    return lo, hi, mass


def _box_grid(lo: np.ndarray, hi: np.ndarray, resolution: int) -> np.ndarray:
    axes = [np.array([a]) if a == b else np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def lower_expectation(joint, f: Callable, plan: EvaluationPlan | None = None) -> float:
    """Lower expectation of ``f`` over a joint model.

    ``f`` receives one realization vector with one coordinate per entry of
    the joint model (or a 2-D batch when marked with :func:`vectorized`).
    The result is the mass-weighted sum over joint focal boxes of the
    minimum of ``f`` on each box.
    """
    joint = _as_joint(joint)
    plan = plan or EvaluationPlan()
    d = len(joint)
    if plan.signs is not None and len(plan.signs) != d:
        raise InvalidArgumentError(f"plan has {len(plan.signs)} signs for {d} entries")
    dss = [to_ds(e, plan.focal_count(i)) for i, e in enumerate(joint.entries)]
    n_products = math.prod(len(ds.focal) for ds in dss)

    if plan.strategy == "monotone":
        if n_products > plan.budget:
            raise BudgetExceededError(f"{n_products} focal products exceed budget {plan.budget}")
        lo, hi, mass = focal_products(dss)
        signs = np.array(plan.signs)
        corners = np.where(signs >= 0, lo, hi)
        minima = evaluate_rows(f, corners)
        return float(np.dot(mass, minima))

    per_box = [math.prod(plan.grid_resolution if iv.lo < iv.hi else 1 for iv in box)
               for box in itertools.product(*[[iv for iv, _ in ds.focal] for ds in dss])]
    if sum(per_box) > plan.budget:
        raise BudgetExceededError(f"{sum(per_box)} evaluations exceed budget {plan.budget}")
    lo, hi, mass = focal_products(dss)
    minima = np.empty(len(mass))
    for k in range(len(mass)):
        minima[k] = evaluate_rows(f, _box_grid(lo[k], hi[k], plan.grid_resolution)).min()
    return float(np.dot(mass, minima))


def upper_expectation(joint, f: Callable, plan: EvaluationPlan | None = None) -> float:
    """Upper expectation, defined as ``-lower_expectation(-f)``."""
    plan = plan or EvaluationPlan()
    if getattr(f, "vectorized", False):
        neg = vectorized(lambda pts: -np.asarray(f(pts), dtype=float))
    else:
        def neg(v):
            return -f(v)
    return -lower_expectation(joint, neg, plan.negated())


def expectation_precise(dist: DiscreteDistribution, f: Callable[[float], float]) -> float:
    """Plain expectation ``sum p * f(v)`` under a discrete distribution."""
    return math.fsum(p * f(v) for v, p in dist.atoms)
