"""Decision-theoretic view of the uncertain LP.

A decision ``x`` earns utility ``u.x`` when every constraint ``y x <= z``
holds at the realized parameters and the constant punishment ``L`` when any
constraint fails. Over a finite candidate set we compute the maximin set
(largest lower expected utility) and the maximal set (decisions that no
alternative beats in upper expected utility difference).

Expectations factorize over the independent entries: the objective part
depends only on ``u`` and the feasibility indicator is a product over rows,
each depending on its own ``y`` row and ``z`` entry. The heavy loops live in
:mod:`credal_lp.kernels`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BudgetExceededError, EmptyAfterFilterError, InvalidArgumentError
from .lp import nominal_vertices, feasible_vertices, robust_counterpart
from .model import Realization, UncertainLp
from .uncertainty import (DEFAULT_N_FOCAL, EvaluationPlan, Interval, JointModel, Point, focal_products,
                          to_ds, vectorized)

TIE_TOL = 1e-9
DEDUP_TOL = 1e-12
ROW_BUDGET = 2_000_000
GRID_BUDGET = 200_000


def utility(x, r: Realization, L: float) -> float:
    """``u.x`` if ``y x <= z`` holds row by row, otherwise ``L``."""
    x = np.asarray(x, dtype=float)
    for i in range(len(r.z)):
        if not kernels.seqdot(r.y[i], x) <= r.z[i]:
            return float(L)
    return kernels.seqdot(r.u, x)


def utility_signs(n: int, m: int) -> tuple[int, ...]:
    """Monotonicity of the utility in each parameter for ``x >= 0``: up in
    ``u`` and ``z``, down in ``y`` (the latter needs ``u.x >= L``)."""
    return (1,) * n + (-1,) * (m * n) + (1,) * m


def utility_function(x, n: int, m: int, L: float):
    """The utility of ``x`` as a vectorized function of realization vectors."""
    x = np.asarray(x, dtype=float)

    @vectorized
    def g(points):
        points = np.atleast_2d(points)
        u = points[:, :n]
        y = points[:, n:n + m * n].reshape(-1, m, n)
        z = points[:, n + m * n:]
        ok = np.ones(len(points), dtype=bool)
        for i in range(m):
            ok &= kernels._kernels_py._seqdot(y[:, i, :], x) <= z[:, i]
        return np.where(ok, kernels._kernels_py._seqdot(u, x), L)

    return g


@dataclass(frozen=True)
class CandidateSet:
    """Finite set of decisions, one per row of ``points``."""

    points: np.ndarray
    provenance: tuple[str, ...]

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if len(pts) == 0:
            raise InvalidArgumentError("candidate set is empty")
        if len(self.provenance) != len(pts):
            raise InvalidArgumentError("one provenance tag per candidate required")
        if np.any(pts < 0):
            raise InvalidArgumentError("candidates must be nonnegative")

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_points(cls, points, tag: str = "explicit") -> CandidateSet:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return _dedup(pts, [tag] * len(pts))

    def subset(self, idx) -> CandidateSet:
        idx = list(idx)
        return CandidateSet(self.points[idx], tuple(self.provenance[i] for i in idx))

    def check_bounds(self, problem: UncertainLp, tol: float = 1e-9):
        lo, hi = problem.bounds_array()
        if self.points.shape[1] != problem.n:
            raise InvalidArgumentError(f"candidates have {self.points.shape[1]} coordinates, problem has {problem.n}")
        if np.any(self.points < lo - tol) or np.any(self.points > hi + tol):
            raise InvalidArgumentError("candidate outside the decision bounds")


def _dedup(points: np.ndarray, tags) -> CandidateSet:
    keep: list[int] = []
    for k, p in enumerate(points):
        if keep and np.any(np.max(np.abs(points[keep] - p), axis=1) <= DEDUP_TOL):
            continue
        keep.append(k)
    return CandidateSet(points[keep], tuple(tags[k] for k in keep))


def build_candidates(problem: UncertainLp, grid_resolution: int | tuple[int, ...] = 21,
                     include_vertices: bool = True, robust_vertices: bool | None = None) -> CandidateSet:
    """Uniform grid over the decision box plus LP vertices.

    Vertices of the midpoint polytope are added when ``include_vertices``;
    vertices of the worst-case polytope are added when ``robust_vertices``
    (default: whenever every entry is a point or an interval).
    """
    lo, hi = problem.bounds_array()
    res = (grid_resolution,) * problem.n if isinstance(grid_resolution, int) else tuple(grid_resolution)
    if len(res) != problem.n or any(r < 1 for r in res):
        raise InvalidArgumentError("grid_resolution must be positive, one per axis")
    axes = [np.array([a]) if (a == b or r == 1) else np.linspace(a, b, r) for a, b, r in zip(lo, hi, res)]
    total = math.prod(len(a) for a in axes)
    if total > GRID_BUDGET:
        raise BudgetExceededError(f"candidate grid of {total} points exceeds {GRID_BUDGET}")
    grid = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, problem.n)
    pts = [grid]
    tags = ["grid-point"] * len(grid)
    if include_vertices:
        verts = nominal_vertices(problem)
        if verts:
            pts.append(np.array(verts))
            tags += ["nominal-vertex"] * len(verts)
    if robust_vertices is None:
        robust_vertices = all(isinstance(e, (Point, Interval)) for e in problem.entries)
    if robust_vertices:
        verts = feasible_vertices(robust_counterpart(problem))
        if verts:
            pts.append(np.array(verts))
            tags += ["robust-vertex"] * len(verts)
    return _dedup(np.vstack(pts), tags)


@dataclass(frozen=True)
class Discretized:
    """Array form of a joint model, ready for the kernels."""

    n: int
    m: int
    u_support_lo: np.ndarray
    mu_lo: np.ndarray          # expected focal lower endpoint per u entry
    mu_hi: np.ndarray
    u_lo: np.ndarray           # (Q, n) joint u focal boxes
    u_hi: np.ndarray
    u_mass: np.ndarray
    y_lo: np.ndarray           # (R, n) constraint-row focal boxes, all rows stacked
    y_hi: np.ndarray
    z_lo: np.ndarray
    z_hi: np.ndarray
    r_mass: np.ndarray
    row_start: np.ndarray      # (m + 1,) offsets into the stacked rows

    def rows(self):
        for i in range(self.m):
            s, e = self.row_start[i], self.row_start[i + 1]
            yield slice(s, e)


def discretize(joint: JointModel, n_focal: int = DEFAULT_N_FOCAL) -> Discretized:
    """Precompute focal boxes for the objective and for each constraint row."""
    n, m = joint.n, joint.m
    if n is None or m is None:
        raise InvalidArgumentError("joint model must carry problem dimensions (use UncertainLp.joint())")
    dss = [to_ds(e, n_focal) for e in joint.entries]
    u_ds = dss[:n]
    rows = [dss[n + i * n:n + (i + 1) * n] + [dss[n + m * n + i]] for i in range(m)]

    u_counts = math.prod(len(ds.focal) for ds in u_ds)
    if u_counts > ROW_BUDGET:
        raise BudgetExceededError(f"{u_counts} objective focal boxes exceed {ROW_BUDGET}")
    u_lo, u_hi, u_mass = focal_products(u_ds)

    ylo, yhi, zlo, zhi, rmass, start = [], [], [], [], [], [0]
    for row in rows:
        count = math.prod(len(ds.focal) for ds in row)
        if count > ROW_BUDGET:
            raise BudgetExceededError(f"{count} focal boxes in one constraint row exceed {ROW_BUDGET}")
        lo, hi, mass = focal_products(row)
        ylo.append(lo[:, :n])
        yhi.append(hi[:, :n])
        zlo.append(lo[:, n])
        zhi.append(hi[:, n])
        rmass.append(mass)
        start.append(start[-1] + len(mass))

    def stack(parts, shape):
        return np.concatenate(parts) if parts else np.empty(shape)

    return Discretized(
        n=n, m=m,
        u_support_lo=np.array([ds.hull().lo if ds.support is None else ds.support.lo for ds in u_ds]),
        mu_lo=np.array([float(np.dot(ds.masses, ds.los)) if len(ds.focal) > 1 else ds.los[0] for ds in u_ds]),
        mu_hi=np.array([float(np.dot(ds.masses, ds.his)) if len(ds.focal) > 1 else ds.his[0] for ds in u_ds]),
        u_lo=u_lo, u_hi=u_hi, u_mass=u_mass,
        y_lo=stack(ylo, (0, n)), y_hi=stack(yhi, (0, n)),
        z_lo=stack(zlo, (0,)), z_hi=stack(zhi, (0,)),
        r_mass=stack(rmass, (0,)), row_start=np.array(start, dtype=np.intp),
    )


def guaranteed_objective(problem: UncertainLp, points) -> np.ndarray:
    """``u_lo . x`` with ``u_lo`` the per-entry support minimum of the objective."""
    u_lo = problem.support_arrays()["u_lo"]
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return kernels._kernels_py._seqdot(points, u_lo)


def filter_candidates(problem: UncertainLp, candidates: CandidateSet) -> CandidateSet:
    """Drop candidates whose guaranteed objective is not strictly positive."""
    keep = np.flatnonzero(guaranteed_objective(problem, candidates.points) > 0)
    if len(keep) == 0:
        raise EmptyAfterFilterError("no candidate has a strictly positive guaranteed objective")
    return candidates.subset(keep)


def choose_punishment(problem: UncertainLp, candidates: CandidateSet) -> float:
    """Half the smallest strictly positive guaranteed objective over the candidates.

    >>> p = UncertainLp.from_intervals([(1, 2)], [[(1, 1)]], [(5, 5)], [(0, 10)])
    >>> choose_punishment(p, CandidateSet.from_points([[1.0], [2.0]]))
    0.5
    """
    kept = filter_candidates(problem, candidates)
    return 0.5 * float(guaranteed_objective(problem, kept.points).min())


def _check_punishment(problem_or_disc, points, L):
    if not L > 0:
        raise InvalidArgumentError(f"punishment must be positive, got {L}")
    u_lo = problem_or_disc.u_support_lo
    g = kernels._kernels_py._seqdot(np.atleast_2d(points), u_lo)
    if np.any(g <= L):
        raise InvalidArgumentError("punishment must lie below every candidate's guaranteed objective")


def _row_product(disc: Discretized, X: np.ndarray, which: str) -> np.ndarray:
    out = np.ones(len(X))
    for sl in disc.rows():
        if which == "lower":
            mass = kernels.feasible_mass(X, disc.y_hi[sl], disc.z_lo[sl], disc.r_mass[sl])
        else:
            mass = kernels.feasible_mass(X, disc.y_lo[sl], disc.z_hi[sl], disc.r_mass[sl])
        out = out * mass
    return out


def lower_utilities(disc: Discretized, X, L: float) -> np.ndarray:
    """Lower expected utility for every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_punishment(disc, X, L)
    p = _row_product(disc, X, "lower")
    a = kernels._kernels_py._seqdot(X, disc.mu_lo)
    return p * a + (1.0 - p) * L


def upper_utilities(disc: Discretized, X, L: float) -> np.ndarray:
    """Upper expected utility for every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_punishment(disc, X, L)
    q = _row_product(disc, X, "upper")
    a = kernels._kernels_py._seqdot(X, disc.mu_hi)
    return q * a + (1.0 - q) * L


def lower_utility(x, joint: JointModel, L: float, n_focal: int = DEFAULT_N_FOCAL) -> float:
    """Lower expectation of the utility of ``x``."""
    return float(lower_utilities(discretize(joint, n_focal), x, L)[0])


def upper_utility(x, joint: JointModel, L: float, n_focal: int = DEFAULT_N_FOCAL) -> float:
    return float(upper_utilities(discretize(joint, n_focal), x, L)[0])


def upper_difference(disc: Discretized, X, pairs, L: float) -> np.ndarray:
    """Upper expectation of ``G_x - G_x'`` for each ``(i, j)`` index pair into ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pairs = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    if len(pairs) == 0:
        return np.empty(0)
    return kernels.upper_diff_pairs(X, pairs, disc.y_lo, disc.y_hi, disc.z_lo, disc.z_hi, disc.r_mass,
                                    disc.row_start, disc.u_lo, disc.u_hi, disc.u_mass, float(L))


def _argmax_set(values: np.ndarray, tol: float) -> list[int]:
    best = values.max()
    return [int(k) for k in np.flatnonzero(values >= best - tol)]


def _maximal_indices(disc, X, low, upp, L, tol, literal=False, prune=True) -> list[int]:
    C = len(X)
    best_low = low.max()
    pairs: list[tuple[int, int]] = []
    alive = []
    for i in range(C):
        if prune and upp[i] < best_low - 2 * tol:
            continue  # beaten outright by the maximin candidate
        alive.append(i)
        for k in range(C):
            if k == i:
                continue
            if prune:
                if not literal and not low[k] > low[i]:
                    continue
                if literal and low[i] - low[k] > 2 * tol:
                    continue
            pairs.append((i, k))
    diffs = upper_difference(disc, X, pairs, L)
    verdict = {i: True for i in alive}
    for (i, k), d in zip(pairs, diffs):
        if literal:
            if not d > tol:
                verdict[i] = False
        elif d < -tol:
            verdict[i] = False
    return [i for i in alive if verdict[i]]


def maximin_decisions(problem: UncertainLp, joint: JointModel | None, candidates: CandidateSet, L: float,
                      tie_tol: float = TIE_TOL, n_focal: int = DEFAULT_N_FOCAL) -> list[np.ndarray]:
    """Candidates whose lower expected utility is within ``tie_tol`` of the best."""
    disc = discretize(joint or problem.joint(), n_focal)
    low = lower_utilities(disc, candidates.points, L)
    return [candidates.points[i] for i in _argmax_set(low, tie_tol)]


def maximal_decisions(problem: UncertainLp, joint: JointModel | None, candidates: CandidateSet, L: float,
                      mode: str = "standard", tol: float = TIE_TOL, n_focal: int = DEFAULT_N_FOCAL,
                      prune: bool = True) -> list[np.ndarray]:
    """Candidates not dominated in upper expected utility difference.

    ``mode="standard"`` keeps ``x`` when ``E_up[G_x - G_x'] >= -tol`` for all
    ``x'``; ``mode="paper-literal"`` requires ``> tol`` against every other
    candidate.
    """
    if mode not in ("standard", "paper-literal"):
        raise InvalidArgumentError(f"unknown maximality mode {mode!r}")
    disc = discretize(joint or problem.joint(), n_focal)
    X = candidates.points
    low = lower_utilities(disc, X, L)
    upp = upper_utilities(disc, X, L)
    idx = _maximal_indices(disc, X, low, upp, L, tol, literal=(mode == "paper-literal"), prune=prune)
    return [X[i] for i in idx]


@dataclass(frozen=True)
class DecisionOutcome:
    candidates: CandidateSet
    maximin: tuple[int, ...]
    maximal: tuple[int, ...]
    lower: np.ndarray
    upper: np.ndarray
    punishment: float
    vacuous: bool
    mode: str = "standard"

    @property
    def maximin_set(self) -> np.ndarray:
        return self.candidates.points[list(self.maximin)]

    @property
    def maximal_set(self) -> np.ndarray:
        return self.candidates.points[list(self.maximal)]

    def to_dict(self) -> dict:
        pts = self.candidates.points
        return {
            "punishment": self.punishment,
            "vacuous_decision": self.vacuous,
            "maximality_mode": self.mode,
            "maximin": [pts[i].tolist() for i in self.maximin],
            "maximal": [pts[i].tolist() for i in self.maximal],
            "candidates": [
                {"x": pts[k].tolist(), "provenance": self.candidates.provenance[k],
                 "lower_utility": float(self.lower[k]), "upper_utility": float(self.upper[k])}
                for k in range(len(pts))
            ],
        }


def decide(problem: UncertainLp, candidates: CandidateSet | None = None, L: float | None = None,
           n_focal: int = DEFAULT_N_FOCAL, mode: str = "standard", tie_tol: float = TIE_TOL,
           grid_resolution: int = 21, include_vertices: bool = True,
           compute_maximal: bool = True) -> DecisionOutcome:
    """Build and filter candidates, pick the punishment, and compute both decision sets.

    With ``compute_maximal=False`` the maximal set is left empty.
    """
    if candidates is None:
        candidates = build_candidates(problem, grid_resolution, include_vertices)
    candidates.check_bounds(problem)
    candidates = filter_candidates(problem, candidates)
    if L is None:
        L = choose_punishment(problem, candidates)
    disc = discretize(problem.joint(), n_focal)
    X = candidates.points
    low = lower_utilities(disc, X, L)
    upp = upper_utilities(disc, X, L)
    maximin = _argmax_set(low, tie_tol)
    maximal = (_maximal_indices(disc, X, low, upp, L, tie_tol, literal=(mode == "paper-literal"))
               if compute_maximal else [])
    vacuous = bool(np.all(np.abs(low - L) <= tie_tol))
    return DecisionOutcome(candidates, tuple(maximin), tuple(maximal), low, upp, float(L), vacuous, mode)
