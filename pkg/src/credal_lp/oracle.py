"""Brute-force verifiers for expectations and decision sets.

Nothing here reuses the evaluation code under test: the utility is
re-implemented, joint focal products are enumerated directly and box
extrema are taken over explicit selection grids. Grid minima over-estimate
true minima; :func:`grid_error_bound` states by how much for Lipschitz
functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, InvalidArgumentError, UnboundedFunctionError
from .uncertainty import Contamination, JointModel, to_ds

BUDGET = 10_000_000


@dataclass(frozen=True)
class OracleConfig:
    grid_per_axis: int = 33
    selection_mode: str = "endpoints+grid"  # or "endpoints"
    seed: int = 0
    n_focal: int = 8
    budget: int = BUDGET
    tol: float = 1e-9

    def __post_init__(self):
        if self.grid_per_axis < 2:
            raise InvalidArgumentError("grid_per_axis must be >= 2")
        if self.selection_mode not in ("endpoints", "endpoints+grid"):
            raise InvalidArgumentError(f"unknown selection mode {self.selection_mode!r}")


def grid_error_bound(widths, lipschitz, grid_per_axis: int) -> float:
    """How far a grid minimum can sit above the true minimum of a function
    with per-coordinate Lipschitz constants ``lipschitz`` on a box."""
    return float(sum(k * w for k, w in zip(lipschitz, widths))) / (2.0 * (grid_per_axis - 1))


def _selections(lo: float, hi: float, cfg: OracleConfig) -> np.ndarray:
    if lo == hi:
        return np.array([lo])
    if cfg.selection_mode == "endpoints":
        return np.array([lo, hi])
    return np.linspace(lo, hi, cfg.grid_per_axis)


def _call(f, points: np.ndarray) -> np.ndarray:
    if getattr(f, "vectorized", False):
        out = np.asarray(f(points), dtype=float).reshape(len(points))
    else:
        out = np.array([f(p) for p in points], dtype=float)
    if not np.all(np.isfinite(out)):
        raise UnboundedFunctionError("function is non-finite at a probed point")
    return out


def _joint(joint) -> JointModel:
    return joint if isinstance(joint, JointModel) else JointModel((joint,))


def brute_lower_expectation(joint, f, cfg: OracleConfig = OracleConfig()) -> float:
    """Minimum mass-weighted expectation over all measurable selections."""
    joint = _joint(joint)
    dss = [to_ds(e, cfg.n_focal) for e in joint.entries]
    sel = [[_selections(iv.lo, iv.hi, cfg) for iv, _ in ds.focal] for ds in dss]
    total = math.prod(sum(len(s) for s in per_entry) for per_entry in sel)
    if total > cfg.budget:
        raise BudgetExceededError(f"oracle needs {total} evaluations, budget is {cfg.budget}")

    masses, chunks, sizes = [], [], []
    value = 0.0

    def flush():
        nonlocal value
        vals = _call(f, np.concatenate(chunks))
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        value += float(np.dot(masses, np.minimum.reduceat(vals, starts)))
        masses.clear(), chunks.clear(), sizes.clear()

    for combo in itertools.product(*[range(len(ds.focal)) for ds in dss]):
        mass = 1.0
        axes = []
        for j, k in enumerate(combo):
            mass *= dss[j].focal[k][1]
            axes.append(sel[j][k])
        if mass == 0.0:
            continue
        mesh = np.meshgrid(*axes, indexing="ij")
        chunks.append(np.stack([g.ravel() for g in mesh], axis=1))
        sizes.append(len(chunks[-1]))
        masses.append(mass)
        if sum(sizes) > 200_000:
            flush()
    if chunks:
        flush()

    if len(joint.entries) == 1 and isinstance(joint.entries[0], Contamination):
        value = min(value, brute_contamination_lower(joint.entries[0], f, cfg))
    return value


def brute_upper_expectation(joint, f, cfg: OracleConfig = OracleConfig()) -> float:
    if getattr(f, "vectorized", False):
        def neg(p):
            return -np.asarray(f(p), dtype=float)
        neg.vectorized = True
    else:
        def neg(p):
            return -f(p)
    return -brute_lower_expectation(joint, neg, cfg)


def brute_contamination_lower(model: Contamination, f, cfg: OracleConfig = OracleConfig()) -> float:
    """Sweep Dirac contaminations ``(1 - eps) P0 + eps delta_v`` over a support grid."""
    s = model.support
    base = sum(p * float(_call(f, np.array([[v]]))[0]) for v, p in model.center.atoms)
    grid = np.linspace(s.lo, s.hi, cfg.grid_per_axis).reshape(-1, 1) if s.lo < s.hi else np.array([[s.lo]])
    vals = _call(f, grid)
    return float(min((1.0 - model.epsilon) * base + model.epsilon * v for v in vals))


def grid_extrema(joint, f, grid_per_axis: int = 33) -> tuple[float, float]:
    """Min and max of ``f`` over a dense grid of the joint support."""
    joint = _joint(joint)
    axes = []
    for e in joint.entries:
        ds = to_ds(e, 1)
        s = ds.support if ds.support is not None else ds.hull()
        axes.append(np.array([s.lo]) if s.lo == s.hi else np.linspace(s.lo, s.hi, grid_per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = _call(f, np.stack([g.ravel() for g in mesh], axis=1))
    return float(vals.min()), float(vals.max())


def oracle_utility(x, n: int, m: int, L: float):
    """Utility of decision ``x`` as a batch function of realization vectors."""
    x = np.asarray(x, dtype=float)

    def g(points):
        points = np.atleast_2d(points)
        u = points[:, :n]
        y = points[:, n:n + m * n].reshape(-1, m, n)
        z = points[:, n + m * n:]
        lhs = np.einsum("kij,j->ki", y, x)
        feasible = np.all(lhs <= z, axis=1)
        return np.where(feasible, u @ x, L)

    g.vectorized = True
    return g


def _dims(problem, joint):
    joint = joint or problem.joint()
    return joint, problem.n, problem.m


def brute_lower_utilities(problem, joint, candidates, L, cfg: OracleConfig = OracleConfig()) -> np.ndarray:
    joint, n, m = _dims(problem, joint)
    return np.array([brute_lower_expectation(joint, oracle_utility(x, n, m, L), cfg)
                     for x in candidates.points])


def brute_maximin(problem, joint, candidates, L, cfg: OracleConfig = OracleConfig()) -> list[int]:
    """Indices of candidates with maximal brute-force lower utility."""
    low = brute_lower_utilities(problem, joint, candidates, L, cfg)
    return [int(k) for k in np.flatnonzero(low >= low.max() - cfg.tol)]


def brute_upper_difference(problem, joint, x, xp, L, cfg: OracleConfig = OracleConfig()) -> float:
    joint, n, m = _dims(problem, joint)
    gx, gp = oracle_utility(x, n, m, L), oracle_utility(xp, n, m, L)

    def diff(points):
        return gx(points) - gp(points)

    diff.vectorized = True
    return brute_upper_expectation(joint, diff, cfg)


def brute_maximal(problem, joint, candidates, L, cfg: OracleConfig = OracleConfig(),
                  mode: str = "standard") -> list[int]:
    """Indices of candidates that no other candidate dominates, by pairwise brute force."""
    pts = candidates.points
    out = []
    for i in range(len(pts)):
        ok = True
        for k in range(len(pts)):
            if k == i:
                continue
            d = brute_upper_difference(problem, joint, pts[i], pts[k], L, cfg)
            if (mode == "standard" and d < -cfg.tol) or (mode != "standard" and not d > cfg.tol):
                ok = False
                break
        if ok:
            out.append(i)
    return out
