"""Exact solver for small box-bounded LPs by basic-solution enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionLimitError, InvalidArgumentError, WrongModelError
from .model import UncertainLp
from .uncertainty import Interval, Point

MAX_DIM = 14
FEAS_TOL = 1e-9
PIVOT_TOL = 1e-12
DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class DeterministicLp:
    """``max c.x  s.t.  A x <= b,  lo <= x <= hi`` with ``0 <= lo`` and finite ``hi``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    x_bounds: tuple[Interval, ...]

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float).reshape(len(b), len(c))
        bounds = tuple(bd if isinstance(bd, Interval) else Interval(*bd) for bd in self.x_bounds)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x_bounds", bounds)
        if len(bounds) != len(c):
            raise InvalidArgumentError("one bound per variable required")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("LP data must be finite")
        if any(bd.lo < 0 for bd in bounds):
            raise InvalidArgumentError("variable lower bounds must be >= 0")

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.b)

    def bounds_array(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([bd.lo for bd in self.x_bounds]), np.array([bd.hi for bd in self.x_bounds]))

    def is_feasible(self, x, tol: float = FEAS_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        lo, hi = self.bounds_array()
        return bool(np.all(self.A @ x <= self.b + tol) and np.all(x >= lo - tol) and np.all(x <= hi + tol))


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None = None
    value: float | None = None
    basis: tuple[int, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _solve_square(M: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Gaussian elimination with partial pivoting; ``None`` when singular."""
    k = len(rhs)
    a = np.concatenate([M.astype(float), rhs.reshape(k, 1).astype(float)], axis=1)
    for col in range(k):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) < PIVOT_TOL:
            return None
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
        a[col + 1:] -= np.outer(a[col + 1:, col] / a[col, col], a[col])
    x = np.empty(k)
    for row in range(k - 1, -1, -1):
        x[row] = (a[row, k] - a[row, row + 1:k] @ x[row + 1:]) / a[row, row]
    return x


def _constraint_system(lp: DeterministicLp):
    n = lp.n
    lo, hi = lp.bounds_array()
    G = np.vstack([lp.A, np.eye(n), -np.eye(n)])
    h = np.concatenate([lp.b, hi, -lo])
    return G, h


def _check_dim(n: int, m: int):
    if n + m > MAX_DIM:
        raise DimensionLimitError(f"n + m = {n + m} exceeds the enumeration limit {MAX_DIM}")


def _seqdot(a, x) -> float:
    s = 0.0
    for j in range(len(x)):
        s = s + float(a[j]) * float(x[j])
    return s


def _repair(x: np.ndarray, lp: DeterministicLp, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Nudge a vertex by a few ulps until ``A x <= b`` holds exactly in
    left-to-right arithmetic, so that boundary vertices count as feasible
    downstream. Returns ``x`` unchanged if no nudge works."""
    y = x.copy()
    for _ in range(8 * max(1, lp.n)):
        bad = [i for i in range(lp.m) if not _seqdot(lp.A[i], y) <= lp.b[i]]
        if not bad:
            return y
        i = bad[0]
        row = lp.A[i]
        order = np.argsort(-np.abs(row), kind="stable")
        for j in order:
            if row[j] == 0.0:
                break
            target = lo[j] if row[j] > 0 else hi[j]
            if y[j] != target:
                excess = _seqdot(row, y) - lp.b[i]
                step = min(abs(excess / row[j]), abs(y[j] - target))
                y[j] = np.nextafter(y[j] - np.sign(row[j]) * step, target)
                break
        else:
            return x
    return y if all(_seqdot(lp.A[i], y) <= lp.b[i] for i in range(lp.m)) else x


def basic_feasible_solutions(lp: DeterministicLp):
    """Yield ``(basis, x)`` for every feasible basic solution, in basis order."""
    _check_dim(lp.n, lp.m)
    G, h = _constraint_system(lp)
    lo, hi = lp.bounds_array()
    for basis in itertools.combinations(range(len(h)), lp.n):
        idx = list(basis)
        x = _solve_square(G[idx], h[idx])
        if x is None:
            continue
        if np.all(G @ x <= h + FEAS_TOL):
            # round-off can leave a vertex a hair outside its bounds
            yield basis, _repair(np.clip(x, lo, hi), lp, lo, hi)


def solve_exact(lp: DeterministicLp) -> LpSolution:
    """Maximize ``c.x`` exactly by enumerating all basic solutions.

    Ties in value (within ``1e-9``) go to the lexicographically smallest x.

    >>> sol = solve_exact(DeterministicLp([1.0], [[1.0]], [5.0], [(0, 10)]))
    >>> sol.status, float(sol.x[0]), sol.value
    ('optimal', 5.0, 5.0)
    """
    best = None
    for basis, x in basic_feasible_solutions(lp):
        value = float(lp.c @ x)
        if best is None or value > best[0] + FEAS_TOL:
            best = (value, x, basis)
        elif value >= best[0] - FEAS_TOL and tuple(x) < tuple(best[1]):
            best = (value, x, basis)
    if best is None:
        return LpSolution("infeasible")
    value, x, basis = best
    return LpSolution("optimal", x, value, basis)


def feasible_vertices(lp: DeterministicLp) -> list[np.ndarray]:
    """Distinct feasible vertices, deduplicated within ``1e-9`` and sorted."""
    found: list[np.ndarray] = []
    for _, x in basic_feasible_solutions(lp):
        if not any(np.max(np.abs(x - v)) <= DEDUP_TOL for v in found):
            found.append(x)
    return sorted(found, key=tuple)


def _only_intervals(problem: UncertainLp):
    for e in problem.entries:
        if not isinstance(e, (Point, Interval)):
            raise WrongModelError(f"robust counterpart needs point or interval entries, got {type(e).__name__}")


def robust_counterpart(problem: UncertainLp) -> DeterministicLp:
    """Worst-case LP of an interval problem: lowest objective, highest
    constraint coefficients, lowest right-hand sides."""
    _only_intervals(problem)
    s = problem.support_arrays()
    return DeterministicLp(s["u_lo"], s["y_hi"], s["z_lo"], problem.x_bounds)


def nominal_lp(problem: UncertainLp) -> DeterministicLp:
    """LP at support midpoints."""
    s = problem.support_arrays()
    return DeterministicLp(0.5 * (s["u_lo"] + s["u_hi"]), 0.5 * (s["y_lo"] + s["y_hi"]),
                           0.5 * (s["z_lo"] + s["z_hi"]), problem.x_bounds)


def nominal_vertices(problem: UncertainLp) -> list[np.ndarray]:
    """Feasible vertices of the midpoint polytope."""
    return feasible_vertices(nominal_lp(problem))
