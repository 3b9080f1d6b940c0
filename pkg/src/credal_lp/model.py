"""The uncertain LP ``max u.x  s.t.  y x <= z,  x in box`` and its realizations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .uncertainty import Interval, JointModel, Point, UncertainScalar, support_of


def _as_interval(b) -> Interval:
    return b if isinstance(b, Interval) else Interval(*b)


@dataclass(frozen=True)
class UncertainLp:
    """Objective ``u`` (n entries), constraint matrix ``y`` (m x n), rhs ``z`` (m)."""

    u: tuple[UncertainScalar, ...]
    y: tuple[tuple[UncertainScalar, ...], ...]
    z: tuple[UncertainScalar, ...]
    x_bounds: tuple[Interval, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(self.u))
        object.__setattr__(self, "y", tuple(tuple(row) for row in self.y))
        object.__setattr__(self, "z", tuple(self.z))
        object.__setattr__(self, "x_bounds", tuple(_as_interval(b) for b in self.x_bounds))
        n, m = len(self.u), len(self.z)
        if n < 1:
            raise InvalidArgumentError("problem needs at least one decision variable")
        if len(self.y) != m or any(len(row) != n for row in self.y):
            raise InvalidArgumentError(f"constraint matrix must be {m}x{n}")
        if len(self.x_bounds) != n:
            raise InvalidArgumentError(f"expected {n} x bounds, got {len(self.x_bounds)}")
        for b in self.x_bounds:
            if b.lo < 0:
                raise InvalidArgumentError(f"decision bounds must be nonnegative, got [{b.lo}, {b.hi}]")

    @classmethod
    def precise(cls, c, A, b, x_bounds) -> UncertainLp:
        """All-point problem from plain arrays."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls(tuple(Point(v) for v in c),
                   tuple(tuple(Point(v) for v in row) for row in A),
                   tuple(Point(v) for v in b), x_bounds)

    @classmethod
    def from_intervals(cls, u, y, z, x_bounds) -> UncertainLp:
        """Interval-model problem from ``(lo, hi)`` pairs."""
        return cls(tuple(Interval(*p) for p in u),
                   tuple(tuple(Interval(*p) for p in row) for row in y),
                   tuple(Interval(*p) for p in z), x_bounds)

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def m(self) -> int:
        return len(self.z)

    @property
    def entries(self) -> tuple[UncertainScalar, ...]:
        return self.u + tuple(e for row in self.y for e in row) + self.z

    def joint(self) -> JointModel:
        return JointModel(self.entries, self.n, self.m)

    def bounds_array(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([b.lo for b in self.x_bounds]), np.array([b.hi for b in self.x_bounds]))

    def support_arrays(self) -> dict[str, np.ndarray]:
        """Per-entry support endpoints: ``u_lo, u_hi, y_lo, y_hi, z_lo, z_hi``."""
        us = [support_of(e) for e in self.u]
        ys = [[support_of(e) for e in row] for row in self.y]
        zs = [support_of(e) for e in self.z]
        n, m = self.n, self.m
        return {
            "u_lo": np.array([s.lo for s in us]),
            "u_hi": np.array([s.hi for s in us]),
            "y_lo": np.array([[s.lo for s in row] for row in ys]).reshape(m, n),
            "y_hi": np.array([[s.hi for s in row] for row in ys]).reshape(m, n),
            "z_lo": np.array([s.lo for s in zs]),
            "z_hi": np.array([s.hi for s in zs]),
        }

    def with_joint(self, joint: JointModel) -> UncertainLp:
        """Same dimensions and bounds, entries taken from ``joint``."""
        n, m = self.n, self.m
        e = joint.entries
        if len(e) != n + m * n + m:
            raise InvalidArgumentError("joint model does not match problem dimensions")
        return UncertainLp(e[:n], tuple(e[n + i * n:n + (i + 1) * n] for i in range(m)),
                           e[n + m * n:], self.x_bounds)


@dataclass(frozen=True)
class Realization:
    """One value for every uncertain parameter."""

    u: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        z = np.asarray(self.z, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).reshape(len(z), len(u))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_vector(cls, v: Sequence[float], n: int, m: int) -> Realization:
        v = np.asarray(v, dtype=float)
        return cls(v[:n], v[n:n + m * n].reshape(m, n), v[n + m * n:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.y.ravel(), self.z])

    def within(self, problem: UncertainLp, tol: float = 1e-12) -> bool:
        return all(support_of(e).contains(v, tol) for e, v in zip(problem.entries, self.to_vector()))
