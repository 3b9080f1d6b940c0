"""Seeded property suite: the evaluation code checked against closed forms,
exact LP solutions and the brute-force oracle.

Every check draws its own instances from ``numpy.random.default_rng`` and
returns a :class:`PropertyResult`. ``tol_scale`` multiplies every tolerance;
a negative value makes every check fail, which is how the harness tests
itself.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .decision import (TIE_TOL, CandidateSet, build_candidates, choose_punishment, decide, discretize,
                       filter_candidates, guaranteed_objective, lower_utilities, maximal_decisions,
                       utility)
from .errors import EmptyAfterFilterError
from .harness import residual_pbox
from .lp import robust_counterpart, solve_exact
from .model import Realization, UncertainLp
from .oracle import (OracleConfig, brute_contamination_lower, brute_lower_expectation, brute_maximal,
                     brute_maximin, brute_upper_expectation, grid_error_bound, grid_extrema)
from .uncertainty import (DEFAULT_GRID, Cdf, Contamination, DiscreteDistribution, EvaluationPlan, Interval,
                          JointModel, PBox, Point, lower_expectation, upper_expectation, vectorized)

TOL = 1e-9
KINDS = ("interval", "contamination", "pbox")


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    max_deviation: float
    cases: int
    seconds: float = 0.0
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        out = f"{tag} {self.name}: cases={self.cases} max_deviation={self.max_deviation:.3e}"
        return out + (f" ({self.detail})" if self.detail else "")


class _Tracker:
    """Collects deviations against tolerances for one property."""

    def __init__(self, name: str, tol_scale: float):
        self.name = name
        self.scale = tol_scale
        self.worst = 0.0
        self.cases = 0
        self.failures = 0
        self.first = ""
        self.t0 = time.perf_counter()

    def check(self, deviation: float, tol: float, what: str = ""):
        """Record ``deviation`` (positive = violation size) against ``tol``."""
        self.worst = max(self.worst, deviation)
        if self.scale < 0 or not deviation <= tol * self.scale:
            self.failures += 1
            if not self.first:
                self.first = f"{what} deviation {deviation:.3e} > {tol * self.scale:.3e}"

    def flag(self, ok: bool, what: str):
        """Record a set-valued comparison (zero tolerance)."""
        if not ok or self.scale < 0:
            self.failures += 1
            if not self.first:
                self.first = what if not ok else f"{what} (corrupted tolerance)"

    def result(self) -> PropertyResult:
        detail = f"{self.failures} failing, first: {self.first}" if self.failures else ""
        return PropertyResult(self.name, self.failures == 0, self.worst, self.cases,
                              time.perf_counter() - self.t0, detail)


# --- random instances -------------------------------------------------------

def random_scalar(rng: np.random.Generator, kind: str, lo: float, hi: float):
    """A random model of the given kind supported on ``[lo, hi]``."""
    if kind == "point":
        return Point(float(rng.uniform(lo, hi)))
    if kind == "interval":
        return Interval(lo, hi)
    if kind == "contamination":
        k = int(rng.integers(1, 4))
        vals = np.sort(rng.uniform(lo, hi, k))
        p = rng.dirichlet(np.ones(k))
        return Contamination(DiscreteDistribution(tuple(vals), tuple(p / p.sum())),
                             float(rng.uniform(0.05, 0.5)), Interval(lo, hi))
    if kind == "pbox":
        if rng.uniform() < 0.5:
            # two linear CDFs, the upper one shifted left
            s = float(rng.uniform(0.0, 0.3 * (hi - lo)))
            upper = Cdf((lo, hi - s), (0.0, 1.0))
            lower = Cdf((lo + s, hi), (0.0, 1.0))
            return PBox(Interval(lo, hi), lower, upper)
        mid = 0.5 * (lo + hi)
        res = rng.uniform(lo - mid, hi - mid, int(rng.integers(5, 40)))
        return residual_pbox(mid, res, float(rng.uniform(0.05, 0.5)))
    raise ValueError(kind)


def random_test_function(rng: np.random.Generator, d: int):
    """Smooth bounded function of ``d`` coordinates and its per-coordinate Lipschitz constants."""
    a = rng.uniform(-2.0, 2.0, d)
    b = rng.uniform(0.5, 3.0, d)
    c = rng.uniform(0.0, 2 * math.pi, d)
    g = float(rng.uniform(-1.0, 1.0)) if d > 1 else 0.0

    @vectorized
    def f(points):
        v = np.atleast_2d(points)
        out = np.sum(a * np.sin(b * v + c), axis=1)
        if d > 1:
            out = out + g * np.sin(v.sum(axis=1))
        return out

    return f, np.abs(a * b) + abs(g)


def _negate(f):
    @vectorized
    def neg(points):
        return -np.asarray(f(points), dtype=float)
    return neg


def random_instance(rng: np.random.Generator, kind: str, max_uncertain: int = 3, max_candidates: int = 8):
    """Small uncertain LP with a few uncertain entries and random candidates."""
    n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    d = n + m * n + m
    uncertain = set(rng.choice(d, size=min(max_uncertain, d), replace=False).tolist())
    centers = np.concatenate([rng.uniform(1, 3, n), rng.uniform(0.5, 2, m * n), rng.uniform(3, 8, m)])
    entries = []
    for k in range(d):
        if k in uncertain:
            w = 0.6 * centers[k]
            entries.append(random_scalar(rng, kind, centers[k] - w * rng.uniform(0.2, 1),
                                         centers[k] + w * rng.uniform(0.2, 1)))
        else:
            entries.append(Point(float(centers[k])))
    problem = UncertainLp(entries[:n], [entries[n + i * n:n + (i + 1) * n] for i in range(m)],
                          entries[n + m * n:], [(0, 5)] * n)
    count = int(rng.integers(3, max_candidates + 1))
    return problem, CandidateSet.from_points(rng.uniform(0.2, 5, (count, n)))


def random_interval_problem(rng: np.random.Generator, point_share: float = 0.0) -> UncertainLp:
    """Interval problem with positive objective and constraint coefficients."""
    n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))

    def entry(c, w):
        if rng.uniform() < point_share:
            return Point(float(c))
        return Interval(float(c - w * rng.uniform(0, 1)), float(c + w * rng.uniform(0, 1)))

    u = [entry(rng.uniform(1, 3), 0.9) for _ in range(n)]
    y = [[entry(rng.uniform(0.5, 2), 0.4) for _ in range(n)] for _ in range(m)]
    z = [entry(rng.uniform(3, 8), 2.0) for _ in range(m)]
    return UncertainLp(u, y, z, [(0, 5)] * n)


# --- properties ---------------------------------------------------------------

def check_conjugacy_sandwich(seed: int = 0, count: int = 500, tol_scale: float = 1.0) -> PropertyResult:
    """Upper = -lower(-f) exactly; grid inf <= lower <= upper <= grid sup."""
    rng = np.random.default_rng([seed, 1])
    t = _Tracker("conjugacy-sandwich", tol_scale)
    G = 33
    for k in range(count):
        d = 1 + k % 2
        kinds = rng.choice(("point",) + KINDS, size=d)
        joint = JointModel(tuple(random_scalar(rng, str(kd), *sorted(rng.uniform(-2, 2, 2))) for kd in kinds))
        f, lip = random_test_function(rng, d)
        plan = EvaluationPlan.grid(DEFAULT_GRID, n_focal=8)
        low = lower_expectation(joint, f, plan)
        upp = upper_expectation(joint, f, plan)
        t.check(abs(upp - (-lower_expectation(joint, _negate(f), plan))), 0.0, "conjugacy")
        inf, sup = grid_extrema(joint, f, G)
        err = grid_error_bound([s.width for s in joint.supports()], lip, G)
        t.check(inf - low, TOL + err, "inf <= lower")
        t.check(low - upp, TOL, "lower <= upper")
        t.check(upp - sup, TOL + err, "upper <= sup")
        t.cases += 1
    return t.result()


def check_oracle_expectation(seed: int = 0, count: int = 200, tol_scale: float = 1.0) -> PropertyResult:
    """Main-path lower/upper expectations agree with the oracle within the grid bounds."""
    rng = np.random.default_rng([seed, 2])
    t = _Tracker("oracle-expectation", tol_scale)
    cfg = OracleConfig(seed=seed)
    for k in range(count):
        d = 1 + k % 2
        kinds = rng.choice(KINDS, size=d)
        joint = JointModel(tuple(random_scalar(rng, str(kd), *sorted(rng.uniform(-2, 2, 2))) for kd in kinds))
        f, lip = random_test_function(rng, d)
        widths = [s.width for s in joint.supports()]
        err = grid_error_bound(widths, lip, DEFAULT_GRID) + grid_error_bound(widths, lip, cfg.grid_per_axis)
        low = lower_expectation(joint, f, EvaluationPlan.grid(DEFAULT_GRID, n_focal=cfg.n_focal))
        upp = upper_expectation(joint, f, EvaluationPlan.grid(DEFAULT_GRID, n_focal=cfg.n_focal))
        blow = brute_lower_expectation(joint, f, cfg)
        bupp = brute_upper_expectation(joint, f, cfg)
        t.check(abs(low - blow), TOL + err, "lower vs oracle")
        t.check(abs(upp - bupp), TOL + err, "upper vs oracle")
        t.check(blow - bupp, TOL, "oracle lower <= oracle upper")
        t.cases += 1
    return t.result()


def check_precise_collapse(seed: int = 0, count: int = 100, tol_scale: float = 1.0) -> PropertyResult:
    """All-point problems: lower = upper = utility, maximin = maximal = precise argmax."""
    rng = np.random.default_rng([seed, 3])
    t = _Tracker("precise-collapse", tol_scale)
    while t.cases < count:
        problem = random_interval_problem(rng, point_share=1.0)
        try:
            out = decide(problem, grid_resolution=6)
        except EmptyAfterFilterError:
            continue  # no candidate with a positive objective; draw again
        r = Realization(np.array([e.value for e in problem.u]),
                        np.array([[e.value for e in row] for row in problem.y]),
                        np.array([e.value for e in problem.z]))
        exact = np.array([utility(x, r, out.punishment) for x in out.candidates.points])
        t.check(float(np.max(np.abs(out.lower - exact))), 0.0, "lower vs utility")
        t.check(float(np.max(np.abs(out.upper - exact))), 0.0, "upper vs utility")
        argmax = tuple(int(k) for k in np.flatnonzero(exact >= exact.max() - TIE_TOL))
        t.flag(out.maximin == argmax, f"maximin {out.maximin} != argmax {argmax}")
        t.flag(out.maximal == argmax, f"maximal {out.maximal} != argmax {argmax}")
        t.cases += 1
    return t.result()


def check_contamination_closed_form(seed: int = 0, count: int = 200, tol_scale: float = 1.0) -> PropertyResult:
    """Lower expectation under contamination vs (1-eps) E_P0 f + eps min f, and the oracle sweep."""
    rng = np.random.default_rng([seed, 4])
    t = _Tracker("contamination-closed-form", tol_scale)
    cfg = OracleConfig(seed=seed)
    for _ in range(count):
        lo, hi = sorted(rng.uniform(-2, 2, 2))
        model = random_scalar(rng, "contamination", lo, hi)
        f, lip = random_test_function(rng, 1)
        fine = np.linspace(lo, hi, 20001).reshape(-1, 1)
        true_min = float(np.min(f(fine)))
        base = math.fsum(p * float(f(np.array([[v]]))[0]) for v, p in model.center.atoms)
        closed = (1 - model.epsilon) * base + model.epsilon * true_min
        w = [hi - lo]
        err_fine = grid_error_bound(w, lip, 20001)
        low = lower_expectation(model, f, EvaluationPlan.grid(DEFAULT_GRID))
        t.check(abs(low - closed), TOL + model.epsilon * (grid_error_bound(w, lip, DEFAULT_GRID) + err_fine),
                "lower vs closed form")
        sweep = brute_contamination_lower(model, f, cfg)
        t.check(abs(sweep - closed), TOL + model.epsilon * (grid_error_bound(w, lip, cfg.grid_per_axis) + err_fine),
                "oracle sweep vs closed form")
        t.cases += 1
    return t.result()


def _convex_lipschitz(rng: np.random.Generator, nondecreasing: bool):
    """Convex function on [0, 1] with Lipschitz constant at most 1."""
    a = float(rng.uniform(0, 1))
    c = float(rng.uniform(0, 1)) if not nondecreasing else 0.0
    d = float(rng.uniform(-1, 1)) if not nondecreasing else 0.0

    @vectorized
    def f(points):
        v = np.atleast_2d(points)[:, 0]
        return a * np.abs(v - c) + (1 - a) * 0.5 * (v - d) ** 2

    return f


def check_pbox_refinement(seed: int = 0, count: int = 20, tol_scale: float = 1.0,
                          n_focals=(2, 4, 8, 16, 32)) -> PropertyResult:
    """Degenerate p-boxes: error against the precise expectation shrinks as nFocal doubles."""
    rng = np.random.default_rng([seed, 5])
    t = _Tracker("pbox-refinement", tol_scale)
    for k in range(count):
        if k % 2 == 0:
            # uniform on a random subinterval: linear quantile, any convex f
            a, b = sorted(rng.uniform(0, 1, 2))
            cdf = Cdf((a, b), (0.0, 1.0))
            f = _convex_lipschitz(rng, nondecreasing=False)
        else:
            # concave piecewise-linear CDF (decreasing density): convex quantile, convex nondecreasing f
            knots = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 3)), [1.0]])
            slopes = np.sort(rng.uniform(0.1, 1.0, 4))[::-1]
            ps = np.concatenate([[0.0], np.cumsum(slopes * np.diff(knots))])
            cdf = Cdf(tuple(knots), tuple(ps / ps[-1]))
            f = _convex_lipschitz(rng, nondecreasing=True)
        box = PBox.precise(cdf, Interval(0.0, 1.0))
        # reference expectation by a fine midpoint rule on the quantile function
        grid = (np.arange(200000) + 0.5) / 200000
        q = np.array([cdf.quantile(p) for p in grid[::100]])
        exact = float(np.mean(f(np.interp(grid, grid[::100], q).reshape(-1, 1))))
        errs = [abs(lower_expectation(box, f, EvaluationPlan.grid(DEFAULT_GRID, n_focal=N)) - exact)
                for N in n_focals]
        for e0, e1 in zip(errs, errs[1:]):
            t.check(e1 - e0, 1e-12, "error increased under refinement")
        t.check(errs[-1] - 1e-2, 0.0, f"error at nFocal={n_focals[-1]} above 1e-2")
        t.worst = max(t.worst, errs[-1])
        t.cases += 1
    return t.result()


def check_robust_counterpart(seed: int = 0, count: int = 100, tol_scale: float = 1.0) -> PropertyResult:
    """Interval problems: guaranteed objective of every maximin decision equals the robust optimum."""
    rng = np.random.default_rng([seed, 6])
    t = _Tracker("robust-counterpart", tol_scale)
    while t.cases < count:
        problem = random_interval_problem(rng)
        sol = solve_exact(robust_counterpart(problem))
        if not sol.optimal or not sol.value > 0:
            continue
        out = decide(problem, build_candidates(problem, 5, robust_vertices=True), compute_maximal=False)
        g = guaranteed_objective(problem, out.maximin_set)
        t.check(float(np.max(np.abs(g - sol.value))), TOL, "maximin guaranteed objective vs robust optimum")
        t.cases += 1
    return t.result()


def check_decision_agreement(seed: int = 0, count: int = 100, tol_scale: float = 1.0,
                             n_focal: int = 3) -> tuple[PropertyResult, PropertyResult]:
    """Maximin and maximal sets equal the oracle's; maximin is inside maximal."""
    rng = np.random.default_rng([seed, 7])
    agree = _Tracker("decision-oracle-agreement", tol_scale)
    nested = _Tracker("maximin-within-maximal", tol_scale)
    cfg = OracleConfig(seed=seed, n_focal=n_focal)
    k = 0
    while agree.cases < count:
        kind = KINDS[k % 3]
        problem, cands = random_instance(rng, kind)
        try:
            cands = filter_candidates(problem, cands)
        except EmptyAfterFilterError:
            continue
        k += 1
        L = choose_punishment(problem, cands)
        disc = discretize(problem.joint(), n_focal)
        low = lower_utilities(disc, cands.points, L)
        mm = [int(i) for i in np.flatnonzero(low >= low.max() - TIE_TOL)]
        maximal = maximal_decisions(problem, None, cands, L, n_focal=n_focal)
        mx = [i for i, p in enumerate(cands.points) if any(np.array_equal(p, v) for v in maximal)]
        bm = brute_maximin(problem, None, cands, L, cfg)
        bx = brute_maximal(problem, None, cands, L, cfg)
        agree.flag(mm == bm and mx == bx, f"{kind} instance {k}: maximin {mm} vs {bm}, maximal {mx} vs {bx}")
        nested.flag(set(mm) <= set(mx), f"{kind} instance {k}: maximin {mm} not within maximal {mx}")
        agree.cases += 1
        nested.cases += 1
    return agree.result(), nested.result()


def check_punishment_irrelevance(seed: int = 0, count: int = 50, tol_scale: float = 1.0) -> PropertyResult:
    """Interval/point problems: two valid punishments give the same maximin set."""
    rng = np.random.default_rng([seed, 8])
    t = _Tracker("punishment-irrelevance", tol_scale)
    while t.cases < count:
        problem = random_interval_problem(rng, point_share=0.3)
        try:
            cands = filter_candidates(problem, build_candidates(problem, 6))
        except EmptyAfterFilterError:
            continue
        L1 = choose_punishment(problem, cands)
        L2 = float(rng.uniform(0.05, 0.95)) * L1
        a = decide(problem, cands, L=L1, compute_maximal=False).maximin
        b = decide(problem, cands, L=L2, compute_maximal=False).maximin
        t.flag(a == b, f"maximin with L={L1!r}: {a}, with L={L2!r}: {b}")
        t.cases += 1
    return t.result()


def run_suite(seed: int = 0, scale: float = 1.0, tol_scale: float = 1.0) -> list[PropertyResult]:
    """Every property, with case counts multiplied by ``scale``."""
    def c(n):
        return max(1, int(round(n * scale)))
    agree, nested = check_decision_agreement(seed, c(100), tol_scale)
    return [
        check_conjugacy_sandwich(seed, c(500), tol_scale),
        check_oracle_expectation(seed, c(200), tol_scale),
        check_precise_collapse(seed, c(100), tol_scale),
        check_contamination_closed_form(seed, c(200), tol_scale),
        check_pbox_refinement(seed, c(20), tol_scale),
        check_robust_counterpart(seed, c(100), tol_scale),
        agree,
        nested,
        check_punishment_irrelevance(seed, c(50), tol_scale),
    ]
