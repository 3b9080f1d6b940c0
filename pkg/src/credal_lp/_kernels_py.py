"""Pure numpy implementation of the hot kernels.

Must stay numerically interchangeable with ``_kernels_c.pyx``: dot products
are accumulated left to right over coordinates in both backends.
"""

import numpy as np

# pattern bits: (I_x, I_x') = (1,1), (1,0), (0,1), (0,0)
B11, B10, B01, B00 = 1, 2, 4, 8
_PATTERNS = ((1, 1, B11), (1, 0, B10), (0, 1, B01), (0, 0, B00))


def _combine(a: int, b: int) -> int:
    out = 0
    for ia, ja, ba in _PATTERNS:
        if not a & ba:
            continue
        for ib, jb, bb in _PATTERNS:
            if b & bb:
                i, j = ia & ib, ja & jb
                out |= B11 if (i, j) == (1, 1) else B10 if (i, j) == (1, 0) else B01 if (i, j) == (0, 1) else B00
    return out


COMBINE = np.array([[_combine(a, b) for b in range(16)] for a in range(16)], dtype=np.intp)


def _seqdot(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise ``M @ x`` accumulated in coordinate order."""
    acc = np.zeros(M.shape[0])
    for j in range(M.shape[1]):
        acc = acc + M[:, j] * x[j]
    return acc


def seqdot(a, x) -> float:
    s = 0.0
    for j in range(len(x)):
        s = s + float(a[j]) * float(x[j])
    return s


def feasible_mass(X, Y, z, mass):
    """For every candidate ``x`` (row of ``X``): total mass of boxes with ``Y[r].x <= z[r]``."""
    X = np.ascontiguousarray(X, dtype=float)
    out = np.zeros(X.shape[0])
    for c in range(X.shape[0]):
        ok = _seqdot(Y, X[c]) <= z
        out[c] = _masked_sum(mass, ok)
    return out


def _masked_sum(mass, ok):
    s = 0.0
    for r in np.flatnonzero(ok):
        s += mass[r]
    return s


def _knapsack(w, x, a, b, lo, hi):
    """Vectorized over boxes: max ``w.y`` s.t. ``a <= y <= b``, ``lo <= y.x <= hi``.

    ``w`` and ``x`` (with ``x >= 0``) are shared; ``a``, ``b`` have shape
    ``(R, n)`` and ``lo``, ``hi`` shape ``(R,)``. Infeasible boxes get -inf.
    """
    R, n = a.shape
    s_min = _seqdot(a, x)
    s_max = _seqdot(b, x)
    up = w > 0
    y0 = np.where(up, b, a)
    s0 = _seqdot(y0, x)
    val = _seqdot(y0, w)
    active = x > 0

    # too large: lower coordinates sitting at their upper bound, cheapest loss first
    dec = up & active
    ratio = np.where(dec, w / np.where(active, x, 1.0), np.inf)
    order = np.argsort(ratio, kind="stable")
    need = s0 - hi
    for j in order:
        if not dec[j]:
            continue
        cap = (b[:, j] - a[:, j]) * x[j]
        take = np.clip(need, 0.0, cap)
        val = val - ratio[j] * take
        need = need - take

    # too small: raise coordinates sitting at their lower bound
    inc = (~up) & active
    ratio = np.where(inc, -w / np.where(active, x, 1.0), np.inf)
    order = np.argsort(ratio, kind="stable")
    need = lo - s0
    for j in order:
        if not inc[j]:
            continue
        cap = (b[:, j] - a[:, j]) * x[j]
        take = np.clip(need, 0.0, cap)
        val = val - ratio[j] * take
        need = need - take

    infeasible = (lo > hi) | (s_min > hi) | (s_max < lo)
    return np.where(infeasible, -np.inf, val)


def _mixed(x, xp, ylo, yhi, zlo, zhi):
    """Boxes where ``y.x <= z < y.xp`` is attainable (exact, strict)."""
    R = len(zlo)
    t_a = _knapsack(xp, x, ylo, yhi, np.full(R, -np.inf), np.minimum(zhi, zlo)) - zlo
    t_b = _knapsack(xp - x, x, ylo, yhi, zlo, zhi)
    return np.maximum(t_a, t_b) > 0.0


def row_patterns(x, xp, ylo, yhi, zlo, zhi):
    """Bitmask of achievable ``(I_x, I_x')`` patterns for each box of one row."""
    lo_x, lo_p = _seqdot(ylo, x), _seqdot(ylo, xp)
    hi_x, hi_p = _seqdot(yhi, x), _seqdot(yhi, xp)
    masks = np.zeros(len(zlo), dtype=np.intp)
    masks |= np.where((lo_x <= zhi) & (lo_p <= zhi), B11, 0)
    masks |= np.where((hi_x > zlo) & (hi_p > zlo), B00, 0)
    # patterns seen at the two extreme corners are always achievable
    for sx, sp, zz in ((lo_x, lo_p, zhi), (hi_x, hi_p, zlo)):
        fx, fp = sx <= zz, sp <= zz
        masks |= np.where(fx & ~fp, B10, 0) | np.where(~fx & fp, B01, 0)
    masks |= np.where(_mixed(x, xp, ylo, yhi, zlo, zhi), B10, 0)
    masks |= np.where(_mixed(xp, x, ylo, yhi, zlo, zhi), B01, 0)
    return masks


def pattern_weights(x, xp, ylo, yhi, zlo, zhi, rmass, row_start):
    """Mass of each achievable-pattern set over joint constraint boxes."""
    dist = np.zeros(16)
    dist[B11] = 1.0
    for i in range(len(row_start) - 1):
        s, e = row_start[i], row_start[i + 1]
        masks = row_patterns(x, xp, ylo[s:e], yhi[s:e], zlo[s:e], zhi[s:e])
        hist = np.zeros(16)
        for r in range(e - s):
            hist[masks[r]] += rmass[s + r]
        new = np.zeros(16)
        for a in range(1, 16):
            if dist[a] == 0.0:
                continue
            for b in range(1, 16):
                if hist[b] != 0.0:
                    new[COMBINE[a, b]] += dist[a] * hist[b]
        dist = new
    return dist


def upper_diff_pairs(X, pairs, ylo, yhi, zlo, zhi, rmass, row_start, ulo, uhi, umass, L):
    """Upper expectation of ``G_x - G_x'`` for each index pair ``(x, x')``."""
    X = np.ascontiguousarray(X, dtype=float)
    out = np.empty(len(pairs))
    for k, (ci, cj) in enumerate(pairs):
        x, xp = X[ci], X[cj]
        dist = pattern_weights(x, xp, ylo, yhi, zlo, zhi, rmass, row_start)
        d = x - xp
        v = np.empty((len(umass), 4))
        v[:, 0] = _seqdot(np.where(d > 0, uhi, ulo), d)
        v[:, 1] = _seqdot(uhi, x) - L
        v[:, 2] = L - _seqdot(ulo, xp)
        v[:, 3] = 0.0
        total = 0.0
        for S in range(1, 16):
            if dist[S] == 0.0:
                continue
            cols = [p for p in range(4) if S & (1 << p)]
            best = v[:, cols].max(axis=1)
            total += dist[S] * float(np.dot(umass, best))
        out[k] = total
    return out
