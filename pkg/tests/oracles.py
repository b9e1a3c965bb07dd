"""Slow, obviously-correct reference implementations used by the tests.

None of these import from ``gridfreq``; they are written from the textbook
definitions with loops, extended precision or brute force so that they
share no code path with the fast versions under test.
"""
import math

import numpy as np


def moments_oracle(x):
    """Two-pass population moments in long double around a correctly rounded mean."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    mean = math.fsum(x.tolist()) / n
    d = x.astype(np.longdouble) - np.longdouble(mean)
    # fold the residual mean back in, still in long double
    d -= d.sum() / n
    d2 = d * d
    m2 = d2.sum() / n
    m3 = (d2 * d).sum() / n
    m4 = (d2 * d2).sum() / n
    return {
        "mean": float(np.longdouble(mean) + (x.astype(np.longdouble) - np.longdouble(mean)).sum() / n),
        "variance": float(m2),
        "skewness": float(m3 / m2**1.5),
        "kurtosis": float(m4 / (m2 * m2)),
    }


def kde_oracle(samples, grid, bandwidth):
    """Gaussian KDE by an explicit double loop over grid points."""
    samples = np.asarray(samples, dtype=np.float64)
    out = np.empty(len(grid))
    norm = 1.0 / (len(samples) * bandwidth * math.sqrt(2 * math.pi))
    for i, g in enumerate(grid):
        u = (g - samples) / bandwidth
        out[i] = norm * math.fsum(np.exp(-0.5 * u * u).tolist())
    return out


# ---------------------------------------------------------------- dip

def _lower_hull_vertices(x, y):
    """Indices of the greatest convex minorant of points (x, y), x increasing.

    A point is a vertex when every chord arriving from the left is strictly
    shallower than every chord leaving to the right. O(m^2).
    """
    m = len(x)
    verts = []
    for j in range(m):
        if j == 0 or j == m - 1:
            verts.append(j)
            continue
        left = np.max((y[j] - y[:j]) / (x[j] - x[:j]))
        right = np.min((y[j + 1:] - y[j]) / (x[j + 1:] - x[j]))
        if left < right:
            verts.append(j)
    return verts


def _upper_hull_vertices(x, y):
    m = len(x)
    verts = []
    for j in range(m):
        if j == 0 or j == m - 1:
            verts.append(j)
            continue
        left = np.min((y[j] - y[:j]) / (x[j] - x[:j]))
        right = np.max((y[j + 1:] - y[j]) / (x[j + 1:] - x[j]))
        if left > right:
            verts.append(j)
    return verts


def dip_oracle(samples):
    """Hartigan's dip by direct hull construction on each candidate modal interval.

    Works on ECDF counts: the minorant is built on (x_i, i - 1) and the
    majorant on (x_i, i), i = 1..n, both restricted to the current interval
    [low, high]. Hull values are evaluated with linear interpolation at every
    sample instead of walking vertex pointers. Requires distinct samples.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if np.any(np.diff(x) == 0):
        raise ValueError("oracle requires distinct samples")
    idx = np.arange(1, n + 1, dtype=np.float64)
    low, high = 1, n
    dip = 1.0
    while True:
        sl = slice(low - 1, high)
        xs, ii = x[sl], idx[sl]
        g = [low + v for v in _lower_hull_vertices(xs, ii - 1)]
        c = [low + v for v in _upper_hull_vertices(xs, ii)]
        gcm = np.interp(xs, x[np.array(g) - 1], np.array(g, dtype=float) - 1)
        lcm = np.interp(xs, x[np.array(c) - 1], np.array(c, dtype=float))
        gap = lcm - gcm

        if len(g) == 2 and len(c) == 2:
            d = 1.0
            new_low, new_high = low, high
        else:
            # rightmost vertex (of either hull) where the hulls are furthest apart
            cand = sorted(set(g[1:-1]) | set(c[1:-1])) or [low]
            best = max(gap[k - low] for k in cand)
            star = max(k for k in cand if gap[k - low] == best)
            d = best
            new_low = max(v for v in g if v <= star)
            new_high = min(v for v in c if v >= star)
        if d < dip:
            break

        dip_l = 0.0
        if new_low > low:
            k = np.arange(low, new_low + 1)
            dip_l = max(1.0, float(np.max(k - gcm[k - low])))
        dip_u = 0.0
        if new_high < high:
            k = np.arange(new_high, high + 1)
            dip_u = max(1.0, float(np.max(lcm[k - low] - (k - 1))))
        dip = max(dip, dip_l, dip_u)

        if new_low == low and new_high == high:
            break
        low, high = new_low, new_high
    return dip / (2 * n)


# ---------------------------------------------------------------- increments / LT

def increments_oracle(x, k):
    return np.array([x[t + k] - x[t] for t in range(len(x) - k)])


def lt_oracle(x, max_steps):
    """LT(k) from explicit increment lists, mean removed first."""
    x = np.asarray(x, dtype=np.float64)
    x = x - math.fsum(x.tolist()) / x.size
    out = []
    for k in range(1, max_steps + 1):
        d = [x[t] - x[t + k] for t in range(x.size - k)]
        out.append(math.fsum(v**3 for v in d) / math.fsum(v * v for v in d))
    return np.array(out)


# ---------------------------------------------------------------- ACF / DFA

def acf_oracle(segments, max_steps):
    """Pooled biased ACF: within-segment lag products over pooled variance sum."""
    pooled = np.concatenate(segments)
    mean = math.fsum(pooled.tolist()) / pooled.size
    sums = np.zeros(max_steps + 1)
    for seg in segments:
        y = np.asarray(seg, dtype=np.float64) - mean
        for k in range(min(max_steps, y.size - 1) + 1):
            sums[k] += math.fsum((y[: y.size - k] * y[k:]).tolist())
    return sums / sums[0]


def dfa_fluctuation_oracle(x, window, order=1):
    """F(n) for a single segment with windows cut from both ends, via np.polyfit."""
    x = np.asarray(x, dtype=np.float64)
    profile = np.cumsum(x - x.mean())
    n_win = profile.size // window
    resid_sq = []
    t = np.arange(window, dtype=np.float64)
    for start in [i * window for i in range(n_win)] + [
        profile.size - (i + 1) * window for i in range(n_win)
    ]:
        block = profile[start:start + window]
        coef = np.polyfit(t, block, order)
        resid_sq.extend((block - np.polyval(coef, t)) ** 2)
    return math.sqrt(math.fsum(resid_sq) / len(resid_sq))


def ar1(n, phi, rng, innovations=None):
    """AR(1) by an explicit loop, started at zero."""
    e = rng.standard_normal(n) if innovations is None else innovations
    out = np.empty(n)
    prev = 0.0
    for t in range(n):
        prev = phi * prev + e[t]
        out[t] = prev
    return out
