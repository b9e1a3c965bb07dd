"""Hartigan's dip statistic for departure from unimodality."""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_samples, parallel_map, spawn_generators
from .errors import DegenerateDistribution, TooFewSamples

N_BOOT = 2000


@dataclass(frozen=True)
class DipResult:
    dip: float
    n: int
    modal_interval: Tuple[float, float]
    p_value: Optional[float] = None

    @property
    def floor(self):
        """Smallest attainable dip for this sample size, ``1/(2n)``."""
        return 0.5 / self.n

    def to_dict(self):
        out = {"dip": self.dip, "n": self.n, "modal_interval": list(self.modal_interval)}
        if self.p_value is not None:
            out["p_value"] = self.p_value
        return out


def _segment_excess(x, lo, hi, upper):
    """Largest gap between the ECDF and the hull chord over indices lo..hi (1-based).

    Measured in counts and never below one count (the jump at each sample).
    """
    if hi - lo <= 1 or x[hi] == x[lo]:
        return 1.0
    slope = (hi - lo) / (x[hi] - x[lo])
    idx = np.arange(lo, hi + 1)
    rise = (x[lo:hi + 1] - x[lo]) * slope
    if upper:
        t = rise - (idx - lo - 1)
    else:
        t = (idx - lo + 1) - rise
    return max(1.0, float(t.max()))


def _hull_pointers(xs, n):
    """Predecessor pointers of the convex minorant and successor pointers of
    the concave majorant of the ECDF points ``(x_j, j)``."""
    mn = [0] * (n + 1)
    mj = [0] * (n + 1)
    mn[1] = 1
    for j in range(2, n + 1):
        k = j - 1
        xj = xs[j]
        while k != 1:
            kk = mn[k]
            if (xj - xs[k]) * (k - kk) < (xs[k] - xs[kk]) * (j - k):
                break
            k = kk
        mn[j] = k
    mj[n] = n
    for j in range(n - 1, 0, -1):
        k = j + 1
        xj = xs[j]
        while k != n:
            kk = mj[k]
            if (xj - xs[k]) * (k - kk) < (xs[k] - xs[kk]) * (j - k):
                break
            k = kk
        mj[j] = k
    return mn, mj


def _dip_counts(sorted_x):
    """Hartigan & Hartigan (1985) dip of sorted data, in units of 1/(2n).

    Returns ``(2n * dip, low, high)`` with 0-based modal interval indices.
    """
    n = sorted_x.size
    xs = [0.0] + sorted_x.tolist()
    xa = np.concatenate(([0.0], sorted_x))
    mn, mj = _hull_pointers(xs, n)

    low, high = 1, n
    dip = 1.0
    while True:
        gcm = [0, high]
        while gcm[-1] > low:
            gcm.append(mn[gcm[-1]])
        l_gcm = len(gcm) - 1
        lcm = [0, low]
        while lcm[-1] < high:
            lcm.append(mj[lcm[-1]])
        l_lcm = len(lcm) - 1

        # largest vertical distance between majorant and minorant on [low, high]
        ig, ih = l_gcm, l_lcm
        if l_gcm != 2 or l_lcm != 2:
            d = 0.0
            ix, iv = l_gcm - 1, 2
            while True:
                g, c = gcm[ix], lcm[iv]
                if g > c:
                    g1 = gcm[ix + 1]
                    dx = (c - g1 + 1) - (xs[c] - xs[g1]) * (g - g1) / (xs[g] - xs[g1])
                    iv += 1
                    if dx >= d:
                        d, ig, ih = dx, ix + 1, iv - 1
                else:
                    c1 = lcm[iv - 1]
                    dx = (xs[g] - xs[c1]) * (c - c1) / (xs[c] - xs[c1]) - (g - c1 - 1)
                    ix -= 1
                    if dx >= d:
                        d, ig, ih = dx, ix + 1, iv
                ix = max(ix, 1)
                iv = min(iv, l_lcm)
                if gcm[ix] == lcm[iv]:
                    break
        else:
            d = 1.0
        if d < dip:
            break

        dip_l = max(
            (_segment_excess(xa, gcm[j + 1], gcm[j], upper=False) for j in range(ig, l_gcm)),
            default=0.0,
        )
        dip_u = max(
            (_segment_excess(xa, lcm[j], lcm[j + 1], upper=True) for j in range(ih, l_lcm)),
            default=0.0,
        )
        dip = max(dip, dip_l, dip_u)

        if low == gcm[ig] and high == lcm[ih]:
            break
        low, high = gcm[ig], lcm[ih]
    return dip, low - 1, high - 1


def dip_statistic(samples, p_value=False, n_boot=N_BOOT, seed=None, n_jobs=None):
    """Sup-distance between the ECDF and the closest unimodal distribution.

    Runs in O(n) after sorting. ``p_value=True`` adds a bootstrap p-value
    against uniform samples of the same size.
    """
    x = check_samples(samples)
    if x.size < 2:
        raise TooFewSamples(f"dip needs n >= 2, got {x.size}")
    x = np.sort(x)
    if x[0] == x[-1]:
        raise DegenerateDistribution("all values identical")
    counts, low, high = _dip_counts(x)
    dip = counts / (2 * x.size)
    p = dip_pvalue(dip, x.size, n_boot, seed, n_jobs) if p_value else None
    return DipResult(float(dip), int(x.size), (float(x[low]), float(x[high])), p)


def dip_pvalue(dip, n, n_boot=N_BOOT, seed=None, n_jobs=None):
    """Fraction of uniform(0, 1) samples of size ``n`` whose dip is at least ``dip``."""
    if n_boot < 1:
        raise ValueError("n_boot must be positive")

    def one(rng):
        u = np.sort(rng.random(n))
        return _dip_counts(u)[0] / (2 * n)

    boot = np.asarray(parallel_map(one, spawn_generators(seed, n_boot), n_jobs))
    return float(np.mean(boot >= dip))


class DipTest(BaseEstimator):
    """Dip statistic as an estimator: ``fit`` stores ``dip_`` and ``modal_interval_``."""

    def __init__(self, compute_pvalue=False, n_boot=N_BOOT, random_state=None, n_jobs=None):
        self.compute_pvalue = compute_pvalue
        self.n_boot = n_boot
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        res = dip_statistic(
            X, self.compute_pvalue, self.n_boot, self.random_state, self.n_jobs
        )
        self.result_ = res
        self.dip_ = res.dip
        self.modal_interval_ = res.modal_interval
        self.p_value_ = res.p_value
        self.n_samples_ = res.n
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "dip_")
        return self.dip_
