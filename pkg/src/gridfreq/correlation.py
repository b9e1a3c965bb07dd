"""Autocorrelation, exponential decay fits and detrended fluctuation analysis."""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_samples
from .errors import (
    DegenerateDistribution,
    FitDiverged,
    InsufficientScales,
    LagExceedsSeries,
)
from .series import FrequencySeries, SegmentedSeries, _lag_steps

ACF_MAX_LAG = 6 * 3600.0
FIT_WINDOW = 3600.0
DFA_MIN_SCALE = 5
DFA_MAX_SCALE = 10**6
DFA_N_SCALES = 24


def _as_segmented(series, dt=1.0):
    if isinstance(series, SegmentedSeries):
        return series
    if isinstance(series, FrequencySeries):
        return SegmentedSeries((series,))
    return SegmentedSeries.from_array(series, dt=dt)


@dataclass(frozen=True, eq=False)
class AcfResult:
    lags: np.ndarray
    acf: np.ndarray
    n_effective: np.ndarray

    def table(self):
        return np.column_stack([self.lags, self.acf])


def _autocov_sums(y, k_max):
    """``sum_t y[t] * y[t+k]`` for k = 0..k_max via zero-padded FFT."""
    size = 1 << int(math.ceil(math.log2(y.size + k_max + 1)))
    spec = np.fft.rfft(y, size)
    full = np.fft.irfft(spec * np.conj(spec), size)
    out = np.zeros(k_max + 1)
    m = min(k_max, y.size - 1)
    out[: m + 1] = full[: m + 1]
    return out


def acf(series, max_lag=ACF_MAX_LAG):
    """Autocorrelation for lags 0..max_lag, pooled over segments.

    Lag products are summed within segments only and normalised by the
    pooled variance and total sample count, which keeps ``|acf| <= 1``.
    """
    seg = _as_segmented(series)
    dt = seg.dt
    k_max = _lag_steps(max_lag, dt)
    if len(seg.longest()) < 4 * k_max:
        raise LagExceedsSeries(
            f"max_lag={max_lag} s needs a segment of at least {4 * k_max} samples"
        )
    mean = seg.pooled_values().mean()
    sums = np.zeros(k_max + 1)
    n_eff = np.zeros(k_max + 1, dtype=np.int64)
    lag_steps = np.arange(k_max + 1)
    for s in seg:
        sums += _autocov_sums(s.values - mean, k_max)
        n_eff += np.clip(len(s) - lag_steps, 0, None)
    if not sums[0] > 0:
        raise DegenerateDistribution("zero variance")
    values = sums / sums[0]
    values[0] = 1.0
    return AcfResult(dt * lag_steps, np.clip(values, -1.0, 1.0), n_eff)


@dataclass(frozen=True)
class ExpDecayFit:
    decay: float
    fit_range: Tuple[float, float]
    r_squared: float

    def to_dict(self):
        return {"lambda": self.decay, "fit_range": list(self.fit_range), "r_squared": self.r_squared}


def fit_exp_decay(acf_result, fit_window=FIT_WINDOW):
    """Least-squares fit of ``exp(-lambda * tau)`` to the ACF on ``[dt, fit_window]``.

    The fit is done on the raw ACF, not its logarithm, so negative values
    at long lags are fine.
    """
    lags = np.asarray(acf_result.lags)
    values = np.asarray(acf_result.acf)
    if fit_window > lags[-1] * (1 + 1e-12):
        raise LagExceedsSeries(f"fit_window={fit_window} s exceeds the ACF range {lags[-1]} s")
    mask = (lags > 0) & (lags <= fit_window * (1 + 1e-12))
    tau, y = lags[mask], values[mask]
    if tau.size < 1:
        raise LagExceedsSeries("no lags inside the fit window")

    first = y[0]
    guess = -math.log(first) / tau[0] if 0 < first < 1 else 1.0 / fit_window

    def resid(p):
        return y - np.exp(-math.exp(p[0]) * tau)

    def jac(p):
        lam = math.exp(p[0])
        return (tau * lam * np.exp(-lam * tau))[:, None]

    sol = least_squares(resid, [math.log(guess)], jac=jac, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=500)
    lam = math.exp(sol.x[0])
    diag = {"status": int(sol.status), "message": sol.message, "nfev": int(sol.nfev), "lambda": lam}
    # a model that is ~0 or ~1 across the whole window means the optimiser
    # ran off along a flat direction
    if sol.status <= 0 or not math.isfinite(lam) or lam * tau[0] > 30 or lam * tau[-1] < 1e-8:
        raise FitDiverged("exponential fit did not converge", diag)

    ss_res = float(np.sum(resid(sol.x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return ExpDecayFit(float(lam), (float(tau[0]), float(tau[-1])), float(r2))


@dataclass(frozen=True, eq=False)
class DfaResult:
    window_sizes: np.ndarray
    fluctuation: np.ndarray
    slope: float
    intercept: float
    fit_range: Tuple[int, int]
    order: int = 1

    @property
    def hurst(self):
        """DFA slope minus one: the profile integrates the signal once more."""
        return self.slope - 1.0

    def to_dict(self):
        return {
            "slope": self.slope,
            "hurst": self.hurst,
            "order": self.order,
            "fit_range": list(self.fit_range),
            "n_scales": int(self.window_sizes.size),
        }

    def table(self):
        return [(int(w), float(f)) for w, f in zip(self.window_sizes, self.fluctuation)]


def default_windows(longest, min_scale=DFA_MIN_SCALE, max_scale=None, n_scales=DFA_N_SCALES):
    """Log-spaced integer window sizes from ``min_scale`` to ``min(1e6, longest/4)``."""
    cap = min(DFA_MAX_SCALE, longest // 4)
    top = cap if max_scale is None else min(int(max_scale), cap)
    if top <= min_scale:
        return np.array([min_scale], dtype=np.int64) if top == min_scale else np.empty(0, np.int64)
    raw = np.logspace(math.log10(min_scale), math.log10(top), n_scales)
    return np.unique(np.round(raw).astype(np.int64))


def _basis(size, order):
    t = np.arange(size, dtype=np.float64)
    t = (t - t.mean()) / max(size - 1, 1)
    q, _ = np.linalg.qr(np.vander(t, order + 1))
    return q


def _fluctuation(profiles, size, order):
    q = _basis(size, order)
    total, count = 0.0, 0
    for prof in profiles:
        n_win = prof.size // size
        if n_win == 0:
            continue
        for block in (prof[: n_win * size], prof[prof.size - n_win * size:]):
            y = block.reshape(n_win, size)
            resid = y - (y @ q) @ q.T
            total += float(np.einsum("ij,ij->", resid, resid))
            count += resid.size
    return math.sqrt(total / count) if count else math.nan


def dfa(series, windows=None, order=1, fit_range=None, dt=1.0):
    """Detrended fluctuation analysis of a (segmented) series.

    Each segment is mean-removed and integrated into a profile, which is cut
    into non-overlapping windows from both ends. ``F(n)`` is the RMS residual
    after a least-squares polynomial detrend of degree ``order`` inside each
    window. The slope of ``log F`` against ``log n`` over ``fit_range``
    (default: every window size) gives the scaling exponent.
    """
    seg = _as_segmented(series, dt)
    longest = len(seg.longest())
    if windows is None:
        windows = default_windows(longest)
    windows = np.asarray(windows, dtype=np.int64)
    if windows.size and np.any(np.diff(windows) <= 0):
        raise ValueError("window sizes must be strictly increasing")
    if windows.size and windows[0] < order + 2:
        raise ValueError(f"smallest window must be at least order + 2 = {order + 2}")
    windows = windows[windows <= longest // 4]
    if windows.size < 2:
        raise InsufficientScales("fewer than two usable window sizes")

    profiles = [np.cumsum(s.values - s.values.mean()) for s in seg if len(s) >= windows[0]]
    fluct = np.array([_fluctuation(profiles, int(w), order) for w in windows])
    if not np.all(fluct > 0):
        raise DegenerateDistribution("fluctuation function vanishes")

    lo, hi = (windows[0], windows[-1]) if fit_range is None else fit_range
    sel = (windows >= lo) & (windows <= hi)
    if sel.sum() < 2:
        raise InsufficientScales("fewer than two window sizes inside the fit range")
    slope, intercept = np.polyfit(np.log(windows[sel]), np.log(fluct[sel]), 1)
    return DfaResult(
        windows,
        fluct,
        float(slope),
        float(intercept),
        (int(windows[sel][0]), int(windows[sel][-1])),
        int(order),
    )


class AutocorrelationDecay(BaseEstimator):
    """Fits ``exp(-lambda * tau)`` to the ACF; the decay constant ends up in ``decay_``."""

    def __init__(self, max_lag=ACF_MAX_LAG, fit_window=FIT_WINDOW, dt=1.0):
        self.max_lag = max_lag
        self.fit_window = fit_window
        self.dt = dt

    def fit(self, X, y=None):
        seg = _as_segmented(X if not isinstance(X, (list, np.ndarray)) else check_samples(X), self.dt)
        self.acf_ = acf(seg, self.max_lag)
        self.fit_ = fit_exp_decay(self.acf_, self.fit_window)
        self.decay_ = self.fit_.decay
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "fit_")
        return self.fit_.r_squared


class DFA(BaseEstimator):
    def __init__(self, windows=None, order=1, fit_range=None, dt=1.0):
        self.windows = windows
        self.order = order
        self.fit_range = fit_range
        self.dt = dt

    def fit(self, X, y=None):
        res = dfa(X, self.windows, self.order, self.fit_range, self.dt)
        self.result_ = res
        self.window_sizes_ = res.window_sizes
        self.fluctuation_ = res.fluctuation
        self.slope_ = res.slope
        self.hurst_ = res.hurst
        return self
