"""Time-reversal asymmetry test against Fourier phase-randomised surrogates."""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_samples, parallel_map, spawn_generators
from .errors import DegenerateDistribution, LagExceedsSeries, TooFewSamples
from .series import FrequencySeries, SegmentedSeries, _lag_steps

MAX_LAG = 60.0
N_SURROGATES = 19
MIN_SURROGATE_LENGTH = 16


def _as_series(series):
    if isinstance(series, SegmentedSeries):
        return series.longest()
    if isinstance(series, FrequencySeries):
        return series
    return FrequencySeries(check_samples(series, min_samples=1))


@dataclass(frozen=True, eq=False)
class LinearityResult:
    lags: np.ndarray
    lt_data: np.ndarray
    lt_surrogate_mean: np.ndarray
    rmse: float
    n_surrogates: int

    def to_dict(self):
        return {"rmse": self.rmse, "n_surrogates": self.n_surrogates, "max_lag": float(self.lags[-1])}

    def curves(self):
        """Rows of (lag, LT data, mean LT surrogates) for CSV output."""
        return np.column_stack([self.lags, self.lt_data, self.lt_surrogate_mean])


def _lt_values(x, max_steps):
    x = x - x.mean()
    out = np.empty(max_steps)
    buf = np.empty(x.size - 1)
    for k in range(1, max_steps + 1):
        d = np.subtract(x[:-k], x[k:], out=buf[: x.size - k])
        d2 = np.dot(d, d)
        if d2 == 0.0:
            raise DegenerateDistribution(f"increments vanish at lag {k}")
        out[k - 1] = np.dot(d * d, d) / d2
    return out


def lt_curve(series, max_lag=MAX_LAG):
    """``LT(tau) = <(f(t) - f(t+tau))**3> / <(f(t) - f(t+tau))**2>`` for tau = dt..max_lag.

    Returns ``(lags, lt)`` with lags in seconds.
    """
    s = _as_series(series)
    k_max = _lag_steps(max_lag, s.dt)
    if max_lag >= len(s) * s.dt / 4:
        raise LagExceedsSeries(f"max_lag={max_lag} s needs a series longer than {4 * k_max} samples")
    lags = s.dt * np.arange(1, k_max + 1)
    return lags, _lt_values(s.values, k_max)


@dataclass(frozen=True, eq=False)
class SpectrumRepresentation:
    """One-sided Fourier amplitudes and phases of a mean-removed real series.

    The negative-frequency half is implied by Hermitian symmetry.
    """

    amplitudes: np.ndarray
    phases: np.ndarray
    n: int
    mean: float = 0.0

    @classmethod
    def from_values(cls, values):
        x = np.asarray(values, dtype=np.float64)
        mean = x.mean()
        spec = np.fft.rfft(x - mean)
        return cls(np.abs(spec), np.angle(spec), x.size, float(mean))

    def to_values(self):
        return np.fft.irfft(self.amplitudes * np.exp(1j * self.phases), self.n) + self.mean

    def randomized(self, rng):
        """Copy with uniform random phases; DC and Nyquist terms stay real."""
        phases = self.phases.copy()
        stop = self.amplitudes.size - 1 if self.n % 2 == 0 else self.amplitudes.size
        phases[1:stop] = rng.uniform(0.0, 2.0 * np.pi, stop - 1)
        return SpectrumRepresentation(self.amplitudes, phases, self.n, self.mean)


def phase_surrogate(series, seed=None):
    """Surrogate with the amplitude spectrum and mean of ``series`` but random phases."""
    s = _as_series(series)
    if len(s) < MIN_SURROGATE_LENGTH:
        raise TooFewSamples(f"surrogates need at least {MIN_SURROGATE_LENGTH} samples")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    spec = SpectrumRepresentation.from_values(s.values).randomized(rng)
    return FrequencySeries(spec.to_values(), s.start_epoch, s.dt, s.region)


def lt_distance(series, surrogates, max_lag=MAX_LAG):
    """RMSE between the LT curve of ``series`` and the mean LT curve of ``surrogates``."""
    lags, lt_data = lt_curve(series, max_lag)
    curves = [lt_curve(sur, max_lag)[1] for sur in surrogates]
    if not curves:
        raise ValueError("at least one surrogate is required")
    mean_curve = np.mean(curves, axis=0)
    rmse = float(np.sqrt(np.mean((lt_data - mean_curve) ** 2)))
    return LinearityResult(lags, lt_data, mean_curve, rmse, len(curves))


def lt_rmse(series, n_surrogates=N_SURROGATES, max_lag=MAX_LAG, seed=None, n_jobs=None):
    """Distance in LT between a series and an ensemble of phase surrogates.

    Works on the longest gap-free segment. Each surrogate draws from its own
    child seed, so results do not depend on ``n_jobs``.
    """
    if n_surrogates < 1:
        raise ValueError("n_surrogates must be at least 1")
    s = _as_series(series)
    lags, lt_data = lt_curve(s, max_lag)
    if len(s) < MIN_SURROGATE_LENGTH:
        raise TooFewSamples(f"surrogates need at least {MIN_SURROGATE_LENGTH} samples")
    spec = SpectrumRepresentation.from_values(s.values)
    k_max = lags.size

    def one(rng):
        return _lt_values(spec.randomized(rng).to_values(), k_max)

    curves = parallel_map(one, spawn_generators(seed, n_surrogates), n_jobs)
    mean_curve = np.mean(curves, axis=0)
    rmse = float(np.sqrt(np.mean((lt_data - mean_curve) ** 2)))
    return LinearityResult(lags, lt_data, mean_curve, rmse, n_surrogates)


class PhaseSurrogate(TransformerMixin, BaseEstimator):
    """Transformer returning one phase-randomised surrogate of a 1-D series."""

    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return phase_surrogate(check_samples(X), self.random_state).values


class LinearityTest(BaseEstimator):
    def __init__(self, n_surrogates=N_SURROGATES, max_lag=MAX_LAG, dt=1.0, random_state=None, n_jobs=None):
        self.n_surrogates = n_surrogates
        self.max_lag = max_lag
        self.dt = dt
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if not isinstance(X, (SegmentedSeries, FrequencySeries)):
            X = FrequencySeries(check_samples(X), dt=self.dt)
        res = lt_rmse(X, self.n_surrogates, self.max_lag, self.random_state, self.n_jobs)
        self.result_ = res
        self.lags_ = res.lags
        self.lt_ = res.lt_data
        self.lt_surrogate_ = res.lt_surrogate_mean
        self.rmse_ = res.rmse
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "rmse_")
        return self.rmse_
