"""Distribution of frequency increments: heavy tails and asymmetry."""
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .moments import DensityEstimate, MomentSummary, kde, moments
from .series import SegmentedSeries

TAIL_LEVELS = (3, 5)


@dataclass(frozen=True, eq=False)
class IncrementReport:
    tau: float
    moments: MomentSummary
    density: DensityEstimate
    tail_exceedance: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "tau": self.tau,
            "moments": self.moments.to_dict(),
            "bandwidth": self.density.bandwidth,
            "tail_exceedance": {str(k): v for k, v in self.tail_exceedance.items()},
        }


def tail_exceedance(values, sigma, levels=TAIL_LEVELS):
    """Fraction of ``|v| > k * sigma`` for each level ``k``."""
    a = np.abs(np.asarray(values, dtype=np.float64))
    return {k: float(np.mean(a > k * sigma)) for k in levels}


def increment_report(series, tau=None, bandwidth=None):
    """Moments, density and tail fractions of lag-``tau`` increments.

    Increments are taken inside each segment and pooled; segments not longer
    than ``tau/dt`` are skipped.
    """
    if not isinstance(series, SegmentedSeries):
        series = SegmentedSeries.from_array(series)
    tau = series.dt if tau is None else tau
    inc = series.increments(tau).values
    summary = moments(inc)
    return IncrementReport(
        tau=float(tau),
        moments=summary,
        density=kde(inc, bandwidth),
        tail_exceedance=tail_exceedance(inc, summary.std),
    )


class IncrementAnalyzer(BaseEstimator):
    def __init__(self, tau=1.0, dt=1.0, bandwidth=None):
        self.tau = tau
        self.dt = dt
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        if not isinstance(X, SegmentedSeries):
            X = SegmentedSeries.from_array(X, dt=self.dt)
        report = increment_report(X, self.tau, self.bandwidth)
        self.report_ = report
        self.moments_ = report.moments
        self.skewness_ = report.moments.skewness
        self.kurtosis_ = report.moments.kurtosis
        self.tail_exceedance_ = report.tail_exceedance
        return self
