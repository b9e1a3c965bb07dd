"""Synthetic trajectories from ``df/dt = g(f) + noise`` with linear or deadband drift.

All generators are pure functions of their :class:`ModelConfig`; the seed
feeds a ``numpy.random.SeedSequence`` so ensembles can spawn independent,
reproducible child streams.
"""
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from .errors import UnstableDiscretization
from .series import FrequencySeries


class ModelKind(str, Enum):
    OU = "ou"
    FBM = "fbm"
    FBM_OU = "fbm_ou"
    DEADBAND_OU = "deadband_ou"
    BIMODAL_MIXTURE = "bimodal_mixture"


@dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind = ModelKind.OU
    theta: float = 0.01
    mu: float = 50.0
    sigma: float = 0.002
    hurst_h: float = 0.5
    deadband_halfwidth: float = 0.0
    centers: tuple = ()
    weights: tuple = ()
    widths: tuple = ()
    n: int = 86_400
    dt: float = 1.0
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        for name in ("centers", "weights", "widths"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kind is ModelKind.BIMODAL_MIXTURE:
            k = len(self.centers)
            if k == 0 or len(self.weights) != k or len(self.widths) != k:
                raise ValueError("mixture needs matching centers, weights and widths")
            if abs(sum(self.weights) - 1.0) > 1e-9 or min(self.weights) < 0:
                raise ValueError("mixture weights must be non-negative and sum to 1")
            if min(self.widths) <= 0:
                raise ValueError("mixture widths must be positive")
            return
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.hurst_h < 1:
            raise ValueError("hurst_h must lie in (0, 1)")
        if self.kind is not ModelKind.FBM and not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.deadband_halfwidth < 0:
            raise ValueError("deadband_halfwidth must be non-negative")

    def with_seed(self, seed):
        return replace(self, seed=seed)


def replicate_seeds(seed, n_replicates):
    """Child seeds for an ensemble; identical regardless of execution order."""
    children = np.random.SeedSequence(seed).spawn(n_replicates)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _rng(config):
    return np.random.default_rng(np.random.SeedSequence(config.seed))


def _check_stability(config):
    if config.theta * config.dt >= 2:
        raise UnstableDiscretization(
            f"theta*dt = {config.theta * config.dt} >= 2: Euler scheme is unstable"
        )


def _noise_scale(config):
    h = config.hurst_h
    return config.sigma * (math.sqrt(config.dt) if h == 0.5 else config.dt ** h)


def _stationary_std(config):
    # continuous-time stationary variance, sigma^2 Gamma(2H+1) / (2 theta^2H)
    h = config.hurst_h
    var = config.sigma**2 * math.gamma(2 * h + 1) / (2 * config.theta ** (2 * h))
    return math.sqrt(var)


def _series(values, config):
    return FrequencySeries(values, 0.0, config.dt, config.kind.value)


def fgn_autocovariance(k, hurst):
    k = np.abs(np.asarray(k, dtype=np.float64))
    h2 = 2 * hurst
    return 0.5 * ((k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)


def _hosking(n, hurst, rng):
    """Durbin-Levinson recursion; O(n^2), used only when embedding fails."""
    gamma = fgn_autocovariance(np.arange(n), hurst)
    out = np.empty(n)
    z = rng.standard_normal(n)
    phi = np.zeros(0)
    var = gamma[0]
    out[0] = math.sqrt(var) * z[0]
    for t in range(1, n):
        k = (gamma[t] - np.dot(phi, gamma[1:t][::-1])) / var
        phi = np.concatenate((phi - k * phi[::-1], [k]))
        var *= 1 - k * k
        out[t] = np.dot(phi, out[:t][::-1]) + math.sqrt(var) * z[t]
    return out


def fgn(n, hurst, rng):
    """Unit-variance fractional Gaussian noise of length ``n``.

    Uses Davies-Harte circulant embedding padded to a power of two; for
    ``hurst == 0.5`` the draws are plain standard normals.
    """
    if hurst == 0.5:
        return rng.standard_normal(n)
    m = 1 << max(1, int(math.ceil(math.log2(max(n, 2)))))
    gamma = fgn_autocovariance(np.arange(m + 1), hurst)
    row = np.concatenate((gamma, gamma[-2:0:-1]))
    eig = np.fft.fft(row).real
    if eig.min() < -1e-10 * eig.max():
        warnings.warn("circulant embedding is not positive definite; using Hosking recursion")
        return _hosking(n, hurst, rng)
    eig = np.clip(eig, 0.0, None)
    z = rng.standard_normal(2 * m) + 1j * rng.standard_normal(2 * m)
    w = np.fft.fft(np.sqrt(eig / (2 * m)) * z)
    return w.real[:n]


def _linear_euler(y0, noise, theta, dt):
    """``y[k] = (1 - theta*dt) * y[k-1] + noise[k-1]`` starting from ``y0``."""
    phi = 1.0 - theta * dt
    tail = lfilter([1.0], [1.0, -phi], noise, zi=[phi * y0])[0]
    return np.concatenate(([y0], tail))


def gen_ou(config):
    """Euler-Maruyama Ornstein-Uhlenbeck path started in its stationary law."""
    _check_stability(config)
    rng = _rng(config)
    y0 = _stationary_std(replace(config, hurst_h=0.5)) * rng.standard_normal()
    noise = math.sqrt(config.dt) * config.sigma * rng.standard_normal(config.n - 1)
    return _series(config.mu + _linear_euler(y0, noise, config.theta, config.dt), config)


def gen_fbm(config):
    """Fractional Brownian motion ``mu + sigma * B_H(t)`` with ``B_H(0) = 0``."""
    rng = _rng(config)
    steps = _noise_scale(config) * fgn(config.n - 1, config.hurst_h, rng)
    return _series(config.mu + np.concatenate(([0.0], np.cumsum(steps))), config)


def gen_fbm_ou(config):
    """Mean-reverting path driven by fractional Gaussian noise increments."""
    _check_stability(config)
    rng = _rng(config)
    y0 = _stationary_std(config) * rng.standard_normal()
    noise = _noise_scale(config) * fgn(config.n - 1, config.hurst_h, rng)
    return _series(config.mu + _linear_euler(y0, noise, config.theta, config.dt), config)


def gen_deadband_ou(config):
    """OU with no restoring drift while ``|f - mu| <= deadband_halfwidth``.

    Outside the band the drift is ``-theta * (f - mu -/+ d)``, continuous at
    the band edges. White noise throughout.
    """
    _check_stability(config)
    rng = _rng(config)
    y0 = _stationary_std(replace(config, hurst_h=0.5)) * rng.standard_normal()
    noise = (math.sqrt(config.dt) * config.sigma * rng.standard_normal(config.n - 1)).tolist()
    d = config.deadband_halfwidth
    phi = 1.0 - config.theta * config.dt
    out = [y0]
    y = y0
    for e in noise:
        if y > d:
            y = e + phi * (y - d) + d if d else e + phi * y
        elif y < -d:
            y = e + phi * (y + d) - d if d else e + phi * y
        else:
            y = y + e
        out.append(y)
    return _series(config.mu + np.asarray(out), config)


def gen_bimodal_mixture(config):
    """I.i.d. draws from a Gaussian mixture (an unordered sample, not a path)."""
    rng = _rng(config)
    comp = rng.choice(len(config.centers), size=config.n, p=np.asarray(config.weights))
    centers = np.asarray(config.centers)
    widths = np.asarray(config.widths)
    return centers[comp] + widths[comp] * rng.standard_normal(config.n)


_GENERATORS = {
    ModelKind.OU: gen_ou,
    ModelKind.FBM: gen_fbm,
    ModelKind.FBM_OU: gen_fbm_ou,
    ModelKind.DEADBAND_OU: gen_deadband_ou,
    ModelKind.BIMODAL_MIXTURE: gen_bimodal_mixture,
}


def generate(config):
    """Dispatch on ``config.kind``; mixtures return a plain array."""
    return _GENERATORS[config.kind](config)
