"""Input validation and small shared helpers (in the spirit of sklearn.utils.validation)."""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DegenerateDistribution, TooFewSamples


def check_samples(x, min_samples=1, name="samples", require_spread=False):
    """Return ``x`` as a finite, contiguous 1-D float64 array.

    Accepts lists, arrays, column vectors of shape (n, 1) and anything with
    a ``values`` attribute (FrequencySeries, SegmentedSeries, pandas).
    """
    if hasattr(x, "pooled_values"):
        x = x.pooled_values()
    elif hasattr(x, "values") and not isinstance(x, np.ndarray):
        x = x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    if arr.size < min_samples:
        raise TooFewSamples(f"{name} needs at least {min_samples} values, got {arr.size}")
    if require_spread and arr.size and arr.min() == arr.max():
        raise DegenerateDistribution(f"{name} has zero variance")
    return np.ascontiguousarray(arr)


def n_threads(n_jobs=None):
    """Thread budget: explicit ``n_jobs`` wins, else ``GRIDFREQ_THREADS``, else 1."""
    if n_jobs is None:
        env = os.environ.get("GRIDFREQ_THREADS")
        n_jobs = int(env) if env else 1
    return max(1, int(n_jobs))


def spawn_generators(seed, n):
    """Independent per-replicate generators; results do not depend on scheduling."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(n)]


def parallel_map(func, items, n_jobs=None):
    """Ordered map over ``items`` using up to ``n_jobs`` threads."""
    items = list(items)
    workers = min(n_threads(n_jobs), len(items)) if items else 1
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
