"""Frequency recordings: ingestion, gap segmentation and increments."""
import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_samples
from .errors import (
    InputEmpty,
    InternalOrderingError,
    LagExceedsSeries,
    LagNotAligned,
    MalformedInput,
)

JITTER = 0.01


def _frozen(values):
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FrequencySeries:
    """Uniformly sampled frequency values (Hz) starting at ``start_epoch``."""

    values: np.ndarray
    start_epoch: float = 0.0
    dt: float = 1.0
    region: str = ""

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if values.size < 1:
            raise InputEmpty("a FrequencySeries needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain NaN or infinite entries")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def timestamps(self):
        return self.start_epoch + self.dt * np.arange(self.values.size)

    @property
    def end_epoch(self):
        return self.start_epoch + self.dt * (self.values.size - 1)


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    values: np.ndarray
    tau: float
    parent_region: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class SegmentedSeries:
    """Time-ordered, non-overlapping gap-free segments of one recording."""

    segments: tuple
    source: str = ""
    dropped_samples: int = 0
    row_errors: tuple = field(default=(), repr=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        for prev, nxt in zip(segs, segs[1:]):
            if nxt.start_epoch <= prev.end_epoch:
                raise InternalOrderingError("segments overlap or are out of order")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def from_array(cls, values, dt=1.0, start_epoch=0.0, region="", source=""):
        """Wrap one contiguous array as a single-segment series."""
        series = FrequencySeries(check_samples(values), start_epoch, dt, region)
        return cls((series,), source=source)

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def n_samples(self):
        return sum(len(s) for s in self.segments)

    @property
    def dt(self):
        return self.segments[0].dt if self.segments else 1.0

    @property
    def region(self):
        return self.segments[0].region if self.segments else ""

    @property
    def span(self):
        if not self.segments:
            return (None, None)
        return (self.segments[0].start_epoch, self.segments[-1].end_epoch)

    def longest(self):
        if not self.segments:
            raise InputEmpty("no segments")
        return max(self.segments, key=len)

    def pooled_values(self):
        """All samples concatenated in time order (for distributional statistics)."""
        if not self.segments:
            return np.empty(0)
        return np.concatenate([s.values for s in self.segments])

    def increments(self, tau=None):
        """Increments per segment, concatenated; never differences across a gap."""
        tau = self.dt if tau is None else tau
        _lag_steps(tau, self.dt)
        parts = [
            to_increments(s, tau).values
            for s in self.segments
            if len(s) > round(tau / s.dt)
        ]
        if not parts:
            raise LagExceedsSeries(f"no segment is longer than tau={tau} s")
        return IncrementSeries(np.concatenate(parts), tau, self.region)


@dataclass(frozen=True)
class IngestConfig:
    dt: float = 1.0
    max_gap: Optional[float] = None
    jitter: float = JITTER
    region: str = ""
    max_malformed_fraction: float = 0.01


def _parse_timestamp(text):
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        pass
    else:
        if not math.isfinite(value):
            raise ValueError(f"non-finite timestamp {text!r}")
        return value
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.timestamp()


def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8")), "<bytes>"
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return io.StringIO(fh.read().decode("utf-8")), str(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data), getattr(source, "name", "<stream>")


def ingest_csv(source, config=None):
    """Read a ``timestamp,frequency`` CSV into a :class:`SegmentedSeries`.

    ``source`` may be a path, raw bytes or a (binary or text) stream. A header
    row is optional and lines starting with ``#`` are ignored. Rows that fail
    to parse are collected; more than ``max_malformed_fraction`` of them aborts
    the run with :class:`MalformedInput`.
    """
    config = config or IngestConfig()
    text, name = _open_text(source)
    stamps, freqs, errors = [], [], []
    n_rows = 0
    for lineno, row in enumerate(csv.reader(text), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        n_rows += 1
        try:
            if len(row) < 2:
                raise ValueError("expected two columns")
            t = _parse_timestamp(row[0])
            f = float(row[1])
            if not math.isfinite(f):
                raise ValueError(f"non-finite frequency {row[1]!r}")
        except ValueError as exc:
            if n_rows == 1 and not stamps:
                # first row that does not parse is taken as the header
                n_rows = 0
                continue
            errors.append((lineno, str(exc)))
            continue
        stamps.append(t)
        freqs.append(f)

    if n_rows == 0:
        raise InputEmpty(f"{name}: no data rows")
    if len(errors) > config.max_malformed_fraction * n_rows:
        raise MalformedInput(
            f"{name}: {len(errors)} of {n_rows} rows malformed", row_errors=errors
        )
    if not stamps:
        raise InputEmpty(f"{name}: no valid rows")

    t = np.asarray(stamps)
    f = np.asarray(freqs)
    order = np.argsort(t, kind="stable")
    result = segment(
        t[order],
        f[order],
        max_gap=config.max_gap,
        dt=config.dt,
        jitter=config.jitter,
        region=config.region,
        source=name,
    )
    return SegmentedSeries(
        result.segments,
        source=name,
        dropped_samples=result.dropped_samples + len(errors),
        row_errors=tuple(errors),
    )


def segment(timestamps, values, max_gap=None, dt=1.0, jitter=JITTER, region="", source=""):
    """Partition timestamped samples into gap-free segments.

    Repeated timestamps keep their first sample. A new segment starts when the
    spacing exceeds ``max_gap`` (default ``dt``) or falls short of ``dt`` by
    more than the jitter tolerance. Samples are never altered; holes no wider
    than ``max_gap`` are closed up without interpolation.
    """
    t = np.asarray(timestamps, dtype=np.float64)
    f = np.asarray(values, dtype=np.float64)
    if t.shape != f.shape or t.ndim != 1:
        raise ValueError("timestamps and values must be 1-D arrays of equal length")
    if t.size == 0:
        raise InputEmpty("no samples to segment")
    if dt <= 0:
        raise ValueError("dt must be positive")
    max_gap = dt if max_gap is None else float(max_gap)
    if max_gap < dt:
        raise ValueError("max_gap must be at least dt")

    keep = np.ones(t.size, dtype=bool)
    keep[1:] = t[1:] != t[:-1]
    dropped = int(t.size - keep.sum())
    t, f = t[keep], f[keep]
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise InternalOrderingError("timestamps are not increasing after de-duplication")

    tol = jitter * dt
    breaks = np.flatnonzero((steps > max_gap + tol) | (steps < dt - tol)) + 1
    segments = tuple(
        FrequencySeries(chunk_f, float(chunk_t[0]), dt, region)
        for chunk_t, chunk_f in zip(np.split(t, breaks), np.split(f, breaks))
    )
    return SegmentedSeries(segments, source=source, dropped_samples=dropped)


def _lag_steps(tau, dt):
    if tau <= 0:
        raise LagNotAligned(f"tau must be positive, got {tau}")
    steps = tau / dt
    k = round(steps)
    if k < 1 or abs(steps - k) > 1e-9 * max(1.0, steps):
        raise LagNotAligned(f"tau={tau} is not a multiple of dt={dt}")
    return int(k)


def to_increments(series, tau=None):
    """``values[k] = f[k + tau/dt] - f[k]`` for one gap-free segment."""
    if not isinstance(series, FrequencySeries):
        series = FrequencySeries(check_samples(series))
    tau = series.dt if tau is None else tau
    k = _lag_steps(tau, series.dt)
    if k >= len(series):
        raise LagExceedsSeries(f"tau={tau} s needs more than {len(series)} samples")
    v = series.values
    return IncrementSeries(v[k:] - v[:-k], tau, series.region)


class IncrementTransformer(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping a 1-D series to its lag-``tau`` increments."""

    def __init__(self, tau=1.0, dt=1.0):
        self.tau = tau
        self.dt = dt

    def fit(self, X, y=None):
        _lag_steps(self.tau, self.dt)
        return self

    def transform(self, X):
        if isinstance(X, SegmentedSeries):
            return X.increments(self.tau).values
        x = check_samples(X, min_samples=2)
        return to_increments(FrequencySeries(x, dt=self.dt), self.tau).values
