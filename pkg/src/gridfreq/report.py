"""Full characterisation battery per dataset and cross-dataset comparison."""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .bimodality import dip_statistic
from .correlation import acf, default_windows, dfa, fit_exp_decay
from .errors import DuplicateLabel, GridFreqError, ReportEmpty, TooFewSamples
from .increments import increment_report
from .linearity import lt_rmse
from .moments import count_modes, kde, moments
from .series import SegmentedSeries

SCHEMA_VERSION = "1.0"
ANALYSES = ("moments", "increments", "dip", "linearity", "acf", "dfa")
LONG_SERIES = ("linearity", "acf", "dfa")
METRICS = ("dip", "rmse", "lambda", "hurst", "kurtosis", "increment_kurtosis")


@dataclass(frozen=True)
class AnalysisConfig:
    """Every tunable of the battery. Keys double as config-file keys and CLI flags."""

    seed: int = 0
    tau: float = 1.0
    bandwidth: Optional[float] = None
    dip_pvalue: bool = False
    n_boot: int = 2000
    n_surrogates: int = 19
    lt_max_lag: float = 60.0
    acf_max_lag: float = 6 * 3600.0
    fit_window: float = 3600.0
    dfa_order: int = 1
    dfa_min_scale: int = 5
    dfa_max_scale: Optional[int] = None
    dfa_n_scales: int = 24
    dfa_fit_min: Optional[int] = None
    dfa_fit_max: Optional[int] = None
    min_long_series: int = 64
    hurst_margin: float = 0.05
    kurtosis_se_multiple: float = 4.0
    analyses: tuple = ANALYSES

    def __post_init__(self):
        names = self.analyses
        if isinstance(names, str):
            names = [a.strip() for a in names.split(",") if a.strip()]
        unknown = set(names) - set(ANALYSES)
        if unknown:
            raise ValueError(f"unknown analyses: {sorted(unknown)}")
        object.__setattr__(self, "analyses", tuple(a for a in ANALYSES if a in names))

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string or typed values, e.g. a parsed config file."""
        kwargs = {}
        types = {f.name: f for f in fields(cls)}
        for key, value in mapping.items():
            key = key.replace("-", "_")
            if key not in types:
                raise KeyError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, value, cls.__dataclass_fields__[key].default)
        return cls(**kwargs)

    def to_dict(self):
        out = asdict(self)
        out["analyses"] = list(self.analyses)
        return out

    def digest(self):
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _coerce(key, value, default):
    if not isinstance(value, str):
        return value
    text = value.strip()
    if text.lower() in ("none", "null", ""):
        return None
    if key == "analyses":
        return text
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int) or key in ("dfa_max_scale", "dfa_fit_min", "dfa_fit_max"):
        return int(float(text))
    return float(text)


def classify_kurtosis(kurtosis, n, se_multiple=4.0):
    """Compare kurtosis with the Gaussian 3 using the large-sample SE ``sqrt(24/n)``."""
    band = se_multiple * math.sqrt(24.0 / n)
    if kurtosis > 3.0 + band:
        return "leptokurtic"
    if kurtosis < 3.0 - band:
        return "platykurtic"
    return "mesokurtic"


def classify_hurst(hurst, margin=0.05):
    if hurst > 0.5 + margin:
        return "persistent"
    if hurst < 0.5 - margin:
        return "anti-persistent"
    return "uncorrelated"


@dataclass(eq=False)
class CharacterizationReport:
    region: str
    span: tuple
    n_samples: int
    n_segments: int
    dropped_samples: int
    results: dict
    skipped: dict
    signature: dict
    config: dict
    config_digest: str
    tool_version: str = __version__
    schema_version: str = SCHEMA_VERSION
    artifacts: dict = field(default_factory=dict, repr=False)

    @property
    def partial(self):
        return bool(self.skipped)

    def metric(self, name):
        """Scalar used for ranking, or None when the analysis was skipped."""
        return _metric_of(self.results, name)

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "region": self.region,
            "span": list(self.span),
            "n_samples": self.n_samples,
            "n_segments": self.n_segments,
            "dropped_samples": self.dropped_samples,
            "config": self.config,
            "config_digest": self.config_digest,
            "results": self.results,
            "skipped": self.skipped,
            "signature": self.signature,
        }

    def to_json(self):
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _metric_of(results, name):
    path = {
        "dip": ("dip", "dip"),
        "rmse": ("linearity", "rmse"),
        "lambda": ("acf", "lambda"),
        "hurst": ("dfa", "hurst"),
        "kurtosis": ("moments", "kurtosis"),
        "increment_kurtosis": ("increments", "moments", "kurtosis"),
    }[name]
    node = results
    for key in path:
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def characterize(data, config=None, n_jobs=None):
    """Run the whole battery on one dataset.

    A failing analysis is recorded in ``skipped`` under its error class name;
    the report is only abandoned when every analysis fails.
    """
    config = config or AnalysisConfig()
    if not isinstance(data, SegmentedSeries):
        data = SegmentedSeries.from_array(data)
    if data.n_samples == 0:
        raise ReportEmpty("no samples")
    pooled = data.pooled_values()
    longest = len(data.longest())
    dt = data.dt
    results, skipped, artifacts = {}, {}, {}

    def long_enough():
        if longest < config.min_long_series:
            raise TooFewSamples(
                f"longest segment has {longest} samples, need {config.min_long_series}"
            )

    def run_moments():
        out = moments(pooled).to_dict()
        try:
            dens = kde(pooled, config.bandwidth)
        except GridFreqError:
            return out
        artifacts["density"] = dens
        out["density_modes"] = count_modes(dens.density)
        out["bandwidth"] = dens.bandwidth
        return out

    def run_increments():
        rep = increment_report(data, config.tau, config.bandwidth)
        artifacts["increment_density"] = rep.density
        return rep.to_dict()

    def run_dip():
        return dip_statistic(
            pooled, config.dip_pvalue, config.n_boot, config.seed, n_jobs
        ).to_dict()

    def run_linearity():
        long_enough()
        max_lag = min(config.lt_max_lag, dt * ((longest - 1) // 4))
        res = lt_rmse(data, config.n_surrogates, max_lag, config.seed, n_jobs)
        artifacts["lt_curves"] = res
        return res.to_dict()

    def run_acf():
        long_enough()
        max_lag = min(config.acf_max_lag, dt * (longest // 4))
        a = acf(data, max_lag)
        fit = fit_exp_decay(a, min(config.fit_window, max_lag))
        artifacts["acf"] = a
        out = fit.to_dict()
        out["max_lag"] = max_lag
        return out

    def run_dfa():
        long_enough()
        windows = default_windows(
            longest, config.dfa_min_scale, config.dfa_max_scale, config.dfa_n_scales
        )
        fit_range = None
        if config.dfa_fit_min is not None or config.dfa_fit_max is not None:
            fit_range = (config.dfa_fit_min or 0, config.dfa_fit_max or np.iinfo(np.int64).max)
        res = dfa(data, windows, config.dfa_order, fit_range)
        artifacts["dfa"] = res
        return res.to_dict()

    runners = {
        "moments": run_moments,
        "increments": run_increments,
        "dip": run_dip,
        "linearity": run_linearity,
        "acf": run_acf,
        "dfa": run_dfa,
    }
    for name in config.analyses:
        try:
            results[name] = runners[name]()
        except GridFreqError as exc:
            skipped[name] = {"reason": type(exc).__name__, "detail": str(exc)}

    if not results:
        raise ReportEmpty("every analysis failed: " + ", ".join(sorted(skipped)))

    signature = {}
    if "moments" in results:
        m = results["moments"]
        signature["frequency_kurtosis"] = classify_kurtosis(
            m["kurtosis"], m["n"], config.kurtosis_se_multiple
        )
        if "density_modes" in m:
            signature["density_modes"] = m["density_modes"]
    if "increments" in results:
        m = results["increments"]["moments"]
        signature["increment_kurtosis"] = classify_kurtosis(
            m["kurtosis"], m["n"], config.kurtosis_se_multiple
        )
    if "dfa" in results:
        signature["hurst"] = classify_hurst(results["dfa"]["hurst"], config.hurst_margin)

    return CharacterizationReport(
        region=data.region or data.source,
        span=data.span,
        n_samples=data.n_samples,
        n_segments=len(data),
        dropped_samples=data.dropped_samples,
        results=_plain(results),
        skipped=skipped,
        signature=signature,
        config=config.to_dict(),
        config_digest=config.digest(),
        artifacts=artifacts,
    )


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple
    rankings: dict

    def to_dict(self):
        return {"rows": list(self.rows), "rankings": self.rankings}

    def to_json(self):
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=2) + "\n"

    def to_csv(self):
        header = ["region", *METRICS]
        lines = [",".join(header)]
        for row in self.rows:
            cells = [row["region"]] + ["" if row[m] is None else repr(row[m]) for m in METRICS]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def compare(reports):
    """Per-metric rankings, largest value first; ties fall back to label order."""
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("compare needs at least two reports")
    rows = []
    for rep in reports:
        if isinstance(rep, CharacterizationReport):
            label, results = rep.region, rep.results
        else:
            label, results = rep["region"], rep["results"]
        rows.append({"region": label, **{m: _metric_of(results, m) for m in METRICS}})
    labels = [r["region"] for r in rows]
    if len(set(labels)) != len(labels):
        raise DuplicateLabel("duplicate region labels: " + ", ".join(sorted({l for l in labels if labels.count(l) > 1})))
    rows.sort(key=lambda r: r["region"])
    rankings = {}
    for metric in METRICS:
        present = [r for r in rows if r[metric] is not None]
        present.sort(key=lambda r: (-r[metric], r["region"]))
        rankings[metric] = [{"region": r["region"], "value": r[metric]} for r in present]
    return ComparisonTable(tuple(rows), rankings)
