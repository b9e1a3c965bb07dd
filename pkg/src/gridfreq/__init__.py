"""Stochastic characterisation of power-grid frequency recordings."""
__version__ = "0.1.0"

from .bimodality import DipResult, DipTest, dip_statistic
from .correlation import (
    DFA,
    AcfResult,
    AutocorrelationDecay,
    DfaResult,
    ExpDecayFit,
    acf,
    dfa,
    fit_exp_decay,
)
from .increments import IncrementAnalyzer, IncrementReport, increment_report
from .linearity import (
    LinearityResult,
    LinearityTest,
    PhaseSurrogate,
    SpectrumRepresentation,
    lt_curve,
    lt_rmse,
    phase_surrogate,
)
from .moments import DensityEstimate, KernelDensity1D, MomentSummary, kde, moments
from .report import AnalysisConfig, CharacterizationReport, ComparisonTable, characterize, compare
from .series import (
    FrequencySeries,
    IncrementSeries,
    IncrementTransformer,
    IngestConfig,
    SegmentedSeries,
    ingest_csv,
    segment,
    to_increments,
)
from .synth import ModelConfig, ModelKind, generate

__all__ = [
    "AcfResult",
    "AnalysisConfig",
    "AutocorrelationDecay",
    "CharacterizationReport",
    "ComparisonTable",
    "DFA",
    "DensityEstimate",
    "DfaResult",
    "DipResult",
    "DipTest",
    "ExpDecayFit",
    "FrequencySeries",
    "IncrementAnalyzer",
    "IncrementReport",
    "IncrementSeries",
    "IncrementTransformer",
    "IngestConfig",
    "KernelDensity1D",
    "LinearityResult",
    "LinearityTest",
    "ModelConfig",
    "ModelKind",
    "MomentSummary",
    "PhaseSurrogate",
    "SegmentedSeries",
    "SpectrumRepresentation",
    "acf",
    "characterize",
    "compare",
    "dfa",
    "dip_statistic",
    "fit_exp_decay",
    "generate",
    "increment_report",
    "ingest_csv",
    "kde",
    "lt_curve",
    "lt_rmse",
    "moments",
    "phase_surrogate",
    "segment",
    "to_increments",
]
