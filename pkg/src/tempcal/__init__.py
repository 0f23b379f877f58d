"""Temperature-scaling calibration for image classifiers under synthetic noise."""

from .calibration import (
    T_MAX,
    T_MIN,
    FitResult,
    apply_temperature,
    fit_temperature,
    nll_at,
    tempered_softmax,
)
from .interchange import (
    DatasetManifest,
    FormatError,
    GrayImage,
    LabeledLogits,
    MetricsReport,
    read_logits_csv,
    read_manifest_csv,
    read_pgm,
    write_logits_csv,
    write_manifest_csv,
    write_pgm,
    write_report_json,
)
from .metrics import ConfusionCounts, ProbPredictions, ReliabilityBins, ece
from .noise import NoiseSpec, inject
from .phantom import PhantomConfig, RefModel, generate_phantoms, train_ref_model
from .sweep import SweepConfig, SweepRow, evaluate_logits, run_sweep

__version__ = "0.1.0"

__all__ = [
    "T_MAX",
    "T_MIN",
    "FitResult",
    "apply_temperature",
    "fit_temperature",
    "nll_at",
    "tempered_softmax",
    "DatasetManifest",
    "FormatError",
    "GrayImage",
    "LabeledLogits",
    "MetricsReport",
    "read_logits_csv",
    "read_manifest_csv",
    "read_pgm",
    "write_logits_csv",
    "write_manifest_csv",
    "write_pgm",
    "write_report_json",
    "ConfusionCounts",
    "ProbPredictions",
    "ReliabilityBins",
    "ece",
    "NoiseSpec",
    "inject",
    "PhantomConfig",
    "RefModel",
    "generate_phantoms",
    "train_ref_model",
    "SweepConfig",
    "SweepRow",
    "evaluate_logits",
    "run_sweep",
    "__version__",
]
