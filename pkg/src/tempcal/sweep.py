"""Noise-robustness sweep: train once, then inject/calibrate/evaluate per setting.

One clean phantom dataset is generated, split 0.6/0.2/0.2 stratified by
class, and used to train a single reference model.  For each noise
setting the validation and test images are corrupted, a temperature is
fitted on the noisy validation logits, and the noisy test set is scored
before and after calibration — two rows per setting.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .calibration import apply_temperature, fit_temperature
from .interchange import MetricsReport, LabeledLogits
from .metrics import (
    ConfusionCounts,
    ProbPredictions,
    ReliabilityBins,
    accuracy,
    confusion_matrix,
    ece_from_bins,
    f1_macro,
    mean_nll,
    per_class_f1,
    per_class_precision,
    per_class_recall,
    precision_macro,
    recall_macro,
    reliability_bins,
)
from .noise import NoiseSpec, inject
from .phantom import (
    PhantomConfig,
    featurize_all,
    generate_phantoms,
    model_logits,
    train_ref_model,
)
from .rng import stream_seed

__all__ = [
    "SweepConfig",
    "SweepRow",
    "default_noise_grid",
    "split_stratified",
    "build_report",
    "evaluate_logits",
    "run_sweep",
    "rows_to_csv",
    "rows_to_markdown",
]


def default_noise_grid() -> list[NoiseSpec]:
    """Seven Gaussian settings plus three each of the other four families."""
    grid = [
        NoiseSpec("gaussian", {"mu": mu, "sigma": sigma})
        for mu, sigma in (
            (0.0, 0.02),
            (0.0, 0.05),
            (0.0, 0.1),
            (0.0, 0.2),
            (0.1, 0.2),
            (0.1, 0.3),
            (0.2, 0.3),
        )
    ]
    grid += [NoiseSpec("poisson", {"scale": s}) for s in (0.5, 1.0, 2.0)]
    grid += [
        NoiseSpec("salt_pepper", {"salt_prob": p, "pepper_prob": p})
        for p in (0.02, 0.1, 0.2)
    ]
    grid += [NoiseSpec("speckle", {"scale": s}) for s in (0.01, 0.05, 0.1)]
    grid += [NoiseSpec("uniform", {"scale": s}) for s in (0.02, 0.05, 0.1)]
    return grid


@dataclass
class SweepConfig:
    noise_grid: list = field(default_factory=default_noise_grid)
    n_per_class: int = 200
    side: int = 64
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    epochs: int = 500
    learning_rate: float = 0.2
    hidden: int = 64
    batch_size: int = 64
    ece_bins: int = 15
    data_seed: int = 20260801
    noise_seed: int = 31
    train_seed: int = 7

    def validate(self):
        if not self.noise_grid:
            raise ValueError("noise grid must be nonempty")
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise ValueError("split fractions must be positive")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        if self.n_per_class < 5:
            raise ValueError("need at least 5 images per class to split three ways")
        if self.ece_bins < 1:
            raise ValueError("ece_bins must be >= 1")
        if self.epochs < 0 or self.learning_rate <= 0:
            raise ValueError("bad training hyperparameters")


@dataclass
class SweepRow:
    """One table row: a noise setting scored with or without calibration."""

    noise_label: str
    calibrated: bool
    precision: float
    recall: float
    f1: float
    tp: int
    fn: int
    fp: int
    tn: int
    nll: float
    ece: float
    optimal_temp: float | None


def split_stratified(labels, train_frac: float, val_frac: float):
    """Per-class contiguous train/val/test index split, original order kept."""
    labels = np.asarray(labels, dtype=np.int64)
    train, val, test = [], [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        n_c = len(idx)
        n_tr = int(n_c * train_frac)
        n_va = int(n_c * val_frac)
        if n_tr < 1 or n_va < 1 or n_tr + n_va >= n_c:
            raise ValueError(f"class {c}: {n_c} examples cannot be split three ways")
        train.append(idx[:n_tr])
        val.append(idx[n_tr : n_tr + n_va])
        test.append(idx[n_tr + n_va :])
    return (
        np.sort(np.concatenate(train)),
        np.sort(np.concatenate(val)),
        np.sort(np.concatenate(test)),
    )


def build_report(
    preds: ProbPredictions,
    bins: ReliabilityBins,
    temperature: float | None = None,
    include_per_class: bool = False,
) -> MetricsReport:
    """Assemble the full metrics report from scored predictions."""
    cm = confusion_matrix(preds)
    stats = [
        (int(bins.counts[m]), bins.mean_confidence(m), bins.mean_accuracy(m))
        for m in range(bins.num_bins)
    ]
    per_class = None
    if include_per_class:
        per_class = {
            "precision": [float(v) for v in per_class_precision(cm)],
            "recall": [float(v) for v in per_class_recall(cm)],
            "f1": [float(v) for v in per_class_f1(cm)],
        }
    report = MetricsReport(
        accuracy=accuracy(cm),
        macro_precision=precision_macro(cm),
        macro_recall=recall_macro(cm),
        macro_f1=f1_macro(cm),
        confusion=cm.counts,
        nll=mean_nll(preds),
        ece=ece_from_bins(bins),
        temperature=temperature,
        ece_bins=bins.num_bins,
        bin_stats=stats,
        per_class=per_class,
    )
    report.validate()
    return report


def evaluate_logits(
    data: LabeledLogits,
    temperature: float | None = None,
    ece_bins: int = 15,
    include_per_class: bool = False,
) -> MetricsReport:
    """Score logits at the given temperature (None = uncalibrated, T=1)."""
    preds = apply_temperature(data, 1.0 if temperature is None else temperature)
    bins = reliability_bins(preds, ece_bins)
    return build_report(preds, bins, temperature, include_per_class)


def _noisy_logits(model, images, labels, idx, spec, noise_base):
    noisy = [inject(images[g], spec, noise_base, int(g)) for g in idx]
    return model_logits(model, featurize_all(noisy), labels[idx])


def run_sweep(cfg: SweepConfig, progress=None) -> list[SweepRow]:
    """Run the full grid and return two rows (uncalibrated, calibrated) per setting."""
    cfg.validate()
    pcfg = PhantomConfig(n_per_class=cfg.n_per_class, side=cfg.side)
    images, labels = generate_phantoms(pcfg, cfg.data_seed)
    features = featurize_all(images)
    tr, va, te = split_stratified(labels, cfg.train_frac, cfg.val_frac)
    model = train_ref_model(
        features[tr],
        labels[tr],
        cfg.epochs,
        cfg.learning_rate,
        cfg.train_seed,
        hidden=cfg.hidden,
        batch_size=cfg.batch_size,
    )

    rows = []
    for si, spec in enumerate(cfg.noise_grid):
        noise_base = stream_seed(cfg.noise_seed, si)
        val_logits = _noisy_logits(model, images, labels, va, spec, noise_base)
        test_logits = _noisy_logits(model, images, labels, te, spec, noise_base)
        fit = fit_temperature(val_logits)
        for calibrated in (False, True):
            rep = evaluate_logits(
                test_logits,
                fit.temperature if calibrated else None,
                cfg.ece_bins,
            )
            cm = ConfusionCounts(rep.confusion)
            rows.append(
                SweepRow(
                    noise_label=spec.label(),
                    calibrated=calibrated,
                    precision=rep.macro_precision,
                    recall=rep.macro_recall,
                    f1=rep.macro_f1,
                    tp=cm.tp,
                    fn=cm.fn,
                    fp=cm.fp,
                    tn=cm.tn,
                    nll=rep.nll,
                    ece=rep.ece,
                    optimal_temp=fit.temperature if calibrated else None,
                )
            )
        if progress is not None:
            progress(spec.label(), fit.temperature)
    return rows


_CSV_HEADER = (
    "noise,calibrated,precision,recall,f1,tp,fn,fp,tn,nll,ece,optimal_temp"
)


def rows_to_csv(rows, path: str | os.PathLike) -> None:
    """Full-precision delimited output, one line per row."""
    out = [_CSV_HEADER]
    for r in rows:
        temp = "" if r.optimal_temp is None else repr(float(r.optimal_temp))
        out.append(
            ",".join(
                [
                    r.noise_label,
                    "yes" if r.calibrated else "no",
                    repr(float(r.precision)),
                    repr(float(r.recall)),
                    repr(float(r.f1)),
                    str(r.tp),
                    str(r.fn),
                    str(r.fp),
                    str(r.tn),
                    repr(float(r.nll)),
                    repr(float(r.ece)),
                    temp,
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(out) + "\n")


def _grid3(v: float) -> str:
    # display rounding to the nearest 0.005, half away from zero
    return format(math.floor(v * 200.0 + 0.5) / 200.0, "g")


def rows_to_markdown(rows, path: str | os.PathLike) -> None:
    """Human-readable table: metrics on a 0.005 grid, temperature at 3 decimals."""
    lines = [
        "| Noise | Variant | Prec | Rec | F1 | TP | FN | FP | TN | NLL | ECE | Optimal Temp |",
        "|---|---|---|---|---|---|---|---|---|---|---|---|",
    ]
    for r in rows:
        variant = "calibrated" if r.calibrated else "uncalibrated"
        temp = "-" if r.optimal_temp is None else f"{r.optimal_temp:.3f}"
        lines.append(
            "| "
            + " | ".join(
                [
                    r.noise_label,
                    variant,
                    _grid3(r.precision),
                    _grid3(r.recall),
                    _grid3(r.f1),
                    str(r.tp),
                    str(r.fn),
                    str(r.fp),
                    str(r.tn),
                    f"{r.nll:.3f}",
                    f"{r.ece:.3f}",
                    temp,
                ]
            )
            + " |"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
