"""Report figures: reliability diagram SVG and sweep summary charts.

The reliability diagram is written as hand-assembled SVG so the output
is deterministic text, diffable, and structurally checkable (exactly one
<rect> per confidence bin).  The sweep summaries are ordinary matplotlib
figures rendered to PNG next to the delimited output.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import ReliabilityBins

__all__ = ["reliability_svg", "write_sweep_figures"]

_W, _H = 480, 420
_ML, _MR, _MT, _MB = 60, 20, 20, 60  # margins
_PW = _W - _ML - _MR
_PH = _H - _MT - _MB


def _x(v: float) -> float:
    return _ML + v * _PW


def _y(v: float) -> float:
    return _MT + (1.0 - v) * _PH


def _f(v: float) -> str:
    return f"{v:.2f}"


def reliability_svg(bins: ReliabilityBins, path: str | os.PathLike) -> None:
    """Bar chart of per-bin accuracy vs confidence with the identity diagonal.

    Bars (one <rect> per bin, empty bins at height zero) show mean
    accuracy; short horizontal markers show mean confidence; the dashed
    diagonal is perfect calibration.
    """
    m = bins.num_bins
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<line class="axis" x1="{_f(_x(0))}" y1="{_f(_y(0))}" '
        f'x2="{_f(_x(1))}" y2="{_f(_y(0))}" stroke="black" stroke-width="1"/>',
        f'<line class="axis" x1="{_f(_x(0))}" y1="{_f(_y(0))}" '
        f'x2="{_f(_x(0))}" y2="{_f(_y(1))}" stroke="black" stroke-width="1"/>',
    ]
    for m_i in range(m):
        lo = m_i / m
        width = 1.0 / m
        acc = bins.mean_accuracy(m_i)
        height = 0.0 if acc is None else acc
        parts.append(
            f'<rect class="bin-bar" x="{_f(_x(lo))}" y="{_f(_y(height))}" '
            f'width="{_f(width * _PW)}" height="{_f(height * _PH)}" '
            f'fill="steelblue" fill-opacity="0.7" stroke="black" stroke-width="0.5"/>'
        )
    for m_i in range(m):
        conf = bins.mean_confidence(m_i)
        if conf is None:
            continue
        lo = m_i / m
        hi = (m_i + 1) / m
        parts.append(
            f'<line class="conf-marker" x1="{_f(_x(lo))}" y1="{_f(_y(conf))}" '
            f'x2="{_f(_x(hi))}" y2="{_f(_y(conf))}" stroke="crimson" stroke-width="2"/>'
        )
    parts.append(
        f'<line class="diagonal" x1="{_f(_x(0))}" y1="{_f(_y(0))}" '
        f'x2="{_f(_x(1))}" y2="{_f(_y(1))}" stroke="gray" stroke-width="1" '
        'stroke-dasharray="4 3"/>'
    )
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(
            f'<text x="{_f(_x(tick))}" y="{_f(_y(0) + 18)}" font-size="11" '
            f'text-anchor="middle">{format(tick, "g")}</text>'
        )
        parts.append(
            f'<text x="{_f(_x(0) - 8)}" y="{_f(_y(tick) + 4)}" font-size="11" '
            f'text-anchor="end">{format(tick, "g")}</text>'
        )
    parts.append(
        f'<text x="{_f(_x(0.5))}" y="{_f(_H - 14)}" font-size="13" '
        'text-anchor="middle">confidence</text>'
    )
    parts.append(
        f'<text x="16" y="{_f(_y(0.5))}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {_f(_y(0.5))})">accuracy</text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def write_sweep_figures(rows, out_dir: str | os.PathLike) -> list:
    """Render before/after NLL, ECE, and fitted-temperature charts.

    `rows` is the sweep row list (uncalibrated/calibrated pairs per noise
    setting).  Returns the written file paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    labels = []
    nll_unc, nll_cal, ece_unc, ece_cal, temps = [], [], [], [], []
    for row in rows:
        if not row.calibrated:
            labels.append(row.noise_label)
            nll_unc.append(row.nll)
            ece_unc.append(row.ece)
        else:
            nll_cal.append(row.nll)
            ece_cal.append(row.ece)
            temps.append(row.optimal_temp)

    written = []
    for name, before, after, title in (
        ("nll_by_setting.png", nll_unc, nll_cal, "NLL before/after temperature scaling"),
        ("ece_by_setting.png", ece_unc, ece_cal, "ECE before/after temperature scaling"),
    ):
        fig, ax = plt.subplots(figsize=(11, 4.5))
        idx = np.arange(len(labels))
        ax.bar(idx - 0.2, before, width=0.4, label="uncalibrated")
        ax.bar(idx + 0.2, after, width=0.4, label="calibrated")
        ax.set_xticks(idx)
        ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
        ax.set_ylabel(title.split()[0])
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        out = os.path.join(out_dir, name)
        fig.savefig(out, dpi=150)
        plt.close(fig)
        written.append(out)

    fig, ax = plt.subplots(figsize=(11, 4.5))
    idx = np.arange(len(labels))
    ax.bar(idx, temps, width=0.6, color="darkorange")
    ax.axhline(1.0, color="gray", linestyle="--", linewidth=1)
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("fitted temperature")
    ax.set_title("Optimal temperature per noise setting")
    fig.tight_layout()
    out = os.path.join(out_dir, "optimal_temperature.png")
    fig.savefig(out, dpi=150)
    plt.close(fig)
    written.append(out)
    return written
