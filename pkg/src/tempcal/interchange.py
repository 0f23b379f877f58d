"""On-disk data model: logits CSV, binary PGM images, manifests, JSON reports.

All writers are deterministic (same input, byte-identical output) and all
readers validate their input, reporting the offending 1-based line or byte
offset in the exception message.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FormatError",
    "LabeledLogits",
    "GrayImage",
    "DatasetManifest",
    "MetricsReport",
    "read_logits_csv",
    "write_logits_csv",
    "read_pgm",
    "write_pgm",
    "read_manifest_csv",
    "write_manifest_csv",
    "write_report_json",
]

# 9 significant digits; '#' keeps trailing zeros so output width is stable
_CSV_FLOAT = "#.9g"


class FormatError(ValueError):
    """Malformed or invariant-violating file content."""


@dataclass
class LabeledLogits:
    """n records of (true label, K-vector of raw logits)."""

    labels: np.ndarray  # (n,) int64
    logits: np.ndarray  # (n, K) float64

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.logits = np.asarray(self.logits, dtype=np.float64)
        self.validate()

    @property
    def n(self) -> int:
        return self.logits.shape[0]

    @property
    def num_classes(self) -> int:
        return self.logits.shape[1]

    def validate(self):
        if self.logits.ndim != 2:
            raise ValueError("logits must be a 2-D array")
        n, k = self.logits.shape
        if n < 1:
            raise ValueError("need at least one record")
        if k < 2:
            raise ValueError("need at least two classes")
        if self.labels.shape != (n,):
            raise ValueError("labels and logits record counts differ")
        if not np.all((self.labels >= 0) & (self.labels < k)):
            raise ValueError("label out of range [0, K)")
        if not np.all(np.isfinite(self.logits)):
            raise ValueError("logits must be finite")


@dataclass
class GrayImage:
    """Grayscale image, pixel values in [0, 1], row-major (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        self.validate()

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def validate(self):
        if self.pixels.ndim != 2:
            raise ValueError("pixels must be a 2-D array")
        if self.pixels.size == 0:
            raise ValueError("image must be non-empty")
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("pixel values must be finite")
        lo, hi = self.pixels.min(), self.pixels.max()
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"pixel values outside [0, 1]: min={lo}, max={hi}")


@dataclass
class DatasetManifest:
    """Ordered (relative path, integer label) pairs."""

    entries: list = field(default_factory=list)

    def validate(self):
        seen = set()
        for i, (path, label) in enumerate(self.entries):
            if not path:
                raise ValueError(f"empty path at entry {i}")
            if path in seen:
                raise ValueError(f"duplicate path {path!r}")
            seen.add(path)
            if int(label) < 0:
                raise ValueError(f"negative label at entry {i}")

    @property
    def paths(self):
        return [p for p, _ in self.entries]

    @property
    def labels(self):
        return [int(l) for _, l in self.entries]


@dataclass
class MetricsReport:
    """Classification and calibration metrics for one evaluation run."""

    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: np.ndarray  # (K, K) int64, rows = true class, cols = predicted
    nll: float
    ece: float
    temperature: float | None
    ece_bins: int
    bin_stats: list  # per bin: (count, mean_confidence | None, mean_accuracy | None)
    per_class: dict | None = None  # optional per-class precision/recall/f1 lists

    def validate(self):
        for name in ("accuracy", "macro_precision", "macro_recall", "macro_f1", "ece"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.nll < 0.0:
            raise ValueError("nll must be nonnegative")
        if len(self.bin_stats) != self.ece_bins:
            raise ValueError("bin_stats length must equal ece_bins")
        if int(self.confusion.sum()) != sum(c for c, _, _ in self.bin_stats):
            raise ValueError("bin counts must sum to the record count")


# ---------------------------------------------------------------------------
# Logits CSV
# ---------------------------------------------------------------------------

def _expected_header(k: int) -> str:
    return "label," + ",".join(f"logit_{j}" for j in range(k))


def read_logits_csv(path: str | os.PathLike) -> LabeledLogits:
    """Parse a `label,logit_0,...,logit_{K-1}` CSV into LabeledLogits."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline
    if not lines:
        raise FormatError(f"{path}: empty file")

    header = lines[0].rstrip("\r")
    cols = header.split(",")
    if len(cols) < 3 or cols[0] != "label":
        raise FormatError(f"{path}: malformed header, line 1")
    k = len(cols) - 1
    if cols != _expected_header(k).split(","):
        raise FormatError(f"{path}: malformed header, line 1")

    labels = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.rstrip("\r").split(",")
        if len(parts) != k + 1:
            raise FormatError(
                f"{path}: expected {k + 1} fields, got {len(parts)}, line {lineno}"
            )
        try:
            label = int(parts[0])
        except ValueError:
            raise FormatError(f"{path}: non-integer label, line {lineno}") from None
        if not 0 <= label < k:
            raise FormatError(f"{path}: label out of range, line {lineno}")
        try:
            values = [float(p) for p in parts[1:]]
        except ValueError:
            raise FormatError(f"{path}: malformed logit, line {lineno}") from None
        if not all(math.isfinite(v) for v in values):
            raise FormatError(f"{path}: non-finite logit, line {lineno}")
        labels.append(label)
        rows.append(values)

    if not rows:
        raise FormatError(f"{path}: no data rows")
    return LabeledLogits(labels=np.array(labels), logits=np.array(rows))


def write_logits_csv(data: LabeledLogits, path: str | os.PathLike) -> None:
    """Emit the interchange CSV, reals at 9 significant digits, \\n endings."""
    data.validate()
    out = [_expected_header(data.num_classes)]
    for label, row in zip(data.labels, data.logits):
        out.append(str(int(label)) + "," + ",".join(format(v, _CSV_FLOAT) for v in row))
    _write_text(path, "\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# Binary PGM (P5, maxval 255)
# ---------------------------------------------------------------------------

def read_pgm(path: str | os.PathLike) -> GrayImage:
    """Read a binary 8-bit PGM; bytes map to pixel/255 in [0, 1]."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc

    pos = 0

    def next_token() -> tuple[bytes, int]:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":  # comment runs to end of line
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        if pos >= len(data):
            raise FormatError(f"{path}: truncated header at byte {pos}")
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        return data[start:pos], start

    magic, off = next_token()
    if magic != b"P5":
        raise FormatError(f"{path}: unsupported magic {magic!r} at byte {off}")

    dims = []
    for name in ("width", "height", "maxval"):
        tok, off = next_token()
        try:
            value = int(tok)
        except ValueError:
            raise FormatError(f"{path}: bad {name} at byte {off}") from None
        if value <= 0:
            raise FormatError(f"{path}: nonpositive {name} at byte {off}")
        dims.append(value)
    width, height, maxval = dims
    if maxval != 255:
        raise FormatError(f"{path}: maxval must be 255, got {maxval}")

    pos += 1  # single whitespace byte separates header from payload
    expected = width * height
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise FormatError(
            f"{path}: truncated payload at byte {pos + len(payload)} "
            f"(need {expected} pixels, got {len(payload)})"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return GrayImage(pixels=pixels.reshape(height, width))


def write_pgm(img: GrayImage, path: str | os.PathLike) -> None:
    """Write binary PGM; pixels quantized round-half-away-from-zero to 0..255."""
    img.validate()
    # pixels are nonnegative, so floor(x + 0.5) is round-half-away-from-zero
    q = np.floor(img.pixels * 255.0 + 0.5)
    q = np.clip(q, 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header + q.tobytes())
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Manifest CSV
# ---------------------------------------------------------------------------

def read_manifest_csv(path: str | os.PathLike) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != "path,label":
        raise FormatError(f"{path}: malformed header, line 1")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.rstrip("\r").split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}: expected 2 fields, line {lineno}")
        rel, label_s = parts
        if not rel:
            raise FormatError(f"{path}: empty path, line {lineno}")
        try:
            label = int(label_s)
        except ValueError:
            raise FormatError(f"{path}: non-integer label, line {lineno}") from None
        if label < 0:
            raise FormatError(f"{path}: negative label, line {lineno}")
        entries.append((rel, label))
    manifest = DatasetManifest(entries=entries)
    try:
        manifest.validate()
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return manifest


def write_manifest_csv(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    manifest.validate()
    out = ["path,label"]
    out.extend(f"{rel},{int(label)}" for rel, label in manifest.entries)
    _write_text(path, "\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# JSON metrics report
# ---------------------------------------------------------------------------

def _jf(x: float) -> str:
    return f"{x:.6f}"


def write_report_json(report: MetricsReport, path: str | os.PathLike) -> None:
    """Serialize a MetricsReport with fixed key order and 6-decimal reals.

    Rendered by hand rather than json.dump so that real numbers carry
    exactly six decimals and two identical reports produce byte-identical
    files.
    """
    report.validate()
    k = report.confusion.shape[0]
    lines = ["{"]
    lines.append(f'  "accuracy": {_jf(report.accuracy)},')
    lines.append(f'  "macro_precision": {_jf(report.macro_precision)},')
    lines.append(f'  "macro_recall": {_jf(report.macro_recall)},')
    lines.append(f'  "macro_f1": {_jf(report.macro_f1)},')
    rows = ", ".join(
        "[" + ", ".join(str(int(v)) for v in report.confusion[t]) + "]"
        for t in range(k)
    )
    lines.append(f'  "confusion": {{"K": {k}, "counts": [{rows}]}},')
    lines.append(f'  "nll": {_jf(report.nll)},')
    lines.append(f'  "ece": {_jf(report.ece)},')
    if report.temperature is None:
        lines.append('  "temperature": null,')
    else:
        lines.append(f'  "temperature": {_jf(report.temperature)},')
    lines.append(f'  "ece_bins": {report.ece_bins},')
    stats = []
    for count, mean_conf, mean_acc in report.bin_stats:
        mc = "null" if mean_conf is None else _jf(mean_conf)
        ma = "null" if mean_acc is None else _jf(mean_acc)
        stats.append(
            f'    {{"count": {int(count)}, "mean_confidence": {mc}, '
            f'"mean_accuracy": {ma}}}'
        )
    tail = "," if report.per_class is not None else ""
    lines.append('  "bin_stats": [')
    lines.append(",\n".join(stats))
    lines.append(f"  ]{tail}")
    if report.per_class is not None:
        pc = report.per_class
        lines.append('  "per_class": {')
        for i, key in enumerate(("precision", "recall", "f1")):
            vals = ", ".join(_jf(v) for v in pc[key])
            comma = "," if i < 2 else ""
            lines.append(f'    "{key}": [{vals}]{comma}')
        lines.append("  }")
    lines.append("}")
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str | os.PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc}") from exc
