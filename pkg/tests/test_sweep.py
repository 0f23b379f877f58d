"""Noise-grid sweep orchestration: splitting, row assembly, serialization."""

import numpy as np
import pytest

from tempcal.calibration import apply_temperature
from tempcal.interchange import LabeledLogits
from tempcal.metrics import (
    confusion_matrix,
    ece,
    f1_macro,
    mean_nll,
    precision_macro,
)
from tempcal.noise import NoiseSpec
from tempcal.rng import normals
from tempcal.sweep import (
    SweepConfig,
    SweepRow,
    default_noise_grid,
    evaluate_logits,
    rows_to_csv,
    rows_to_markdown,
    run_sweep,
    split_stratified,
)

_TINY = SweepConfig(
    noise_grid=[
        NoiseSpec("gaussian", {"mu": 0.0, "sigma": 0.05}),
        NoiseSpec("uniform", {"scale": 0.05}),
    ],
    n_per_class=30,
    epochs=40,
)


# ---------------------------------------------------------------------------
# config and splitting
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError, match="nonempty"):
        SweepConfig(noise_grid=[]).validate()
    with pytest.raises(ValueError, match="sum to 1"):
        SweepConfig(train_frac=0.5, val_frac=0.2, test_frac=0.2).validate()
    with pytest.raises(ValueError, match="positive"):
        SweepConfig(train_frac=1.2, val_frac=-0.1, test_frac=-0.1).validate()
    with pytest.raises(ValueError, match="at least 5"):
        SweepConfig(n_per_class=3).validate()
    with pytest.raises(ValueError, match="ece_bins"):
        SweepConfig(ece_bins=0).validate()
    SweepConfig().validate()  # defaults are self-consistent


def test_split_sizes_and_partition():
    labels = np.repeat([0, 1], 200)
    train, val, test = split_stratified(labels, 0.6, 0.2)
    assert len(train) == 240 and len(val) == 80 and len(test) == 80
    combined = np.concatenate([train, val, test])
    assert len(np.unique(combined)) == 400  # disjoint and complete
    for part in (train, val, test):
        assert (labels[part] == 0).sum() == (labels[part] == 1).sum()


def test_split_is_stratified_not_positional():
    # interleaved labels: a purely positional split would be unbalanced
    labels = np.tile([0, 1], 50)
    train, val, test = split_stratified(labels, 0.6, 0.2)
    assert (labels[train] == 0).sum() == 30
    assert (labels[val] == 1).sum() == 10
    assert (labels[test] == 0).sum() == 10


def test_default_grid_composition():
    grid = default_noise_grid()
    assert len(grid) == 19
    kinds = [s.kind for s in grid]
    assert kinds.count("gaussian") == 7
    assert kinds.count("poisson") == 3
    assert kinds.count("salt_pepper") == 3
    assert kinds.count("speckle") == 3
    assert kinds.count("uniform") == 3
    assert len({s.label() for s in grid}) == 19  # labels are unique


# ---------------------------------------------------------------------------
# evaluate_logits against direct metric computation
# ---------------------------------------------------------------------------

def _logit_fixture(n=300, k=3, seed=77):
    z = normals(seed, n * k).reshape(n, k) * 2.0
    y = np.argmax(z, axis=1)
    y[: n // 4] = (y[: n // 4] + 1) % k  # force some errors
    return LabeledLogits(labels=y.astype(np.int64), logits=z)


def test_evaluate_logits_matches_direct_metrics():
    data = _logit_fixture()
    report = evaluate_logits(data, temperature=1.7, ece_bins=10)
    preds = apply_temperature(data, 1.7)
    cm = confusion_matrix(preds)
    assert report.accuracy == pytest.approx(np.trace(cm.counts) / data.n, abs=1e-15)
    assert report.macro_precision == pytest.approx(precision_macro(cm), abs=1e-15)
    assert report.macro_f1 == pytest.approx(f1_macro(cm), abs=1e-15)
    assert report.nll == pytest.approx(mean_nll(preds), abs=1e-15)
    assert report.ece == pytest.approx(ece(preds, 10), abs=1e-15)
    assert report.temperature == 1.7
    assert report.ece_bins == 10
    assert len(report.bin_stats) == 10
    assert report.per_class is None


def test_evaluate_logits_none_means_unit_temperature():
    data = _logit_fixture(seed=78)
    a = evaluate_logits(data, temperature=None)
    b = evaluate_logits(data, temperature=1.0)
    assert a.temperature is None and b.temperature == 1.0
    assert a.nll == b.nll and a.ece == b.ece


def test_evaluate_logits_per_class_block():
    report = evaluate_logits(_logit_fixture(seed=79), include_per_class=True)
    assert set(report.per_class) == {"precision", "recall", "f1"}
    assert all(len(v) == 3 for v in report.per_class.values())


# ---------------------------------------------------------------------------
# the sweep itself (small grid to keep this fast)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tiny_rows():
    return run_sweep(_TINY)


def test_sweep_row_structure(tiny_rows):
    assert len(tiny_rows) == 2 * len(_TINY.noise_grid)
    labels = [s.label() for s in _TINY.noise_grid]
    for i, spec_label in enumerate(labels):
        uncal, cal = tiny_rows[2 * i], tiny_rows[2 * i + 1]
        assert uncal.noise_label == cal.noise_label == spec_label
        assert not uncal.calibrated and cal.calibrated
        assert uncal.optimal_temp is None
        assert 0.05 <= cal.optimal_temp <= 20.0


def test_scaling_preserves_confusion_counts(tiny_rows):
    for i in range(len(_TINY.noise_grid)):
        uncal, cal = tiny_rows[2 * i], tiny_rows[2 * i + 1]
        assert (uncal.tp, uncal.fn, uncal.fp, uncal.tn) == (cal.tp, cal.fn, cal.fp, cal.tn)
        assert uncal.precision == cal.precision
        assert uncal.recall == cal.recall
        assert uncal.f1 == cal.f1


def test_sweep_counts_cover_test_split(tiny_rows):
    n_test = 2 * (30 - int(30 * 0.6) - int(30 * 0.2))
    for row in tiny_rows:
        assert row.tp + row.fn + row.fp + row.tn == n_test


def test_sweep_is_deterministic(tiny_rows):
    again = run_sweep(_TINY)
    assert again == tiny_rows


def test_progress_callback_sees_each_setting():
    seen = []
    cfg = SweepConfig(
        noise_grid=[NoiseSpec("uniform", {"scale": 0.02})],
        n_per_class=20,
        epochs=10,
    )
    run_sweep(cfg, progress=lambda label, t: seen.append((label, t)))
    assert len(seen) == 1
    assert seen[0][0] == "uniform scale=0.02"
    assert 0.05 <= seen[0][1] <= 20.0


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_ROWS = [
    SweepRow("gaussian mu=0 sigma=0.1", False, 0.9125, 0.9, 0.90625,
             18, 2, 1, 19, 0.51234567, 0.08123, None),
    SweepRow("gaussian mu=0 sigma=0.1", True, 0.9125, 0.9, 0.90625,
             18, 2, 1, 19, 0.41234567, 0.04321, 1.2345678),
]


def test_csv_layout(tmp_path):
    path = tmp_path / "rows.csv"
    rows_to_csv(_ROWS, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "noise,calibrated,precision,recall,f1,tp,fn,fp,tn,nll,ece,optimal_temp"
    assert lines[1] == ("gaussian mu=0 sigma=0.1,no,0.9125,0.9,0.90625,"
                        "18,2,1,19,0.51234567,0.08123,")
    assert lines[2].endswith(",0.41234567,0.04321,1.2345678")
    assert len(lines) == 3


def test_csv_keeps_full_float_precision(tmp_path):
    row = SweepRow("uniform scale=0.1", True, 1 / 3, 2 / 3, 0.1 + 0.2,
                   1, 0, 0, 1, 1 / 7, 1 / 9, 1 / 11)
    path = tmp_path / "rows.csv"
    rows_to_csv([row], path)
    cells = path.read_text(encoding="utf-8").splitlines()[1].split(",")
    assert float(cells[2]) == 1 / 3
    assert float(cells[4]) == 0.1 + 0.2
    assert float(cells[-1]) == 1 / 11


def test_markdown_layout(tmp_path):
    path = tmp_path / "rows.md"
    rows_to_markdown(_ROWS, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ("| Noise | Variant | Prec | Rec | F1 | TP | FN | FP | TN "
                        "| NLL | ECE | Optimal Temp |")
    assert set(lines[1].replace("|", "").replace(" ", "")) == {"-"}
    assert lines[2] == ("| gaussian mu=0 sigma=0.1 | uncalibrated | 0.915 | 0.9 "
                        "| 0.905 | 18 | 2 | 1 | 19 | 0.512 | 0.081 | - |")
    assert lines[3].endswith("| 0.412 | 0.043 | 1.235 |")
    assert "calibrated" in lines[3]


def test_markdown_rounds_rates_to_half_percent_grid(tmp_path):
    # 0.9871 sits between grid points 0.985 and 0.990; nearest is 0.985
    row = SweepRow("uniform scale=0.1", False, 0.9871, 0.9874, 0.99749,
                   1, 0, 0, 1, 0.5, 0.1, None)
    path = tmp_path / "rows.md"
    rows_to_markdown([row], path)
    body = path.read_text(encoding="utf-8").splitlines()[2]
    cells = [c.strip() for c in body.split("|")]
    assert cells[3] == "0.985"
    assert cells[4] == "0.985"
    assert cells[5] == "0.995"  # 0.99749 is closer to 0.995 than to 1
