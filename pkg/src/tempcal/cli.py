"""Command-line pipeline: generate data, inject noise, calibrate, evaluate, sweep.

Every subcommand exits 0 on success and 2 on usage or input errors, with
the message on standard error.  Machine-readable results go to files;
standard output carries only short human-readable summaries.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .calibration import T_MAX, T_MIN, apply_temperature, fit_temperature
from .figures import reliability_svg, write_sweep_figures
from .interchange import (
    DatasetManifest,
    FormatError,
    read_logits_csv,
    read_manifest_csv,
    read_pgm,
    write_manifest_csv,
    write_pgm,
    write_report_json,
)
from .metrics import reliability_bins
from .noise import NoiseSpec, inject
from .phantom import PhantomConfig, generate_phantoms
from .rng import stream_seed
from .sweep import SweepConfig, build_report, rows_to_csv, rows_to_markdown, run_sweep

__all__ = ["build_parser", "main"]


def _cmd_gen_data(args) -> int:
    cfg = PhantomConfig(n_per_class=args.n_per_class, side=args.side)
    images, labels = generate_phantoms(cfg, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    entries = []
    for i, (img, label) in enumerate(zip(images, labels)):
        name = f"phantom_{i:04d}.pgm"
        write_pgm(img, os.path.join(args.out_dir, name))
        entries.append((name, int(label)))
    write_manifest_csv(
        DatasetManifest(entries=entries), os.path.join(args.out_dir, "manifest.csv")
    )
    print(f"wrote {len(entries)} images ({args.n_per_class} per class) to {args.out_dir}")
    return 0


def _build_spec(args) -> NoiseSpec:
    kind = args.noise.replace("-", "_")
    if kind == "gaussian":
        wanted = {"mu": args.mu, "sigma": args.sigma}
    elif kind == "salt_pepper":
        wanted = {"salt_prob": args.salt_prob, "pepper_prob": args.pepper_prob}
    else:
        wanted = {"scale": args.scale}
    missing = [k for k, v in wanted.items() if v is None]
    if missing:
        flags = " ".join("--" + k.replace("_", "-") for k in missing)
        raise ValueError(f"--noise {args.noise} requires {flags}")
    return NoiseSpec(kind, wanted)


def _cmd_inject_noise(args) -> int:
    spec = _build_spec(args)
    manifest = read_manifest_csv(args.manifest)
    src_dir = os.path.dirname(os.path.abspath(args.manifest))
    os.makedirs(args.out_dir, exist_ok=True)
    for i, (rel, _) in enumerate(manifest.entries):
        img = read_pgm(os.path.join(src_dir, rel))
        noisy = inject(img, spec, args.seed, i)
        dst = os.path.join(args.out_dir, rel)
        parent = os.path.dirname(dst)
        if parent:
            os.makedirs(parent, exist_ok=True)
        write_pgm(noisy, dst)
    write_manifest_csv(manifest, os.path.join(args.out_dir, "manifest.csv"))
    print(f"injected {spec.label()} into {len(manifest.entries)} images -> {args.out_dir}")
    return 0


def _cmd_calibrate(args) -> int:
    data = read_logits_csv(args.logits)
    fit = fit_temperature(data)
    payload = {
        "temperature": fit.temperature,
        "nll_before": fit.nll_before,
        "nll_after": fit.nll_after,
        "converged": fit.converged,
        "evaluations": fit.evaluations,
    }
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise FormatError(f"cannot write {args.out}: {exc}") from exc
    print(f"{fit.temperature:.3f}")
    return 0


def _cmd_evaluate(args) -> int:
    data = read_logits_csv(args.logits)
    if args.ece_bins < 1:
        raise ValueError("--ece-bins must be >= 1")
    t = args.temperature
    if t is not None and not (T_MIN <= t <= T_MAX):
        raise ValueError(f"temperature {t} outside [{T_MIN}, {T_MAX}]")
    preds = apply_temperature(data, 1.0 if t is None else t)
    bins = reliability_bins(preds, args.ece_bins)
    report = build_report(preds, bins, t, include_per_class=args.per_class)
    write_report_json(report, args.report)
    if args.reliability_svg:
        reliability_svg(bins, args.reliability_svg)
    print(f"accuracy={report.accuracy:.6f} nll={report.nll:.6f} ece={report.ece:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = SweepConfig(
        ece_bins=args.ece_bins,
        n_per_class=args.n_per_class,
        epochs=args.epochs,
        learning_rate=args.lr,
    )
    if args.seed is not None:
        cfg.data_seed = stream_seed(args.seed, 0)
        cfg.noise_seed = stream_seed(args.seed, 1)
        cfg.train_seed = stream_seed(args.seed, 2)
    if args.data_seed is not None:
        cfg.data_seed = args.data_seed
    if args.noise_seed is not None:
        cfg.noise_seed = args.noise_seed
    if args.train_seed is not None:
        cfg.train_seed = args.train_seed

    rows = run_sweep(cfg, progress=lambda label, t: print(f"  {label}: T* = {t:.3f}"))
    rows_to_csv(rows, args.out_csv)
    rows_to_markdown(rows, args.out_md)
    if not args.no_figures:
        fig_dir = args.figures_dir
        if fig_dir is None:
            fig_dir = os.path.dirname(os.path.abspath(args.out_csv))
        for written in write_sweep_figures(rows, fig_dir):
            print(f"wrote {written}")
    print(f"wrote {len(rows)} rows -> {args.out_csv} and {args.out_md}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tempcal",
        description="Temperature-scaling calibration pipeline for noisy image classifiers.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a phantom PGM dataset with a manifest")
    g.add_argument("--out-dir", required=True)
    g.add_argument("--n-per-class", type=int, default=50)
    g.add_argument("--side", type=int, default=64)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_gen_data)

    n = sub.add_parser("inject-noise", help="corrupt every image in a manifest")
    n.add_argument("--manifest", required=True)
    n.add_argument("--out-dir", required=True)
    n.add_argument(
        "--noise",
        required=True,
        choices=["gaussian", "salt-pepper", "poisson", "speckle", "uniform"],
    )
    n.add_argument("--mu", type=float)
    n.add_argument("--sigma", type=float)
    n.add_argument("--salt-prob", type=float)
    n.add_argument("--pepper-prob", type=float)
    n.add_argument("--scale", type=float)
    n.add_argument("--seed", type=int, default=0)
    n.set_defaults(func=_cmd_inject_noise)

    c = sub.add_parser("calibrate", help="fit a temperature on validation logits")
    c.add_argument("logits", help="validation logits CSV")
    c.add_argument("--out", required=True, help="fit result JSON")
    c.set_defaults(func=_cmd_calibrate)

    e = sub.add_parser("evaluate", help="score logits and write a metrics report")
    e.add_argument("logits", help="test logits CSV")
    e.add_argument("--temperature", type=float, default=None)
    e.add_argument("--ece-bins", type=int, default=15)
    e.add_argument("--report", required=True, help="metrics report JSON")
    e.add_argument("--reliability-svg", default=None, help="optional reliability diagram")
    e.add_argument("--per-class", action="store_true")
    e.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("sweep", help="run the noise grid and tabulate calibration gains")
    s.add_argument("--out-csv", required=True)
    s.add_argument("--out-md", required=True)
    s.add_argument("--figures-dir", default=None, help="default: next to the CSV")
    s.add_argument("--no-figures", action="store_true")
    s.add_argument("--seed", type=int, default=None, help="derives all three seeds below")
    s.add_argument("--data-seed", type=int, default=None)
    s.add_argument("--noise-seed", type=int, default=None)
    s.add_argument("--train-seed", type=int, default=None)
    s.add_argument("--ece-bins", type=int, default=15)
    s.add_argument("--n-per-class", type=int, default=SweepConfig.n_per_class)
    s.add_argument("--epochs", type=int, default=SweepConfig.epochs)
    s.add_argument("--lr", type=float, default=SweepConfig.learning_rate)
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
