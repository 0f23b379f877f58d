"""Synthetic two-class phantom images and a small reference classifier.

Class 1 images carry one bright disc over a textured background; class 0
images are background only.  The background mixes a random base level,
a few smooth Gaussian bumps, and per-pixel noise, so dim small discs and
bright bumps genuinely overlap and the task has irreducible error.  The
classifier is a two-layer MLP on 8x8 block-mean features trained with
plain mini-batch gradient descent; everything is a pure function of the
seeds.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .interchange import GrayImage
from .rng import normals_at, permutation, stream_seed, uniforms

__all__ = [
    "PhantomConfig",
    "RefModel",
    "generate_phantoms",
    "featurize",
    "train_ref_model",
    "model_logits",
    "save_model",
    "load_model",
]

# background texture (not exposed in PhantomConfig)
_BASE_LEVEL = (0.18, 0.30)
_BUMP_COUNT = (2, 4)
_BUMP_SIGMA = (4.0, 12.0)
_BUMP_AMPLITUDE = (0.05, 0.35)

# counter layout inside one image stream: pixel noise uses the low
# counters (2 per pixel), scalar parameter draws start here
_PARAM_COUNTER_BASE = 1 << 40

_FEATURE_GRID = 8


@dataclass
class PhantomConfig:
    n_per_class: int
    side: int = 64
    blob_radius: tuple = (6.0, 14.0)
    blob_intensity: tuple = (0.6, 0.9)
    background_noise_sigma: float = 0.05

    def validate(self):
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if self.side < 16:
            raise ValueError("side must be >= 16")
        r_lo, r_hi = self.blob_radius
        if not (0 < r_lo <= r_hi < self.side / 2):
            raise ValueError("blob_radius range invalid for this side length")
        i_lo, i_hi = self.blob_intensity
        if not (0.0 <= i_lo <= i_hi <= 1.0):
            raise ValueError("blob_intensity range must lie within [0, 1]")
        if self.background_noise_sigma < 0:
            raise ValueError("background_noise_sigma must be >= 0")


def _uniform_in(u: float, lo: float, hi: float) -> float:
    return lo + u * (hi - lo)


def _render_phantom(cfg: PhantomConfig, seed: int, with_blob: bool) -> GrayImage:
    side = cfg.side
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)

    # scalar parameters from the reserved counter range
    pu = uniforms(seed, 32, start=_PARAM_COUNTER_BASE)
    base = _uniform_in(pu[0], *_BASE_LEVEL)
    n_bumps = _BUMP_COUNT[0] + int(pu[1] * (_BUMP_COUNT[1] - _BUMP_COUNT[0] + 1))
    n_bumps = min(n_bumps, _BUMP_COUNT[1])

    img = np.full((side, side), base)
    for j in range(n_bumps):
        cx = pu[2 + 4 * j] * side
        cy = pu[3 + 4 * j] * side
        sig = _uniform_in(pu[4 + 4 * j], *_BUMP_SIGMA)
        amp = _uniform_in(pu[5 + 4 * j], *_BUMP_AMPLITUDE)
        img += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sig * sig))

    if with_blob:
        du = uniforms(seed, 4, start=_PARAM_COUNTER_BASE + 100)
        radius = _uniform_in(du[0], *cfg.blob_radius)
        cx = _uniform_in(du[1], radius, side - radius)
        cy = _uniform_in(du[2], radius, side - radius)
        intensity = _uniform_in(du[3], *cfg.blob_intensity)
        inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius
        img = np.where(inside, intensity, img)

    noise = normals_at(seed, np.arange(side * side, dtype=np.uint64))
    img += noise.reshape(side, side) * cfg.background_noise_sigma
    return GrayImage(pixels=np.clip(img, 0.0, 1.0))


def generate_phantoms(cfg: PhantomConfig, base_seed: int):
    """All class-0 images first, then class-1; image i owns stream i.

    Returns (images, labels) with exactly n_per_class images per class.
    """
    cfg.validate()
    images = []
    labels = []
    for label in (0, 1):
        for j in range(cfg.n_per_class):
            index = label * cfg.n_per_class + j
            images.append(_render_phantom(cfg, stream_seed(base_seed, index), label == 1))
            labels.append(label)
    return images, np.array(labels, dtype=np.int64)


def featurize(img: GrayImage) -> np.ndarray:
    """8x8 block means, row-major; remainder pixels go to the last block."""
    g = _FEATURE_GRID
    h, w = img.pixels.shape
    if h < g or w < g:
        raise ValueError(f"image must be at least {g}x{g}")
    row_edges = [i * (h // g) for i in range(g)] + [h]
    col_edges = [j * (w // g) for j in range(g)] + [w]
    out = np.empty(g * g)
    for i in range(g):
        for j in range(g):
            block = img.pixels[row_edges[i] : row_edges[i + 1], col_edges[j] : col_edges[j + 1]]
            out[i * g + j] = block.mean()
    return out


def featurize_all(images) -> np.ndarray:
    return np.stack([featurize(im) for im in images])


# ---------------------------------------------------------------------------
# Reference model: linear -> ReLU -> linear, softmax cross-entropy
# ---------------------------------------------------------------------------

@dataclass
class RefModel:
    w1: np.ndarray  # (D, H)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H, 2)
    b2: np.ndarray  # (2,)
    hyperparams: dict = field(default_factory=dict)

    @property
    def layer_sizes(self):
        return [self.w1.shape[0], self.w1.shape[1], self.w2.shape[1]]

    def validate(self):
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise ValueError("model weights must be finite")
        if self.w2.shape[1] != 2:
            raise ValueError("output dimension must be 2")


def _forward(x, w1, b1, w2, b2):
    hidden = np.maximum(x @ w1 + b1, 0.0)
    return hidden @ w2 + b2, hidden


def _softmax_rows(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(x, y, w1, b1, w2, b2):
    """Mean softmax cross-entropy over the batch and its parameter grads."""
    n = x.shape[0]
    logits, hidden = _forward(x, w1, b1, w2, b2)
    p = _softmax_rows(logits)
    z_shift = logits - logits.max(axis=1, keepdims=True)
    log_p = z_shift - np.log(np.exp(z_shift).sum(axis=1, keepdims=True))
    loss = -np.mean(log_p[np.arange(n), y])

    g = p.copy()
    g[np.arange(n), y] -= 1.0
    g /= n
    dw2 = hidden.T @ g
    db2 = g.sum(axis=0)
    dh = g @ w2.T
    dh[hidden <= 0.0] = 0.0
    dw1 = x.T @ dh
    db1 = dh.sum(axis=0)
    return loss, dw1, db1, dw2, db2


def _glorot(seed: int, rows: int, cols: int, stream: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    u = uniforms(stream_seed(seed, stream), rows * cols)
    return (u * 2.0 - 1.0).reshape(rows, cols) * limit


def init_model(dim: int, hidden: int, seed: int) -> RefModel:
    return RefModel(
        w1=_glorot(seed, dim, hidden, 0),
        b1=np.zeros(hidden),
        w2=_glorot(seed, hidden, 2, 1),
        b2=np.zeros(2),
        hyperparams={"seed": seed, "hidden": hidden},
    )


def train_ref_model(
    features: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    lr: float,
    seed: int,
    hidden: int = 64,
    batch_size: int = 64,
) -> RefModel:
    """Mini-batch gradient descent; deterministic shuffling per epoch."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two examples")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")

    model = init_model(x.shape[1], hidden, seed)
    model.hyperparams.update(
        {"epochs": epochs, "learning_rate": lr, "batch_size": batch_size}
    )
    shuffle_seed = stream_seed(seed, 2)
    n = x.shape[0]
    for epoch in range(epochs):
        order = permutation(shuffle_seed, n, round_index=epoch)
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            _, dw1, db1, dw2, db2 = loss_and_grads(
                x[sel], y[sel], model.w1, model.b1, model.w2, model.b2
            )
            model.w1 -= lr * dw1
            model.b1 -= lr * db1
            model.w2 -= lr * dw2
            model.b2 -= lr * db2
    model.validate()
    return model


def model_logits(model: RefModel, features: np.ndarray, labels: np.ndarray):
    """Raw pre-softmax outputs paired with the given labels."""
    from .interchange import LabeledLogits

    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.w1.shape[0]:
        raise ValueError(
            f"feature dimension {x.shape} does not match model input {model.w1.shape[0]}"
        )
    logits, _ = _forward(x, model.w1, model.b1, model.w2, model.b2)
    return LabeledLogits(labels=np.asarray(labels, dtype=np.int64), logits=logits)


def save_model(model: RefModel, path: str | os.PathLike) -> None:
    model.validate()
    doc = {
        "layer_sizes": model.layer_sizes,
        "w1": model.w1.ravel().tolist(),
        "b1": model.b1.tolist(),
        "w2": model.w2.ravel().tolist(),
        "b2": model.b2.tolist(),
        "hyperparams": model.hyperparams,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> RefModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    d, h, out = doc["layer_sizes"]
    model = RefModel(
        w1=np.array(doc["w1"]).reshape(d, h),
        b1=np.array(doc["b1"]),
        w2=np.array(doc["w2"]).reshape(h, out),
        b2=np.array(doc["b2"]),
        hyperparams=dict(doc.get("hyperparams", {})),
    )
    model.validate()
    return model
