"""Seeded parametric noise injectors for grayscale images.

Five families: additive Gaussian, salt & pepper impulse, signal-dependent
Poisson, multiplicative speckle, and additive uniform.  Outputs are
clipped to [0, 1] and fully determined by (image, parameters, stream
seed): pixel at row-major index i consumes a fixed counter range of the
stream, so injection commutes with cropping when the crop's pixels keep
their original indices (see ``pixel_index_offset``).

Counter layout per pixel index g:
  gaussian / speckle   counters 2g, 2g+1 (one normal)
  salt_pepper / uniform  counter g (one uniform)
  poisson              counters [128g, 128(g+1)): slot 0 for inversion,
                       slot pairs (2j, 2j+1) for rejection attempt j
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .interchange import GrayImage
from .rng import normals_at, stream_seed, uniforms_at

__all__ = [
    "NoiseSpec",
    "inject_gaussian",
    "inject_salt_pepper",
    "inject_poisson",
    "inject_speckle",
    "inject_uniform",
    "inject",
]

_POISSON_BLOCK = 128  # reserved counters per pixel
_POISSON_INVERSION_MAX = 30.0  # inversion below, transformed rejection above
_PTRS_MAX_ATTEMPTS = 63


def _pixel_indices(img: GrayImage, offset: int) -> np.ndarray:
    n = img.pixels.size
    return np.arange(offset, offset + n, dtype=np.uint64)


def inject_gaussian(
    img: GrayImage, mu: float, sigma: float, seed: int, pixel_index_offset: int = 0
) -> GrayImage:
    """Add i.i.d. Normal(mu, sigma^2) per pixel, then clip to [0, 1]."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    g = normals_at(seed, _pixel_indices(img, pixel_index_offset))
    out = img.pixels + (g.reshape(img.pixels.shape) * sigma + mu)
    return GrayImage(pixels=np.clip(out, 0.0, 1.0))


def inject_salt_pepper(
    img: GrayImage,
    salt_prob: float,
    pepper_prob: float,
    seed: int,
    pixel_index_offset: int = 0,
) -> GrayImage:
    """Force pixels to white with salt_prob, black with pepper_prob.

    One uniform draw per pixel, partitioned salt-first so the two events
    are disjoint.
    """
    if not (0.0 <= salt_prob <= 1.0 and 0.0 <= pepper_prob <= 1.0):
        raise ValueError("salt_prob and pepper_prob must lie in [0, 1]")
    if salt_prob + pepper_prob > 1.0:
        raise ValueError("salt_prob + pepper_prob must be <= 1")
    u = uniforms_at(seed, _pixel_indices(img, pixel_index_offset))
    u = u.reshape(img.pixels.shape)
    out = np.where(u < salt_prob, 1.0, np.where(u < salt_prob + pepper_prob, 0.0, img.pixels))
    return GrayImage(pixels=out)


def inject_poisson(
    img: GrayImage, scale: float, seed: int, pixel_index_offset: int = 0
) -> GrayImage:
    """Photon-count noise: Poisson(pixel * 255 * scale) renormalized.

    Larger scale means a larger photon budget and therefore less
    relative noise.  Zero pixels stay zero.
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    lam = img.pixels.ravel() * (255.0 * scale)
    counts = _poisson_field(lam, seed, _pixel_indices(img, pixel_index_offset))
    out = counts.astype(np.float64) / (255.0 * scale)
    return GrayImage(pixels=np.clip(out, 0.0, 1.0).reshape(img.pixels.shape))


def inject_speckle(
    img: GrayImage, scale: float, seed: int, pixel_index_offset: int = 0
) -> GrayImage:
    """Multiplicative noise: pixel * (1 + Normal(0, scale^2)), clipped."""
    if scale < 0:
        raise ValueError("scale must be >= 0")
    g = normals_at(seed, _pixel_indices(img, pixel_index_offset))
    out = img.pixels * (1.0 + g.reshape(img.pixels.shape) * scale)
    return GrayImage(pixels=np.clip(out, 0.0, 1.0))


def inject_uniform(
    img: GrayImage, scale: float, seed: int, pixel_index_offset: int = 0
) -> GrayImage:
    """Add i.i.d. Uniform[-scale, +scale] per pixel, then clip."""
    if scale < 0:
        raise ValueError("scale must be >= 0")
    u = uniforms_at(seed, _pixel_indices(img, pixel_index_offset))
    out = img.pixels + (u.reshape(img.pixels.shape) * (2.0 * scale) - scale)
    return GrayImage(pixels=np.clip(out, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Deterministic Poisson sampling
# ---------------------------------------------------------------------------

def _poisson_field(lam: np.ndarray, seed: int, indices: np.ndarray) -> np.ndarray:
    """Poisson draws, one per index, each from its own counter block."""
    lam = np.asarray(lam, dtype=np.float64)
    out = np.zeros(lam.shape, dtype=np.int64)
    small = lam < _POISSON_INVERSION_MAX
    if np.any(small):
        out[small] = _poisson_inversion(lam[small], seed, indices[small])
    big = ~small
    if np.any(big):
        out[big] = _poisson_ptrs(lam[big], seed, indices[big])
    return out


def _poisson_inversion(lam, seed, indices):
    """Sequential-search CDF inversion; one uniform per draw (slot 0)."""
    with np.errstate(over="ignore"):
        u = uniforms_at(seed, indices * np.uint64(_POISSON_BLOCK))
    k = np.zeros(lam.shape, dtype=np.int64)
    p = np.exp(-lam)
    cdf = p.copy()
    active = u > cdf
    # lam < 30 puts the needed k far below the cap; cap guards against
    # float cdf saturation for u within an ulp of 1
    for _ in range(600):
        if not np.any(active):
            break
        k[active] += 1
        p[active] *= lam[active] / k[active]
        cdf[active] += p[active]
        active[active] = u[active] > cdf[active]
    return k


def _poisson_ptrs(lam, seed, indices):
    """Hoermann's transformed rejection with squeeze, counter-stable.

    Attempt j for a pixel reads counters (2j, 2j+1) of its block, so the
    draw for one pixel never depends on how many attempts another pixel
    needed.
    """
    base = indices * np.uint64(_POISSON_BLOCK)
    b = 0.931 + 2.53 * np.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_lam = np.log(lam)

    k = np.zeros(lam.shape, dtype=np.int64)
    pending = np.ones(lam.shape, dtype=bool)
    for attempt in range(_PTRS_MAX_ATTEMPTS):
        if not np.any(pending):
            break
        idx = np.flatnonzero(pending)
        with np.errstate(over="ignore"):
            slot = base[idx] + np.uint64(2 * attempt)
            u = uniforms_at(seed, slot) - 0.5
            v = uniforms_at(seed, slot + np.uint64(1))
        us = 0.5 - np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            kk = np.floor((2.0 * a[idx] / us + b[idx]) * u + lam[idx] + 0.43)
            accept = (us >= 0.07) & (v <= v_r[idx])
            bad = (kk < 0) | ((us < 0.013) & (v > us))
            lhs = np.log(v) + np.log(inv_alpha[idx]) - np.log(a[idx] / (us * us) + b[idx])
            rhs = kk * log_lam[idx] - lam[idx] - gammaln(kk + 1.0)
            accept |= ~bad & (lhs <= rhs)
        accept &= np.isfinite(kk)
        chosen = idx[accept]
        k[chosen] = kk[accept].astype(np.int64)
        pending[chosen] = False
    if np.any(pending):
        # acceptance odds make 63 failures astronomically unlikely
        k[pending] = np.floor(lam[pending]).astype(np.int64)
    return k


# ---------------------------------------------------------------------------
# Parametric spec
# ---------------------------------------------------------------------------

_KINDS = ("gaussian", "salt_pepper", "poisson", "speckle", "uniform")


@dataclass(frozen=True)
class NoiseSpec:
    """One noise family plus its parameters, validated per kind."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        p = self.params
        if self.kind == "gaussian":
            if set(p) != {"mu", "sigma"}:
                raise ValueError("gaussian noise takes mu and sigma")
            if p["sigma"] < 0:
                raise ValueError("sigma must be >= 0")
        elif self.kind == "salt_pepper":
            if set(p) != {"salt_prob", "pepper_prob"}:
                raise ValueError("salt_pepper noise takes salt_prob and pepper_prob")
            sp, pp = p["salt_prob"], p["pepper_prob"]
            if not (0.0 <= sp <= 1.0 and 0.0 <= pp <= 1.0 and sp + pp <= 1.0):
                raise ValueError("salt/pepper probabilities invalid")
        else:
            if set(p) != {"scale"}:
                raise ValueError(f"{self.kind} noise takes scale")
            if self.kind == "poisson" and p["scale"] <= 0:
                raise ValueError("poisson scale must be > 0")
            if self.kind in ("speckle", "uniform") and p["scale"] < 0:
                raise ValueError("scale must be >= 0")

    def apply(self, img: GrayImage, seed: int, pixel_index_offset: int = 0) -> GrayImage:
        p = self.params
        if self.kind == "gaussian":
            return inject_gaussian(img, p["mu"], p["sigma"], seed, pixel_index_offset)
        if self.kind == "salt_pepper":
            return inject_salt_pepper(
                img, p["salt_prob"], p["pepper_prob"], seed, pixel_index_offset
            )
        if self.kind == "poisson":
            return inject_poisson(img, p["scale"], seed, pixel_index_offset)
        if self.kind == "speckle":
            return inject_speckle(img, p["scale"], seed, pixel_index_offset)
        return inject_uniform(img, p["scale"], seed, pixel_index_offset)

    def label(self) -> str:
        order = {
            "gaussian": ("mu", "sigma"),
            "salt_pepper": ("salt_prob", "pepper_prob"),
        }.get(self.kind, ("scale",))
        parts = " ".join(f"{k}={format(self.params[k], 'g')}" for k in order)
        return f"{self.kind} {parts}"


def inject(img: GrayImage, spec: NoiseSpec, base_seed: int, image_index: int) -> GrayImage:
    """Apply `spec` to one image using its index-derived stream."""
    return spec.apply(img, stream_seed(base_seed, image_index))
