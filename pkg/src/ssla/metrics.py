"""Objective quality measures of a fused image.

Both measures look at the display-encoded rendition (what a viewer sees):

* :func:`entropy_bits` — Shannon entropy of the 256-level gray histogram;
  higher means more of the tonal range carries information.
* :func:`naturalness` — joint likelihood of global brightness and average
  local contrast under statistics of natural images, normalized so the
  best attainable score is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist
from scipy.stats import norm as norm_dist

from .errors import InputError
from .imageio import LUMA_WEIGHTS, oetf


@dataclass(frozen=True)
class NaturalnessParams:
    """Natural-image statistics for the naturalness score (0-255 gray scale)."""

    brightness_mean: float = 115.94
    brightness_std: float = 27.99
    spread_scale: float = 64.29
    spread_a: float = 4.4
    spread_b: float = 10.1
    patch: int = 11


def _gray255(image: np.ndarray) -> np.ndarray:
    """Display-encoded gray channel on the 0-255 scale (float, unrounded)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InputError(f"expected (H, W, 3) image, got shape {img.shape}")
    enc = oetf(np.clip(img, 0.0, 1.0))
    return 255.0 * (enc @ LUMA_WEIGHTS)


def entropy_bits(image: np.ndarray) -> float:
    """Shannon entropy (bits) of the rounded 256-level gray histogram."""
    codes = np.clip(np.rint(_gray255(image)), 0, 255).astype(np.int64)
    hist = np.bincount(codes.ravel(), minlength=256)
    p = hist[hist > 0] / codes.size
    return float(-(p * np.log2(p)).sum())


def patch_stats(image: np.ndarray, patch: int = 11, stride: int | None = None):
    """Mean and population std of gray values per patch.

    Tiles of ``patch`` x ``patch`` pixels starting at the top-left corner,
    stepping by ``stride`` (defaults to ``patch``, i.e. non-overlapping);
    partial tiles at the right/bottom edges are included as-is. Returns
    (means, stds) as flat arrays, one entry per tile.
    """
    if stride is None:
        stride = patch
    if stride < 1:
        raise InputError("stride must be >= 1")
    gray = _gray255(image)
    h, w = gray.shape
    means = []
    stds = []
    for i in range(0, h, stride):
        for j in range(0, w, stride):
            tile = gray[i : i + patch, j : j + patch]
            means.append(tile.mean())
            stds.append(tile.std())
    return np.array(means), np.array(stds)


def naturalness(image: np.ndarray, params: NaturalnessParams = NaturalnessParams(),
                stride: int | None = None) -> float:
    """Statistical naturalness in [0, 1].

    Global brightness (mean of patch means) is scored under a Gaussian;
    average local contrast (mean of patch stds, divided by ``spread_scale``)
    under a Beta density. The product is divided by its maximum attainable
    value so a perfectly natural image scores 1.
    """
    means, stds = patch_stats(image, params.patch, stride)
    brightness = float(means.mean())
    spread = float(stds.mean()) / params.spread_scale

    b_score = norm_dist.pdf(brightness, params.brightness_mean, params.brightness_std)
    s_score = beta_dist.pdf(spread, params.spread_a, params.spread_b)

    b_peak = norm_dist.pdf(params.brightness_mean, params.brightness_mean, params.brightness_std)
    mode = (params.spread_a - 1.0) / (params.spread_a + params.spread_b - 2.0)
    s_peak = beta_dist.pdf(mode, params.spread_a, params.spread_b)
    return float(b_score * s_score / (b_peak * s_peak))
