"""Multi-exposure fusion by pyramidal weighted blending.

Per-pixel weights combine local contrast (absolute 4-neighbor Laplacian of
the gray channel), color saturation (per-pixel channel standard deviation),
and well-exposedness (Gaussian preference for mid-range values). Weighted
blending happens per level of a Laplacian pyramid against the weights'
Gaussian pyramid, which avoids seams at region boundaries.

Fusion operates on the display-encoded rendition by default (mid-range
preference and contrast are perceptual notions); the result is decoded back
to linear so every stage of the pipeline speaks linear RGB.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve, convolve1d

from .core import WEIGHT_FLOOR
from .errors import InputError
from .imageio import LUMA_WEIGHTS, eotf, oetf

# Binomial blur kernel used for all pyramid up/down filtering.
PYRAMID_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

# Well-exposedness preference: Gaussian around mid-range.
EXPOSEDNESS_CENTER = 0.5
EXPOSEDNESS_SIGMA = 0.2

_LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def pyramid_depth(height: int, width: int) -> int:
    """Number of pyramid levels: floor(log2(min side)) - 1, at least 1."""
    side = min(height, width)
    if side < 1:
        raise InputError("empty image")
    return max(1, int(np.floor(np.log2(side))) - 1)


def _blur(img: np.ndarray) -> np.ndarray:
    """Separable binomial blur with border clamp."""
    out = convolve1d(img, PYRAMID_KERNEL, axis=0, mode="nearest")
    return convolve1d(out, PYRAMID_KERNEL, axis=1, mode="nearest")


def _downsample(img: np.ndarray) -> np.ndarray:
    """Blur then keep even rows/columns (sizes round up)."""
    return _blur(img)[::2, ::2]


def _upsample(img: np.ndarray, shape) -> np.ndarray:
    """Zero-stuff to ``shape`` and blur with doubled kernel.

    Border weights are renormalized so edge pixels average only real
    samples (the zero-stuffed lattice otherwise biases borders dark).
    """
    h, w = shape
    up = np.zeros((h, w) + img.shape[2:], dtype=np.float64)
    up[::2, ::2] = img
    kernel = 2.0 * PYRAMID_KERNEL
    out = convolve1d(up, kernel, axis=0, mode="constant", cval=0.0)
    out = convolve1d(out, kernel, axis=1, mode="constant", cval=0.0)

    ones = np.zeros((h, w), dtype=np.float64)
    ones[::2, ::2] = 1.0
    den = convolve1d(ones, kernel, axis=0, mode="constant", cval=0.0)
    den = convolve1d(den, kernel, axis=1, mode="constant", cval=0.0)
    if out.ndim == 3:
        den = den[:, :, None]
    return out / den


def gaussian_pyramid(img: np.ndarray, depth: int) -> list:
    """Progressively blurred and halved copies; level 0 is the input."""
    levels = [np.asarray(img, dtype=np.float64)]
    for _ in range(depth - 1):
        levels.append(_downsample(levels[-1]))
    return levels


def laplacian_pyramid(img: np.ndarray, depth: int) -> list:
    """Band-pass residuals per level; the last level is the low-pass base."""
    gauss = gaussian_pyramid(img, depth)
    levels = []
    for i in range(depth - 1):
        levels.append(gauss[i] - _upsample(gauss[i + 1], gauss[i].shape[:2]))
    levels.append(gauss[-1])
    return levels


def collapse_pyramid(levels: list) -> np.ndarray:
    """Invert :func:`laplacian_pyramid` exactly (up to float rounding)."""
    acc = levels[-1]
    for lap in levels[-2::-1]:
        acc = lap + _upsample(acc, lap.shape[:2])
    return acc


def fusion_weights(images) -> np.ndarray:
    """Per-pixel normalized blending weights, shape (M, H, W).

    Raw weight = contrast * saturation * well-exposedness, floored at 1e-12
    so all-zero pixels fall back to uniform blending, then normalized to sum
    to 1 across the stack at every pixel.
    """
    raw = []
    for img in images:
        img = np.asarray(img, dtype=np.float64)
        gray = img @ LUMA_WEIGHTS
        contrast = np.abs(convolve(gray, _LAPLACIAN_KERNEL, mode="nearest"))
        saturation = img.std(axis=2)
        spread = (img - EXPOSEDNESS_CENTER) ** 2
        exposedness = np.exp(-spread.sum(axis=2) / (2.0 * EXPOSEDNESS_SIGMA**2))
        raw.append(contrast * saturation * exposedness)
    w = np.maximum(np.stack(raw), WEIGHT_FLOOR)
    return w / w.sum(axis=0)


def fuse_mertens(images, depth: int | None = None) -> np.ndarray:
    """Pyramidal weighted blend of an image stack (any length >= 1)."""
    images = [np.asarray(im, dtype=np.float64) for im in images]
    if not images:
        raise InputError("empty stack")
    h, w = images[0].shape[:2]
    if depth is None:
        depth = pyramid_depth(h, w)
    weights = fusion_weights(images)
    blended = None
    for img, wmap in zip(images, weights):
        lap = laplacian_pyramid(img, depth)
        gw = gaussian_pyramid(wmap, depth)
        contrib = [lev * gwl[:, :, None] for lev, gwl in zip(lap, gw)]
        if blended is None:
            blended = contrib
        else:
            blended = [b + c for b, c in zip(blended, contrib)]
    return np.clip(collapse_pyramid(blended), 0.0, 1.0)


def fuse_average(images) -> np.ndarray:
    """Plain per-pixel mean of the stack (baseline)."""
    images = [np.asarray(im, dtype=np.float64) for im in images]
    if not images:
        raise InputError("empty stack")
    return np.clip(np.mean(images, axis=0), 0.0, 1.0)


_METHODS = {"mertens": fuse_mertens, "average": fuse_average}


def fuse_images(images, method: str = "mertens", domain: str = "encoded") -> np.ndarray:
    """Fuse a stack of linear images; returns a linear image in [0, 1].

    ``domain`` selects where blending happens: ``encoded`` (default)
    display-encodes each input (clipping to [0, 1]), fuses, and decodes the
    result back to linear; ``linear`` fuses the linear values directly.
    """
    try:
        fn = _METHODS[method]
    except KeyError:
        raise InputError(f"unknown fusion method {method!r}") from None
    if domain == "encoded":
        encoded = [oetf(np.clip(np.asarray(im, dtype=np.float64), 0.0, 1.0)) for im in images]
        return eotf(fn(encoded))
    if domain == "linear":
        return fn(images)
    raise InputError(f"unknown fusion domain {domain!r}")
