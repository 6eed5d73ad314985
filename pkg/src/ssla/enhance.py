"""Local contrast enhancement via edge-preserving local means.

The enhancement divides the squared luminance by a bilateral-weighted local
mean, which darkens pixels below their neighborhood level and brightens ones
above it while respecting region boundaries.

Two interchangeable local-mean backends:

* ``exact`` — direct evaluation of the truncated kernel (reference semantics,
  cost grows with the square of the truncation radius);
* ``grid`` — downsampled spatial/range grid approximation (default; within a
  fraction of a percent of exact on smooth data and orders of magnitude
  faster at photographic sizes).
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d

from .core import LOCAL_MEAN_FLOOR
from .errors import InputError

DEFAULT_SIGMA_SPATIAL = 16.0
DEFAULT_SIGMA_RANGE = 3.0 / 255.0


def kernel_radius(sigma_spatial: float) -> int:
    """Truncation radius of the exact kernel: ceil(3 * sigma)."""
    return int(np.ceil(3.0 * sigma_spatial))


def _check_map(lum) -> np.ndarray:
    arr = np.asarray(lum, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InputError(f"expected non-empty 2-D luminance map, got shape {arr.shape}")
    return arr


def bilateral_exact(
    lum: np.ndarray,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
) -> np.ndarray:
    """Edge-preserving local mean by direct evaluation.

    Square window of radius ceil(3 * sigma_spatial); windows are clipped at
    image borders and weights renormalized over in-image pixels only.
    """
    l = _check_map(lum)
    h, w = l.shape
    r = kernel_radius(sigma_spatial)
    inv2ss = 1.0 / (2.0 * sigma_spatial * sigma_spatial)
    inv2sr = 1.0 / (2.0 * sigma_range * sigma_range)

    num = l.copy()          # center offset: weight exactly 1
    den = np.ones_like(l)
    for di in range(0, r + 1):
        for dj in range(-r, r + 1):
            if di == 0 and dj <= 0:
                continue  # center handled above; mirrored offsets share a pass
            if di >= h or abs(dj) >= w:
                continue
            sw = np.exp(-(di * di + dj * dj) * inv2ss)
            # overlap views between the image and itself shifted by (di, dj);
            # each unordered pixel pair contributes symmetrically, so one pass
            # updates both endpoints
            if dj >= 0:
                sa = np.s_[: h - di, : w - dj]
                sb = np.s_[di:, dj:]
            else:
                sa = np.s_[: h - di, -dj:]
                sb = np.s_[di:, : w + dj]
            a = l[sa]
            b = l[sb]
            d = a - b
            wgt = sw * np.exp(-(d * d) * inv2sr)
            num[sa] += wgt * b
            den[sa] += wgt
            num[sb] += wgt * a
            den[sb] += wgt
    return num / den


def bilateral_grid(
    lum: np.ndarray,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
) -> np.ndarray:
    """Edge-preserving local mean via a downsampled spatial/range grid.

    Pixels are accumulated into a 3-D grid sampled at (sigma_spatial,
    sigma_spatial, sigma_range), the grid is blurred with a unit-sigma
    Gaussian along each axis, and results are read back by trilinear
    interpolation of the homogeneous (sum, count) pair.
    """
    l = _check_map(lum)
    h, w = l.shape
    lmin = float(l.min())
    lmax = float(l.max())
    if lmax - lmin < 1e-15:
        return l.copy()

    pad = 2
    yf = np.arange(h)[:, None] / sigma_spatial + pad
    xf = np.arange(w)[None, :] / sigma_spatial + pad
    zf = (l - lmin) / sigma_range + pad
    ny = int(np.ceil((h - 1) / sigma_spatial)) + 1 + 2 * pad
    nx = int(np.ceil((w - 1) / sigma_spatial)) + 1 + 2 * pad
    nz = int(np.ceil((lmax - lmin) / sigma_range)) + 1 + 2 * pad

    yi = np.rint(yf).astype(np.int64)
    xi = np.rint(xf).astype(np.int64)
    zi = np.rint(zf).astype(np.int64)
    flat = ((yi * nx + xi) * nz + zi).ravel()
    size = ny * nx * nz
    num = np.bincount(flat, weights=l.ravel(), minlength=size).reshape(ny, nx, nz)
    den = np.bincount(flat, minlength=size).reshape(ny, nx, nz).astype(np.float64)

    k = np.exp(-0.5 * np.arange(-2, 3, dtype=np.float64) ** 2)
    k /= k.sum()
    for axis in range(3):
        num = convolve1d(num, k, axis=axis, mode="constant", cval=0.0)
        den = convolve1d(den, k, axis=axis, mode="constant", cval=0.0)

    out = _trilinear(num, yf, xf, zf)
    cnt = _trilinear(den, yf, xf, zf)
    result = out / np.maximum(cnt, 1e-300)
    return np.where(cnt > 0, result, l)


def _trilinear(grid: np.ndarray, y: np.ndarray, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of ``grid`` at fractional coordinates."""
    y0 = np.floor(y).astype(np.int64)
    x0 = np.floor(x).astype(np.int64)
    z0 = np.floor(z).astype(np.int64)
    ny, nx, nz = grid.shape
    y0 = np.clip(y0, 0, ny - 2)
    x0 = np.clip(x0, 0, nx - 2)
    z0 = np.clip(z0, 0, nz - 2)
    fy = y - y0
    fx = x - x0
    fz = z - z0
    out = np.zeros(np.broadcast(y, x, z).shape, dtype=np.float64)
    for dy in (0, 1):
        wy = np.where(dy, fy, 1.0 - fy)
        for dx in (0, 1):
            wx = np.where(dx, fx, 1.0 - fx)
            for dz in (0, 1):
                wz = np.where(dz, fz, 1.0 - fz)
                out += wy * wx * wz * grid[y0 + dy, x0 + dx, z0 + dz]
    return out


_BACKENDS = {"exact": bilateral_exact, "grid": bilateral_grid}


def local_mean(
    lum: np.ndarray,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
    backend: str = "grid",
) -> np.ndarray:
    """Edge-preserving local mean with a selectable backend."""
    try:
        fn = _BACKENDS[backend]
    except KeyError:
        raise InputError(f"unknown bilateral backend {backend!r}") from None
    return fn(lum, sigma_spatial, sigma_range)


def enhance_contrast(
    lum: np.ndarray,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
    backend: str = "grid",
) -> np.ndarray:
    """Contrast-enhanced luminance: l^2 / max(local_mean(l), 1e-9)."""
    l = _check_map(lum)
    base = local_mean(l, sigma_spatial, sigma_range, backend)
    return l * l / np.maximum(base, LOCAL_MEAN_FLOOR)
