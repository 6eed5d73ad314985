"""Synthetic high-dynamic-range scenes and exposure stack generation.

A scene is a linear radiance field normalized so its log-average luminance
is middle gray (0.18); an exposure at value v is clamp(2^v * scene, 0, 1).
Built-in scenes are procedural and bit-reproducible for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .core import TARGET_GRAY, geometric_mean
from .errors import InputError
from .imageio import LUMA_WEIGHTS, luminance


@dataclass
class HdrScene:
    """Linear radiance field (H, W, 3) with log-average luminance 0.18."""

    data: np.ndarray
    name: str = "scene"

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise InputError(f"expected (H, W, 3) radiance, got {self.data.shape}")


def normalize_scene(radiance: np.ndarray, name: str = "scene") -> HdrScene:
    """Scale a radiance field so its log-average luminance is 0.18."""
    rad = np.asarray(radiance, dtype=np.float64)
    key = geometric_mean(luminance(rad))
    return HdrScene(rad * (TARGET_GRAY / key), name)


def expose(scene: HdrScene, ev: float) -> np.ndarray:
    """Simulated exposure at ``ev`` stops: clamp(2^ev * radiance, 0, 1)."""
    return np.clip(np.exp2(float(ev)) * scene.data, 0.0, 1.0)


def make_stack(scene: HdrScene, evs) -> list:
    """One exposure per entry of ``evs``."""
    if len(evs) == 0:
        raise InputError("need at least one exposure value")
    return [expose(scene, v) for v in evs]


def random_evs(n: int, lo: float = -7.0, hi: float = 0.0,
               rng: np.random.Generator | None = None, seed: int = 0) -> np.ndarray:
    """``n`` exposure values drawn uniformly from [lo, hi], sorted ascending."""
    if n < 1:
        raise InputError("need at least one exposure value")
    if rng is None:
        rng = np.random.default_rng(seed)
    return np.sort(rng.uniform(lo, hi, size=n))


# ---------------------------------------------------------------------------
# procedural scenes
# ---------------------------------------------------------------------------

def _smooth_field(shape, rng: np.random.Generator, cells: int = 8,
                  strength: float = 0.35, fine_weight: float = 0.0) -> np.ndarray:
    """Mean-one multiplicative texture: exp of smooth Gaussian noise.

    ``fine_weight`` > 0 mixes in a 4x finer octave for object-scale detail,
    giving a region a photo-like internal tonal range.
    """
    h, w = shape
    coarse = rng.normal(0.0, 1.0, size=(cells, cells))
    field = cv2.resize(coarse, (w, h), interpolation=cv2.INTER_CUBIC)
    if fine_weight > 0:
        fine = rng.normal(0.0, 1.0, size=(min(4 * cells, max(h, w)),) * 2)
        field = field + fine_weight * cv2.resize(fine, (w, h), interpolation=cv2.INTER_CUBIC)
    tex = np.exp(strength * field)
    return tex / tex.mean()


def _colorize(lum: np.ndarray, chroma) -> np.ndarray:
    """Give a luminance field a chromaticity without changing its luminance."""
    c = np.asarray(chroma, dtype=np.float64)
    c = c / (c @ LUMA_WEIGHTS)
    return lum[:, :, None] * c[None, None, :]


def _region_luminance(base: float, mask: np.ndarray, rng, cells=8, strength=0.35,
                      fine_weight: float = 0.0):
    """Textured region with arithmetic-mean luminance exactly ``base``."""
    tex = _smooth_field(mask.shape, rng, cells, strength, fine_weight)
    tex = tex / tex[mask].mean() if mask.any() else tex
    return base * tex


def scene_bimodal(size=(256, 256), seed: int = 0) -> HdrScene:
    """Dark textured interior and a bright window, radiance ratio 256.

    The window holds a small specular highlight another four stops up.
    Equal-width value banding merges the highlight into the window band,
    while a mixture model gives the highlight its own component and scale.
    """
    h, w = size
    rng = np.random.default_rng(seed)
    cols = np.arange(w)[None, :].repeat(h, axis=0)
    window = cols >= int(w * 0.72)  # right ~28%: bright
    interior = ~window

    lum = np.zeros((h, w))
    lum[interior] = _region_luminance(1.0, interior, rng, 8, 0.35,
                                      fine_weight=0.6)[interior]
    lum[window] = _region_luminance(256.0, window, rng, 6, 0.12)[window]

    img = np.zeros((h, w, 3))
    img[interior] = _colorize(lum, (1.0, 0.82, 0.62))[interior]
    img[window] = _colorize(lum, (0.72, 0.84, 1.0))[window]

    # small specular patch far above the window level
    ch, cw = int(h * 0.18), int(w * 0.80)
    rr = max(2, h // 24)
    yy, xx = np.ogrid[:h, :w]
    spot = (yy - ch) ** 2 + (xx - cw) ** 2 <= rr * rr
    img[spot] = _colorize(np.full((h, w), 4096.0), (0.9, 0.95, 1.0))[spot]
    return normalize_scene(img, "bimodal")


def scene_trimodal(size=(256, 256), seed: int = 0) -> HdrScene:
    """Three brightness bands at radiance ratios 1 : 16 : 256.

    The two darker levels sit close relative to the bright band's share of
    the value range, so equal-width banding merges them.
    """
    h, w = size
    rng = np.random.default_rng(seed)
    cols = np.arange(w)[None, :].repeat(h, axis=0)
    dark = cols < int(w * 0.45)
    bright = cols >= int(w * 0.80)
    mid = ~dark & ~bright

    lum = np.zeros((h, w))
    lum[dark] = _region_luminance(1.0, dark, rng, cells=9, strength=0.4)[dark]
    lum[mid] = _region_luminance(16.0, mid, rng, cells=7, strength=0.3)[mid]
    lum[bright] = _region_luminance(256.0, bright, rng, cells=5, strength=0.22)[bright]

    img = np.zeros((h, w, 3))
    img[dark] = _colorize(lum, (0.95, 0.78, 0.66))[dark]
    img[mid] = _colorize(lum, (0.80, 0.92, 0.78))[mid]
    img[bright] = _colorize(lum, (0.75, 0.85, 1.0))[bright]
    return normalize_scene(img, "trimodal")


def scene_gradient(size=(256, 256), seed: int = 0) -> HdrScene:
    """Three-stop horizontal sky gradient above a dark two-level ground.

    The sky sweeps smoothly over 2^3 while the ground floor and a mid-level
    wall sit close together far below it, the typical dusk-exterior layout.
    """
    h, w = size
    rng = np.random.default_rng(seed)
    rows = np.arange(h)[:, None].repeat(w, axis=1)
    cols = np.arange(w)[None, :].repeat(h, axis=0)
    sky = rows < int(h * 0.45)
    wall = ~sky & (cols >= int(w * 0.55))
    ground = ~sky & ~wall

    ramp = 48.0 * np.exp2(np.linspace(0.0, 3.0, w))[None, :].repeat(h, axis=0)
    lum = np.zeros((h, w))
    lum[sky] = (ramp * _smooth_field((h, w), rng, 10, 0.12, fine_weight=0.6))[sky]
    lum[ground] = _region_luminance(1.0, ground, rng, 9, 0.4, fine_weight=0.6)[ground]
    lum[wall] = _region_luminance(7.0, wall, rng, 7, 0.3, fine_weight=0.6)[wall]

    t = np.linspace(0.0, 1.0, w)[None, :, None]
    warm = np.asarray((1.0, 0.85, 0.7))[None, None, :]
    cool = np.asarray((0.75, 0.88, 1.0))[None, None, :]
    sky_chroma = warm * (1.0 - t) + cool * t
    sky_chroma = sky_chroma / (sky_chroma @ LUMA_WEIGHTS)[:, :, None]

    img = np.zeros((h, w, 3))
    img[sky] = (lum[:, :, None] * sky_chroma)[sky]
    img[ground] = _colorize(lum, (0.9, 0.8, 0.68))[ground]
    img[wall] = _colorize(lum, (0.78, 0.86, 0.74))[wall]
    return normalize_scene(img, "gradient")


BUILTIN_SCENES = {
    "bimodal": scene_bimodal,
    "trimodal": scene_trimodal,
    "gradient": scene_gradient,
}


def builtin_scene(name: str, size=(256, 256), seed: int = 0) -> HdrScene:
    """Look up and build one of the procedural scenes by name."""
    try:
        fn = BUILTIN_SCENES[name]
    except KeyError:
        raise InputError(
            f"unknown scene {name!r}; choices: {sorted(BUILTIN_SCENES)}"
        ) from None
    return fn(size=size, seed=seed)
