"""Per-segment luminance scaling, tone mapping, and color recombination.

For every segment the exposure whose enhanced luminance sits closest to
middle gray (0.18, by log-average over the segment's pixels) is selected and
scaled so the segment's log-average lands exactly on middle gray. The scaled
map is compressed to [0, 1] by a shoulder curve and colors are transferred
from the chosen source exposure at unchanged hue/saturation ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CHROMA_EPS, LOG_MEAN_EPS, TARGET_GRAY, Partition, ScalePlan
from .errors import InputError
from .imageio import luminance


def segment_log_means(maps, partition: Partition,
                      eps: float = LOG_MEAN_EPS) -> np.ndarray:
    """Log-average luminance of every (segment, exposure) pair, shape (M, N).

    ``eps`` floors the luminance inside the log, as in the global
    log-average.
    """
    labels = partition.labels.ravel()
    counts = partition.counts().astype(np.float64)
    cols = []
    for lum_map in maps:
        logs = np.log(np.maximum(np.asarray(lum_map, dtype=np.float64).ravel(), eps))
        sums = np.bincount(labels, weights=logs, minlength=partition.segment_count)
        cols.append(np.exp(sums / counts))
    return np.stack(cols, axis=1)


def plan_scaling(maps, partition: Partition, target: float = TARGET_GRAY,
                 eps: float = LOG_MEAN_EPS) -> ScalePlan:
    """Choose a source exposure and gain per segment.

    Source: the exposure whose log-average enhanced luminance over the
    segment is nearest ``target`` (squared distance, ties to the lower
    index). Gain: exactly ``target`` divided by that log-average.
    """
    g = segment_log_means(maps, partition, eps)
    source = np.argmin((target - g) ** 2, axis=1)
    picked = g[np.arange(g.shape[0]), source]
    alpha = target / picked
    return ScalePlan(alpha=alpha, source=source)


def tonemap(lum: np.ndarray, knee: float) -> np.ndarray:
    """Shoulder compression f(t) = t * (1 + t/knee^2) / (1 + t).

    Maps 0 to 0 and ``knee`` to 1, monotone on [0, knee]; ``knee`` = 1 is the
    identity on [0, 1].
    """
    if knee <= 0:
        raise InputError("knee must be positive")
    t = np.asarray(lum, dtype=np.float64)
    return t * (1.0 + t / (knee * knee)) / (1.0 + t)


def recombine(target_lum: np.ndarray, source_image: np.ndarray,
              source_lum: np.ndarray | None = None) -> np.ndarray:
    """Transfer colors of ``source_image`` onto ``target_lum``.

    Each pixel is scaled channel-wise by target/source luminance so channel
    ratios (hue and saturation) are preserved. Where the source luminance is
    at most 1e-6 the result falls back to neutral gray at the target
    luminance.
    """
    if source_lum is None:
        source_lum = luminance(source_image)
    t = np.asarray(target_lum, dtype=np.float64)
    s = np.asarray(source_lum, dtype=np.float64)
    img = np.asarray(source_image, dtype=np.float64)
    safe = s > CHROMA_EPS
    ratio = np.where(safe, t / np.where(safe, s, 1.0), 1.0)
    out = img * ratio[:, :, None]
    gray = np.broadcast_to(t[:, :, None], out.shape)
    return np.where(safe[:, :, None], out, gray)


@dataclass
class AdjustedStack:
    """Output of the adjustment stage: one rendition per segment.

    Parallel lists ordered by gain, strongest boost first. ``segment_ids``
    maps each rendition back to its segment label in the partition.
    """

    images: list
    segment_ids: np.ndarray
    alphas: np.ndarray
    sources: np.ndarray
    knees: np.ndarray
    pixel_counts: np.ndarray

    def __len__(self) -> int:
        return len(self.images)


def adjust_stack(images, enhanced_maps, partition: Partition,
                 plan: ScalePlan | None = None,
                 knee_policy: str = "max") -> AdjustedStack:
    """Produce one luminance-adjusted rendition of the scene per segment.

    ``images`` are the decoded linear exposures, ``enhanced_maps`` their
    (possibly contrast-enhanced) luminance maps. Every rendition applies its
    segment's gain to the whole chosen map, compresses it with the shoulder
    curve, and recolors from the original chosen exposure. ``knee_policy``
    sets the curve's white point: ``"max"`` knees at the scaled map's
    maximum (1 if the map is all zero), ``"1"`` fixes the knee at 1 so the
    curve is the identity on [0, 1].
    """
    if len(images) != len(enhanced_maps):
        raise InputError("images and enhanced_maps differ in length")
    if knee_policy not in ("max", "1"):
        raise InputError(f"knee_policy must be 'max' or '1', got {knee_policy!r}")
    if plan is None:
        plan = plan_scaling(enhanced_maps, partition)
    if len(plan) != partition.segment_count:
        raise InputError("plan length does not match partition")

    source_lums = {}
    renditions = []
    knees = np.empty(len(plan))
    for m in range(len(plan)):
        j = int(plan.source[m])
        scaled = plan.alpha[m] * np.asarray(enhanced_maps[j], dtype=np.float64)
        if knee_policy == "1":
            knee = 1.0
        else:
            peak = float(scaled.max())
            knee = peak if peak > 0 else 1.0
        knees[m] = knee
        mapped = tonemap(scaled, knee)
        if j not in source_lums:
            source_lums[j] = luminance(images[j])
        renditions.append(recombine(mapped, images[j], source_lums[j]))

    order = np.argsort(-plan.alpha, kind="stable")
    counts = partition.counts()
    return AdjustedStack(
        images=[renditions[m] for m in order],
        segment_ids=order.astype(np.int64),
        alphas=plan.alpha[order],
        sources=plan.source[order],
        knees=knees[order],
        pixel_counts=counts[order],
    )
