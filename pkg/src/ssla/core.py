"""Shared value types and small numeric utilities used across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Floor applied inside log-average luminance so zero pixels stay finite.
LOG_MEAN_EPS = 1e-6

# Photographic middle gray that per-segment scaling targets.
TARGET_GRAY = 0.18

# Floor for the local-mean denominator in the contrast enhancement step.
LOCAL_MEAN_FLOOR = 1e-9

# Below this source luminance, recombination falls back to neutral gray.
CHROMA_EPS = 1e-6

# Floor for raw fusion weights before per-pixel normalization.
WEIGHT_FLOOR = 1e-12


def geometric_mean(values: np.ndarray, eps: float = LOG_MEAN_EPS) -> float:
    """Log-average of ``values`` with an ``eps`` floor: exp(mean(log(max(v, eps)))).

    This is the photographic key measure used both to pick scale factors and
    to normalize synthetic scenes.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("geometric_mean of empty array")
    return float(np.exp(np.mean(np.log(np.maximum(v, eps)))))


@dataclass
class Partition:
    """Segment labels for one image: ``labels[i, j]`` in ``0..segment_count-1``.

    Every label id in range is used by at least one pixel (ids are compacted).
    """

    labels: np.ndarray
    segment_count: int

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2:
            raise ValueError("labels must be a 2-D array")
        if self.segment_count < 1:
            raise ValueError("segment_count must be >= 1")

    def counts(self) -> np.ndarray:
        """Pixel count per segment id."""
        return np.bincount(self.labels.ravel(), minlength=self.segment_count)

    def validate(self) -> None:
        """Raise if labels are out of range or any id is unused."""
        c = self.counts()
        if self.labels.min() < 0 or self.labels.max() >= self.segment_count:
            raise ValueError("label out of range")
        if (c == 0).any():
            raise ValueError("unused segment id (labels not compacted)")


@dataclass
class ScalePlan:
    """Per-segment adjustment decisions.

    ``source[m]`` is the exposure index whose enhanced luminance map segment m
    scales, ``alpha[m]`` the multiplicative gain applied to it.
    """

    alpha: np.ndarray
    source: np.ndarray

    def __post_init__(self) -> None:
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.source = np.asarray(self.source, dtype=np.int64)
        if self.alpha.shape != self.source.shape or self.alpha.ndim != 1:
            raise ValueError("alpha and source must be 1-D arrays of equal length")

    def __len__(self) -> int:
        return int(self.alpha.shape[0])


@dataclass
class MixtureModel:
    """Posterior parameters of a variational Gaussian mixture fit.

    Holds the variational posterior for each surviving component plus the
    evidence-bound trace of the fit. ``weights``/``means``/``covariances``
    are posterior point summaries convenient for reporting.
    """

    alpha: np.ndarray        # Dirichlet concentration, shape (K,)
    beta: np.ndarray         # mean-precision scale, shape (K,)
    m: np.ndarray            # component mean location, shape (K, D)
    nu: np.ndarray           # Wishart degrees of freedom, shape (K,)
    scale_inv: np.ndarray    # inverse Wishart scale W_k^{-1}, shape (K, D, D)
    elbo_trace: list[float] = field(default_factory=list)
    converged: bool = False
    n_iter: int = 0
    seed: int = 0

    @property
    def n_components(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def dim(self) -> int:
        return int(self.m.shape[1])

    @property
    def weights(self) -> np.ndarray:
        """Posterior mean mixture weights."""
        return self.alpha / self.alpha.sum()

    @property
    def means(self) -> np.ndarray:
        """Posterior mean component locations."""
        return self.m.copy()

    @property
    def covariances(self) -> np.ndarray:
        """Posterior expected covariance per component."""
        d = self.dim
        denom = (self.nu - d - 1.0).reshape(-1, 1, 1)
        return self.scale_inv / np.maximum(denom, 1e-9)
