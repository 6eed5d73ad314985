"""Segmentation tests: brightness bands and the variational mixture."""

from __future__ import annotations

import numpy as np
import pytest

from oracles.brute_force import threshold_labels_reference
from ssla.core import Partition
from ssla.errors import InferenceError
from ssla.segment import (band_thresholds, fit_mixture, mixture_partition,
                          responsibilities, select_middle_index,
                          threshold_partition)


# ---------------------------------------------------------------- bands

def test_band_thresholds_three_values():
    # N=3 over [0.1, 0.9]: outer edges at the extremes, interior cuts at
    # 2/3 and 1/3 of the range
    thetas = band_thresholds(0.1, 0.9, 3)
    np.testing.assert_allclose(
        thetas, [0.9, 0.1 + 2 / 3 * 0.8, 0.1 + 1 / 3 * 0.8, 0.1])


def test_band_thresholds_descending_and_interior():
    thetas = band_thresholds(0.0, 1.0, 5)
    assert len(thetas) == 6
    assert all(a > b for a, b in zip(thetas, thetas[1:]))
    interior = thetas[1:-1]
    assert interior.max() < 1.0 and interior.min() > 0.0


def test_threshold_partition_frozen_example():
    # three pixel values at 0.1 / 0.5 / 0.9 with N=3 land in distinct bands,
    # darkest pixel -> largest label
    lum = np.array([[0.1, 0.5, 0.9]])
    part = threshold_partition(lum, 3)
    np.testing.assert_array_equal(part.labels, [[2, 1, 0]])
    assert part.segment_count == 3


def test_threshold_partition_constant_map_is_single_segment():
    part = threshold_partition(np.full((4, 5), 0.3), 4)
    assert part.segment_count == 1
    np.testing.assert_array_equal(part.labels, 0)


def test_threshold_boundary_pixel_joins_brighter_band():
    # a pixel exactly on a threshold is NOT below it -> brighter band
    lum = np.array([[0.0, 0.5, 1.0]])  # theta for N=2: 0.5
    part = threshold_partition(lum, 2)
    assert part.labels[0, 1] == part.labels[0, 2] == 0
    assert part.labels[0, 0] == 1


@pytest.mark.parametrize("seed", range(4))
def test_threshold_partition_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    lum = rng.random((17, 13)) * 2.0
    n = int(rng.integers(2, 6))
    part = threshold_partition(lum, n)
    thetas = band_thresholds(float(lum.min()), float(lum.max()), n)[1:-1]
    raw = threshold_labels_reference(lum, thetas)
    # the partition compacts empty bands but keeps bright-to-dark order,
    # so compacted labels must be the rank of the raw label
    present = np.unique(raw)
    remap = {old: new for new, old in enumerate(sorted(present))}
    expected = np.vectorize(remap.get)(raw)
    np.testing.assert_array_equal(part.labels, expected)


def test_threshold_labels_monotone_in_luminance(rng):
    lum = rng.random((20, 20))
    part = threshold_partition(lum, 5)
    order = np.argsort(lum.ravel())
    labels_sorted = part.labels.ravel()[order]
    # brighter pixel never gets a larger label
    assert (np.diff(labels_sorted) <= 0).all()


def test_middle_index_selects_by_log_average():
    maps = [np.full((3, 3), v) for v in (0.9, 0.1, 0.5)]
    assert select_middle_index(maps) == 2  # 0.5 is the middle log-average
    # even count: lower middle of the sorted order
    maps = [np.full((2, 2), v) for v in (0.8, 0.2, 0.4, 0.6)]
    assert select_middle_index(maps) == 2  # sorted: 0.2 0.4 0.6 0.8 -> 0.4


def test_partition_validate_rejects_bad_labels():
    with pytest.raises(Exception):
        Partition(labels=np.array([[0, 2]]), segment_count=2).validate()


# ---------------------------------------------------------------- mixture

def _blob_data(seed, centers, n=600):
    rng = np.random.default_rng(seed)
    parts, truth = [], []
    for k, c in enumerate(centers):
        pts = rng.normal(c, 0.05, size=(n // len(centers), 2))
        parts.append(pts)
        truth.append(np.full(len(pts), k))
    return np.vstack(parts), np.concatenate(truth)


def test_mixture_recovers_two_well_separated_blobs():
    x, truth = _blob_data(0, [(0.1, 0.1), (0.9, 0.9)])
    model = fit_mixture(x, n_components=8, seed=0)
    kept = model.weights > 1e-3
    assert kept.sum() == 2
    resp = responsibilities(model, x)[:, kept]
    pred = resp.argmax(axis=1)
    # align predicted component ids with ground truth by majority vote
    flip = (pred[truth == 0].mean() > 0.5)
    acc = ((pred == (truth if not flip else 1 - truth)).mean())
    assert acc >= 0.99


def test_mixture_elbo_is_monotone_nondecreasing():
    for seed in range(4):
        x, _ = _blob_data(seed, [(0.2, 0.8), (0.8, 0.2), (0.5, 0.5)])
        model = fit_mixture(x, n_components=10, seed=seed)
        trace = np.asarray(model.elbo_trace)
        assert len(trace) >= 2
        assert (np.diff(trace) >= -1e-9 * np.abs(trace[:-1])).all()


def test_mixture_weight_recovery_matches_proportions():
    rng = np.random.default_rng(5)
    sizes = (800, 600, 400)
    xs = [rng.normal(c, 0.04, size=(s, 2))
          for s, c in zip(sizes, [(0.1, 0.1), (0.5, 0.9), (0.9, 0.1)])]
    x = np.vstack(xs)
    model = fit_mixture(x, n_components=10, seed=0)
    kept = np.sort(model.weights[model.weights > 1e-3])[::-1]
    expected = np.array(sizes) / sum(sizes)
    np.testing.assert_allclose(kept, expected, atol=0.02)


def test_mixture_is_deterministic_given_seed():
    x, _ = _blob_data(2, [(0.2, 0.2), (0.8, 0.8)])
    a = fit_mixture(x, n_components=6, seed=42)
    b = fit_mixture(x, n_components=6, seed=42)
    np.testing.assert_array_equal(a.m, b.m)
    np.testing.assert_array_equal(np.asarray(a.elbo_trace), np.asarray(b.elbo_trace))
    c = fit_mixture(x, n_components=6, seed=43)
    assert not np.array_equal(a.m, c.m) or len(a.elbo_trace) != len(c.elbo_trace) \
        or np.allclose(a.means[a.weights > 1e-3].sum(), c.means[c.weights > 1e-3].sum())


def test_mixture_prunes_on_single_blob():
    # a lone Gaussian cloud: most of the 10 candidates must empty out, and
    # whatever survives must sit inside the cloud (overlapping components
    # are a known benign local optimum, so the exact count may be 1 or 2)
    rng = np.random.default_rng(9)
    x = rng.normal(0.5, 0.03, size=(500, 2))
    counts = []
    for seed in range(4):
        model = fit_mixture(x, n_components=10, seed=seed, max_iter=400)
        kept = model.weights > 1e-3
        counts.append(int(kept.sum()))
        assert (np.abs(model.means[kept] - 0.5) < 5 * 0.03).all()
    assert min(counts) == 1
    assert max(counts) <= 2


def test_mixture_rejects_degenerate_input():
    with pytest.raises(InferenceError):
        fit_mixture(np.full((100, 2), np.nan), n_components=4, seed=0)


def test_mixture_partition_on_two_region_stack():
    rng = np.random.default_rng(1)
    lum = 0.05 + 0.01 * rng.random((64, 64))
    lum[:, 32:] = 0.7 + 0.01 * rng.random((64, 32))
    part, model = mixture_partition([lum], n_components=10, seed=0,
                                    downsize_max=32)
    assert part.segment_count == 2
    left = part.labels[:, :32]
    right = part.labels[:, 32:]
    assert (left == left[0, 0]).all()
    assert (right == right[0, 0]).all()
    assert left[0, 0] != right[0, 0]


def test_mixture_partition_labels_cover_range():
    rng = np.random.default_rng(8)
    lum = rng.choice([0.05, 0.4, 0.9], size=(48, 48), p=[0.4, 0.3, 0.3])
    lum = lum + 0.005 * rng.random((48, 48))
    part, _ = mixture_partition([lum], n_components=10, seed=0, downsize_max=48)
    part.validate()
    counts = part.counts()
    assert counts.sum() == lum.size
    assert (counts > 0).all()
