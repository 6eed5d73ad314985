"""Synthetic-scene and exposure-stack generator tests."""

from __future__ import annotations

import numpy as np
import pytest

from ssla.core import TARGET_GRAY, geometric_mean
from ssla.errors import InputError
from ssla.expogen import (BUILTIN_SCENES, builtin_scene, expose, make_stack,
                          normalize_scene, random_evs)
from ssla.imageio import luminance


def test_expose_doubles_with_plus_one_ev(rng):
    data = 0.2 * rng.random((6, 6, 3))
    np.testing.assert_allclose(expose(data, 1.0), 2.0 * data, rtol=1e-15)


def test_expose_composition_is_identity_on_unclipped(rng):
    data = 0.4 * rng.random((6, 6, 3))
    down_up = expose(expose(data, -1.0), 1.0)
    np.testing.assert_allclose(down_up, data, rtol=1e-15)


def test_expose_clips_at_one():
    data = np.full((3, 3, 3), 0.75)
    out = expose(data, 2.0)
    np.testing.assert_array_equal(out, 1.0)


def test_expose_never_negative(rng):
    out = expose(rng.random((4, 4, 3)), -30.0)
    assert out.min() >= 0.0


def test_stack_monotone_in_ev(rng):
    data = rng.random((8, 8, 3)) * 4.0
    stack = make_stack_from_raw(data)
    for lo, hi in zip(stack, stack[1:]):
        assert (hi >= lo - 1e-15).all()


def make_stack_from_raw(data):
    scene = normalize_scene(data, "t")
    return make_stack(scene, [-4.0, -2.0, 0.0])


def test_normalize_scene_sets_log_average_to_middle_gray(rng):
    data = np.exp(rng.normal(3.0, 1.0, size=(16, 16, 3)))
    scene = normalize_scene(data, "t")
    key = geometric_mean(luminance(scene.data))
    assert key == pytest.approx(TARGET_GRAY, rel=1e-12)


def test_make_stack_shapes_and_count(rng):
    scene = normalize_scene(rng.random((10, 12, 3)) + 0.1, "t")
    stack = make_stack(scene, [-3.0, -1.5, 0.0])
    assert len(stack) == 3
    for img in stack:
        assert img.shape == (10, 12, 3)
        assert img.min() >= 0.0 and img.max() <= 1.0


def test_random_evs_sorted_within_range():
    evs = random_evs(5, rng=np.random.default_rng(3))
    assert len(evs) == 5
    assert (np.diff(evs) >= 0).all()
    assert evs.min() >= -7.0 and evs.max() <= 0.0


def test_random_evs_deterministic_given_rng():
    a = random_evs(3, rng=np.random.default_rng(11))
    b = random_evs(3, rng=np.random.default_rng(11))
    np.testing.assert_array_equal(a, b)


def test_builtin_scene_names_and_shapes():
    assert set(BUILTIN_SCENES) == {"bimodal", "trimodal", "gradient"}
    for name in BUILTIN_SCENES:
        scene = builtin_scene(name, (32, 40), seed=0)
        assert scene.data.shape == (32, 40, 3)
        assert scene.name == name
        assert np.isfinite(scene.data).all()
        assert scene.data.min() >= 0.0


def test_builtin_scene_unknown_name_raises():
    with pytest.raises(InputError):
        builtin_scene("nope", (16, 16))


def test_builtin_scenes_are_deterministic():
    a = builtin_scene("trimodal", (24, 24), seed=5)
    b = builtin_scene("trimodal", (24, 24), seed=5)
    np.testing.assert_array_equal(a.data, b.data)
    c = builtin_scene("trimodal", (24, 24), seed=6)
    assert not np.array_equal(a.data, c.data)


def test_builtin_scenes_have_wide_dynamic_range():
    # every builtin scene must span at least 8 stops so that single
    # exposures cannot capture it (the whole point of the corpus)
    for name in BUILTIN_SCENES:
        lum = luminance(builtin_scene(name, (64, 64), seed=0).data)
        stops = np.log2(lum.max() / max(lum.min(), 1e-12))
        assert stops >= 8.0, f"{name} spans only {stops:.1f} stops"


def test_builtin_scene_luminance_is_multimodal():
    # the mixture should find at least 2 clusters on every builtin scene
    from ssla.segment import mixture_partition
    for name in BUILTIN_SCENES:
        scene = builtin_scene(name, (64, 64), seed=0)
        stack = make_stack(scene, [-4.0])
        part, _ = mixture_partition([luminance(stack[0])], n_components=10,
                                    seed=0, downsize_max=64)
        assert part.segment_count >= 2, name
