"""
Unit test file for layered depth images
"""

__author__      = "layeredDepth developers"
__copyright__   = "Copyright (c) layeredDepth developers 2026"


import numpy as np
import pytest

import tests.helper_test_funcs as Helper
import layeredDepth.errors as ERRORS
import layeredDepth.data_model.ldi as LDI
import layeredDepth.driver.scene_driver as SCENE


def test_two_samples_sorted():
    layout = Helper.make_image(np.full((1, 1), 5.0), color=0.2)
    chair = Helper.make_image(np.full((1, 1), 2.0), color=0.8)
    ldi = LDI.ldi_from_stack(Helper.make_stack([chair], layout))
    samples = ldi.samples_at(0, 0)
    assert [(depth, layer) for _, depth, layer in samples] == [(2.0, 0), (5.0, 1)]


def test_layout_only_pixel():
    layout = Helper.make_image(np.full((1, 2), 5.0))
    chair = Helper.make_image(np.array([[2.0, 0.0]]))
    ldi = LDI.ldi_from_stack(Helper.make_stack([chair], layout))
    assert ldi.counts.tolist() == [[2, 1]]
    assert [layer for _, _, layer in ldi.samples_at(0, 1)] == [1]


def test_matches_insertion_sort():
    rng = np.random.default_rng(11)
    for trial in range(50):
        images = [Helper.random_image(rng, (4, 4), integer_depths=(trial % 2 == 0)) for _ in range(4)]
        ldi = LDI.ldi_from_images(images, 0.5)
        expected = Helper.brute_force_ldi(images, 0.5)
        for (row, col), pixel in expected.items():
            got = ldi.samples_at(row, col)
            assert len(got) == len(pixel)
            for (rgba, depth, layer), (e_rgba, e_depth, e_layer) in zip(got, pixel):
                assert depth == e_depth
                assert layer == e_layer
                assert np.array_equal(rgba, e_rgba)


def test_depths_non_decreasing():
    rng = np.random.default_rng(12)
    images = [Helper.random_image(rng, (5, 5)) for _ in range(4)]
    ldi = LDI.ldi_from_images(images)
    for row in range(5):
        for col in range(5):
            depths = [depth for _, depth, _ in ldi.samples_at(row, col)]
            assert depths == sorted(depths)


def test_empty_pixel_is_invalid():
    layer = Helper.make_image(np.array([[2.0, 0.0]]))
    first = LDI.first_layer(LDI.ldi_from_images([layer]))
    assert first.valid.tolist() == [[True, False]]
    assert first.depth[0, 1] == 0.0


def test_single_layer_verbatim():
    rng = np.random.default_rng(13)
    layer = Helper.random_image(rng, (4, 6))
    opaque = Helper.make_image(layer.depth, color=layer.rgb, valid=layer.valid)
    assert LDI.first_layer(LDI.ldi_from_images([opaque])).equals(opaque)


def test_rank_beyond_depth_is_empty():
    layer = Helper.make_image(np.full((2, 2), 1.0))
    image, sources = LDI.ldi_from_images([layer]).rank(3)
    assert not image.valid.any()
    assert np.all(sources == -1)


def test_unsorted_samples_rejected():
    with pytest.raises(ERRORS.InvalidRasterError):
        LDI.Ldi(np.array([[2]]), np.zeros((2, 4)), np.array([3.0, 1.0]), np.array([0, 1]))


def test_counts_mismatch_rejected():
    with pytest.raises(ERRORS.DimensionError):
        LDI.Ldi(np.array([[2]]), np.zeros((1, 4)), np.array([3.0]), np.array([0]))


def test_zero_layers_rejected():
    with pytest.raises(ERRORS.DimensionError):
        LDI.ldi_from_images([])


def test_first_layer_equals_full_render():
    scene = Helper.small_scene()
    stack = SCENE.generate_view(scene)
    first = LDI.first_layer(LDI.ldi_from_stack(stack))
    assert first.equals(SCENE.render_full(scene))


def test_first_layer_equals_full_render_on_generated_scenes():
    for scene, stack in Helper.generated_scenes(range(20)):
        assert LDI.first_layer(LDI.ldi_from_stack(stack)).equals(SCENE.render_full(scene))


def test_faint_pixels_are_not_samples():
    faint = Helper.make_image(np.array([[2.0, 2.0]]), alpha=np.array([[0.3, 0.9]]))
    layout = Helper.make_image(np.array([[5.0, 5.0]]))
    stack = Helper.make_stack([faint], layout)
    assert LDI.ldi_from_stack(stack).counts.tolist() == [[1, 2]]
    assert LDI.ldi_from_stack(stack, alpha_min=0.0).counts.tolist() == [[2, 2]]
