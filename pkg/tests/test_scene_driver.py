"""
Unit test file for procedural scene generation
"""

__author__      = "layeredDepth developers"
__copyright__   = "Copyright (c) layeredDepth developers 2026"


import numpy as np
import pytest

import tests.helper_test_funcs as Helper
import layeredDepth.errors as ERRORS
import layeredDepth.driver.scene_driver as SCENE
import layeredDepth.driver.compose_driver as COMPOSE
import layeredDepth.driver.loss_driver as LOSS
from layeredDepth.data_model.ldi import ldi_from_stack
from layeredDepth.data_model.raster import Pose
from layeredDepth.data_model.run_config import GenerationConfig, DetectionNoise
from layeredDepth.data_model.scene_spec import Primitive, Texture


scene = Helper.small_scene()
stack = SCENE.generate_view(scene)
small_config = GenerationConfig(width=40, height=30, min_objects=1, max_objects=3)


def test_cast_independent_of_threads():
    single = SCENE.cast_scene(scene, threads=1)
    banded = SCENE.cast_scene(scene, threads=3)
    assert np.array_equal(single.object_depth, banded.object_depth)
    assert np.array_equal(single.object_rgb, banded.object_rgb)
    assert np.array_equal(single.layout_depth, banded.layout_depth)
    assert np.array_equal(single.layout_face, banded.layout_face)


def test_camera_outside_room():
    outside = scene.with_pose(Pose(Helper.LOOK_BACK, np.array([2.0, 1.5, 6.0])))
    with pytest.raises(ERRORS.GeometryError):
        SCENE.cast_scene(outside)


def test_fully_hidden_object_dropped():
    assert len(scene.objects) == 3
    assert len(stack.instances) == 2
    assert [instance.source_index for instance in stack.instances] == [0, 1]


def test_hidden_object_keeps_full_extent():
    hidden = SCENE.render_instance(scene, 2)
    assert hidden.image.valid.any()
    assert not hidden.visibility_mask.any()


def test_unoccluded_object_fully_visible():
    front = stack.instances[0]
    assert np.array_equal(front.visibility_mask, front.image.valid)


def test_partially_occluded_object():
    behind = stack.instances[1]
    assert behind.visibility_mask.any()
    assert np.count_nonzero(behind.visibility_mask) < np.count_nonzero(behind.image.valid)


def test_visibility_masks_disjoint():
    masks = [instance.visibility_mask for instance in stack.instances]
    assert not np.any(masks[0] & masks[1])


def test_front_face_depth():
    # front face of the chair lies 2.2 m in front of the camera
    assert stack.instances[0].image.depth[23, 31] == pytest.approx(2.2)


def test_layout_center_depth():
    empty = Helper.make_scene([], eye=(2.0, 2.0, 2.0), size=(4.0, 4.0, 4.0), width=33, height=33)
    layout = SCENE.render_layout(empty)
    assert layout.image.depth[16, 16] == pytest.approx(2.0)


def test_layout_hole_free():
    layout = SCENE.render_layout(scene)
    assert layout.is_hole_free()
    assert layout.structural_classes == (0, 1, 2)


def test_layout_behind_instances():
    layout = stack.layout.image
    for instance in stack.instances:
        valid = instance.image.valid
        assert np.all(layout.depth[valid] >= instance.image.depth[valid])


def test_no_objects_gives_layout_only():
    empty = SCENE.generate_view(scene.with_objects([]))
    assert len(empty.instances) == 0
    assert empty.layout.is_hole_free()


def test_pool_equals_full_render():
    assert COMPOSE.min_depth_pool(stack).image.equals(SCENE.render_full(scene))


def test_render_instance_bad_index():
    with pytest.raises(ERRORS.ConfigError):
        SCENE.render_instance(scene, 3)


def test_overlap_filter_layout_only():
    empty = SCENE.generate_view(scene.with_objects([]))
    assert not SCENE.overlap_filter(empty, 0.01)
    assert SCENE.overlap_filter(empty, 0.0)


def test_overlap_filter_hand_count():
    layout = Helper.make_image(np.full((2, 2), 5.0))
    chair = Helper.make_image(np.array([[2.0, 0.0], [0.0, 0.0]]))
    hand = Helper.make_stack([chair], layout)
    assert SCENE.overlap_fraction(hand) == 0.25
    assert SCENE.overlap_filter(hand, 0.25)
    assert not SCENE.overlap_filter(hand, 0.3)


def test_overlap_threshold_range():
    with pytest.raises(ERRORS.ConfigError):
        SCENE.overlap_filter(stack, 1.5)


def test_zero_perturbation():
    config = GenerationConfig(max_translation=0.0, max_rotation=0.0)
    perturbed = SCENE.perturb_pose(scene.pose, config, 5)
    assert np.allclose(perturbed.rotation, scene.pose.rotation)
    assert np.allclose(perturbed.translation, scene.pose.translation)


def test_perturbation_deterministic():
    assert SCENE.sample_perturbation(0.3, 10.0, 42) == SCENE.sample_perturbation(0.3, 10.0, 42)


def test_perturbation_bounds_and_mean():
    samples = np.array([SCENE.sample_perturbation(0.3, 10.0, seed) for seed in range(10000)])
    assert np.all(np.abs(samples[:, :3]) <= 0.3)
    assert np.all(np.abs(samples[:, 3:]) <= 10.0)
    sigma = 0.3 / np.sqrt(3.0) / np.sqrt(len(samples))
    assert np.all(np.abs(samples[:, :3].mean(axis=0)) < 4.0 * sigma)


def test_zero_noise_detections():
    detections = SCENE.simulate_detections(stack, DetectionNoise(0, 0, 0, 0.0), 1)
    for instance, (confidence, scores) in zip(stack.instances, detections):
        assert np.array_equal(confidence, instance.visibility_mask.astype(np.float64))
        assert np.array_equal(scores, instance.class_scores)


def test_smoothed_scores():
    detections = SCENE.simulate_detections(stack, DetectionNoise(0, 1, 1, 0.1), 2)
    for instance, (confidence, scores) in zip(stack.instances, detections):
        assert scores[instance.class_id] == pytest.approx(0.9 + 0.1 / 10)
        assert scores.sum() == pytest.approx(1.0)
        assert np.all((confidence >= 0.0) & (confidence <= 1.0))


def test_noisy_detections_match_instances():
    detections = SCENE.simulate_detections(stack, DetectionNoise(), 3)
    gt_masks = [instance.visibility_mask for instance in stack.instances]
    pred_masks = [confidence > 0.5 for confidence, _ in detections]
    if all(LOSS.mask_iou(g, p) >= 0.3 for g, p in zip(gt_masks, pred_masks)):
        assert LOSS.iou_match(pred_masks, gt_masks) == [(0, 0), (1, 1)]


def test_attach_detections():
    detections = SCENE.simulate_detections(stack, DetectionNoise(), 4)
    attached = SCENE.attach_detections(stack, detections)
    assert np.array_equal(attached.instances[1].confidence_mask, detections[1][0])
    with pytest.raises(ERRORS.ConfigError):
        SCENE.attach_detections(stack, detections[:1])


def test_autoencoder_instances():
    assert SCENE.autoencoder_instances(stack) == [0, 1]


def test_sample_scene_deterministic():
    first = SCENE.sample_scene(small_config, 9)
    second = SCENE.sample_scene(small_config, 9)
    assert first.to_dict() == second.to_dict()
    assert len(first.objects) <= 3
    assert first.room.contains(first.pose.translation)


def test_derive_seed_streams_differ():
    seeds = {SCENE.SceneGenerator.derive_seed(7, index, stream) for index in range(3) for stream in range(3)}
    assert len(seeds) == 9


def test_generator_overlap_matches_layers():
    generator = SCENE.SceneGenerator(small_config)
    for sample in generator.generate(3, 5):
        ldi = ldi_from_stack(sample.stack)
        assert (sample.overlap > 0) == (ldi.max_layers >= 2)
        assert sample.accepted == (sample.overlap >= small_config.overlap_threshold)
        assert (sample.target_view is not None) == sample.accepted


def test_target_view_zero_offset():
    view = SCENE.render_target_view(scene, (0.0, 0.0, 0.0, 0.0, 0.0, 0.0))
    assert view.equals(SCENE.render_full(scene))


def test_keep_hidden_object():
    hidden_stack = SCENE.generate_view(scene, keep_hidden=True)
    assert [instance.source_index for instance in hidden_stack.instances] == [0, 1, 2]
    assert not hidden_stack.instances[2].visibility_mask.any()
    assert COMPOSE.min_depth_pool(hidden_stack).image.equals(SCENE.render_full(scene))


def test_keep_hidden_skips_objects_out_of_view():
    # box behind the camera
    behind = Primitive('box', (2.0, 1.5, 4.8), (0.2, 0.2, 0.2), 4, Texture.solid((0.5, 0.5, 0.5)))
    out_of_view = SCENE.generate_view(Helper.make_scene([behind]), keep_hidden=True)
    assert len(out_of_view.instances) == 0


def test_generator_keeps_hidden_objects():
    config = GenerationConfig(width=40, height=30, min_objects=1, max_objects=3, keep_hidden=True)
    for sample in SCENE.SceneGenerator(config).generate(3, 2):
        assert len(sample.stack.instances) >= len(SCENE.generate_view(sample.scene).instances)


def test_layout_segmentation():
    layout = stack.layout
    assert layout.segmentation.shape == stack.shape
    assert np.all(layout.segmentation >= 0)
    classes = layout.class_map()
    assert classes[-1, 32] == 0
    assert classes[0, 32] == 1
    assert classes[24, 32] == 2


def test_overlap_threshold_bounds_without_objects():
    config = GenerationConfig(width=20, height=15, min_objects=0, max_objects=0)
    empty = SCENE.generate_view(SCENE.sample_scene(config, 4))
    assert len(empty.instances) == 0
    assert SCENE.overlap_fraction(empty) == 0.0
    assert SCENE.overlap_filter(empty, 0.0)
    assert not SCENE.overlap_filter(empty, 1.0)


def test_pool_equals_full_render_on_generated_scenes():
    for generated_scene, generated in Helper.generated_scenes(range(20)):
        assert COMPOSE.min_depth_pool(generated).image.equals(SCENE.render_full(generated_scene))
