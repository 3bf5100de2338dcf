"""
Unit test file for loss evaluators and mask matching
"""

__author__      = "layeredDepth developers"
__copyright__   = "Copyright (c) layeredDepth developers 2026"


import math

import numpy as np
import pytest

import tests.helper_test_funcs as Helper
import layeredDepth.errors as ERRORS
import layeredDepth.driver.loss_driver as LOSS
from layeredDepth.data_model.raster import RgbadImage


def random_layer(rng, shape=(3, 3)):
    return RgbadImage(rng.uniform(0.2, 0.8, shape + (4,)), rng.uniform(1.0, 3.0, shape), np.ones(shape, dtype=bool))


def test_relevance_no_occlusion():
    mask = np.zeros((40, 40), dtype=bool)
    mask[18:22, 18:22] = True
    weights = LOSS.relevance_map(mask, mask).weights
    assert set(np.unique(weights).tolist()) == {0.7, 0.2}


def test_relevance_occluded_pixel():
    gt = np.zeros((5, 5), dtype=bool)
    gt[1:4, 1:4] = True
    visible = gt.copy()
    visible[2, 2] = False
    weights = LOSS.relevance_map(gt, visible, dilation=3).weights
    assert weights[2, 2] == 1.5
    assert weights[1, 1] == 0.7


def test_relevance_band_square():
    visible = np.zeros((40, 40), dtype=bool)
    visible[5, 30] = True
    weights = LOSS.relevance_map(visible, visible).weights
    band = np.zeros((40, 40), dtype=bool)
    band[0:21, 15:40] = True
    assert np.array_equal(weights == 0.7, band)


def test_relevance_bad_dilation():
    mask = np.zeros((4, 4), dtype=bool)
    with pytest.raises(ERRORS.ConfigError):
        LOSS.relevance_map(mask, mask, dilation=0)


def test_completion_loss_identical():
    rng = np.random.default_rng(31)
    layer = random_layer(rng)
    loss, gradient = LOSS.completion_loss(layer, layer, LOSS.RelevanceMap.uniform(layer.shape))
    assert loss == 0.0
    assert not gradient.any()


def test_completion_loss_constant_offset():
    gt = RgbadImage(np.full((2, 2, 4), 0.5), np.full((2, 2), 2.0), np.ones((2, 2), dtype=bool))
    pred = RgbadImage(np.full((2, 2, 4), 0.6), np.full((2, 2), 2.1), np.ones((2, 2), dtype=bool))
    loss, _ = LOSS.completion_loss(gt, pred, LOSS.RelevanceMap.uniform(gt.shape))
    assert loss == pytest.approx(0.1)


def test_completion_gradient_finite_differences():
    rng = np.random.default_rng(32)
    gt = random_layer(rng)
    pred = random_layer(rng)
    relevance = LOSS.RelevanceMap(rng.uniform(0.2, 1.5, (3, 3)))
    _, gradient = LOSS.completion_loss(gt, pred, relevance)
    h = 1e-5
    channels = pred.channels()
    for row in range(3):
        for col in range(3):
            for channel in range(5):
                if abs(channels[row, col, channel] - gt.channels()[row, col, channel]) < 10 * h:
                    continue
                shifted = []
                for step in (h, -h):
                    moved = channels.copy()
                    moved[row, col, channel] += step
                    image = RgbadImage(moved[..., :4], moved[..., 4], pred.valid)
                    shifted.append(LOSS.completion_loss(gt, image, relevance)[0])
                numeric = (shifted[0] - shifted[1]) / (2 * h)
                assert abs(numeric - gradient[row, col, channel]) < 1e-4


def test_auto_loss_matches_completion():
    rng = np.random.default_rng(33)
    x = random_layer(rng, (4, 4))
    x_hat = random_layer(rng, (4, 4))
    expected, _ = LOSS.completion_loss(x, x_hat, LOSS.RelevanceMap.uniform((4, 4)))
    assert LOSS.auto_loss(x, x_hat) == pytest.approx(expected, abs=1e-12)
    assert LOSS.auto_loss(x, x) == 0.0


def test_reconstruction_loss_offsets():
    color = np.full((3, 3, 3), 0.4)
    depth = np.full((3, 3), 2.0)
    assert LOSS.reconstruction_loss(color, color, depth, depth) == 0.0
    assert LOSS.reconstruction_loss(color, color + 0.1, depth, depth + 0.2) == pytest.approx(0.3)


def test_reconstruction_loss_direct_sum():
    rng = np.random.default_rng(34)
    gt_c, pred_c = rng.random((4, 4, 3)), rng.random((4, 4, 3))
    gt_d, pred_d = rng.random((4, 4)), rng.random((4, 4))
    expected = sum(abs(a - b) for a, b in zip(gt_c.reshape(-1), pred_c.reshape(-1))) / 48.0
    expected += sum(abs(a - b) for a, b in zip(gt_d.reshape(-1), pred_d.reshape(-1))) / 16.0
    assert LOSS.reconstruction_loss(gt_c, pred_c, gt_d, pred_d) == pytest.approx(expected, abs=1e-12)


def test_reconstruction_loss_size_mismatch():
    with pytest.raises(ERRORS.DimensionError):
        LOSS.reconstruction_loss(np.zeros((2, 2, 3)), np.zeros((2, 2, 3)), np.zeros((3, 3)), np.zeros((3, 3)))


def test_perceptual_identical_and_shift():
    rng = np.random.default_rng(35)
    image = rng.random((6, 6, 3))
    bank = LOSS.FeatureExtractor.edge_bank()
    assert LOSS.perceptual_loss(image, image, bank) == 0.0
    assert LOSS.perceptual_loss(image, image + 0.25, bank) == pytest.approx(0.0, abs=1e-12)


def test_features_match_direct_correlation():
    rng = np.random.default_rng(36)
    image = rng.random((5, 5, 3))
    bank = LOSS.FeatureExtractor.edge_bank()
    features = bank(image)
    assert features.shape == (5, 5, 9)
    for k, kernel in enumerate(bank.kernels):
        for channel in range(3):
            expected = np.abs(Helper.direct_correlate(image[..., channel], kernel))
            assert np.allclose(features[..., k * 3 + channel], expected, rtol=0.0, atol=1e-10)


def test_seeded_bank_reproducible():
    first = LOSS.FeatureExtractor.from_seed(4)
    assert np.array_equal(first.kernels, LOSS.FeatureExtractor.from_seed(4).kernels)
    assert first.num_kernels == 8


def test_bad_kernel_bank():
    with pytest.raises(ERRORS.ConfigError):
        LOSS.FeatureExtractor(np.zeros((2, 5, 5)))


def test_adversarial_half():
    assert LOSS.adversarial_value([0.5], [0.5]) == pytest.approx(2 * math.log(0.5))


def test_adversarial_optimum():
    assert LOSS.adversarial_value([1.0, 1.0], [0.0]) == pytest.approx(2 * math.log(1 - LOSS.EPSILON))


def test_adversarial_direct_sum():
    rng = np.random.default_rng(37)
    real = rng.uniform(0.05, 0.95, 7)
    fake = rng.uniform(0.05, 0.95, 5)
    expected = sum(math.log(r) for r in real) / 7 + sum(math.log(1 - f) for f in fake) / 5
    assert LOSS.adversarial_value(real, fake) == pytest.approx(expected, abs=1e-12)


def test_adversarial_empty():
    with pytest.raises(ERRORS.ConfigError):
        LOSS.adversarial_value([], [0.5])


def test_layout_loss_weights():
    assert LOSS.layout_loss(0.1, 0.04, use_adversarial=False).total == pytest.approx(11.0)


def test_layout_loss_adversarial_difference():
    with_gan = LOSS.layout_loss(0.1, 0.04, -0.7)
    without = LOSS.layout_loss(0.1, 0.04, -0.7, use_adversarial=False)
    assert with_gan.total - without.total == pytest.approx(-0.7)
    assert without.to_dict()['adversarial'] is None


def test_layout_loss_perfect_prediction():
    layout = Helper.make_image(np.full((6, 6), 3.0), color=0.4)
    breakdown = LOSS.layout_loss_from_images(layout, layout)
    assert breakdown.total == 0.0
    assert breakdown.adversarial is None


def test_negative_weights_rejected():
    with pytest.raises(ERRORS.ConfigError):
        LOSS.LossWeights(-1.0, 25.0)


def test_iou_identity():
    masks = [np.eye(3, dtype=bool), np.fliplr(np.eye(3, dtype=bool)) & ~np.eye(3, dtype=bool)]
    assert LOSS.iou_match(masks, masks) == [(0, 0), (1, 1)]
    assert LOSS.mask_iou(masks[0], masks[0]) == 1.0


def test_iou_disjoint():
    a = np.zeros((3, 3), dtype=bool)
    b = np.zeros((3, 3), dtype=bool)
    a[0] = True
    b[2] = True
    assert LOSS.iou_match([a], [b]) == []


def test_iou_hand_case():
    gt = np.zeros((3, 3), dtype=bool)
    gt[0:2, 0:2] = True
    pred = np.zeros((3, 3), dtype=bool)
    pred[0, 0] = pred[0, 1] = pred[2, 2] = True
    assert LOSS.mask_iou(gt, pred) == pytest.approx(0.4)
    assert LOSS.iou_match([pred], [gt]) == [(0, 0)]


def test_iou_greedy_best_first():
    gt = np.zeros((4, 4), dtype=bool)
    gt[:2, :2] = True
    close = gt.copy()
    loose = gt.copy()
    loose[2, 0] = loose[2, 1] = True
    assert LOSS.iou_match([loose, close], [gt]) == [(0, 1)]


def test_iou_ties_ignore_list_order():
    gt = np.zeros((4, 4), dtype=bool)
    gt[:2, :2] = True
    right = gt.copy()
    right[:2, 2] = True
    below = gt.copy()
    below[2, :2] = True
    assert LOSS.mask_iou(gt, right) == LOSS.mask_iou(gt, below)

    forward = LOSS.iou_match([right, below], [gt])
    backward = LOSS.iou_match([below, right], [gt])
    assert len(forward) == len(backward) == 1
    assert np.array_equal([right, below][forward[0][1]], [below, right][backward[0][1]])


def test_iou_ties_ignore_gt_order():
    pred = np.zeros((4, 4), dtype=bool)
    pred[1:3, 1:3] = True
    wide = np.zeros((4, 4), dtype=bool)
    wide[1:3, 0:3] = True
    tall = np.zeros((4, 4), dtype=bool)
    tall[0:3, 1:3] = True
    forward = LOSS.iou_match([pred], [wide, tall])
    backward = LOSS.iou_match([pred], [tall, wide])
    assert np.array_equal([wide, tall][forward[0][0]], [tall, wide][backward[0][0]])
