"""Module responsible for evaluating the layered prediction losses

Every loss is an exact scalar evaluator. The L1 terms also return their analytic subgradient with
respect to the prediction. Losses are means over elements so their scale does not depend on the
raster size.
"""

import numpy as np
from scipy import ndimage

from layeredDepth.errors import DimensionError, ConfigError


# Relevance weights: visible area and its dilated band, occluded area, everything else
DEFAULT_RELEVANCE_WEIGHTS = (0.7, 1.5, 0.2)
DEFAULT_RELEVANCE_DILATION = 31

# Adversarial scores are clamped to [EPSILON, 1 - EPSILON] before taking logs
EPSILON = 1e-7

# Matches below this IoU are discarded
MIN_MATCH_IOU = 0.3


def _check_shapes(*arrays):
    shape = np.shape(arrays[0])
    for array in arrays[1:]:
        if np.shape(array) != shape:
            raise DimensionError('Shape {} does not match {}'.format(np.shape(array), shape))


class RelevanceMap:
    """Class that represents the per-pixel weight of the completion loss

    Attributes
    ----------
    weights : np.ndarray
        (height, width) float weights
    """

    def __init__(self, weights):
        """Constructor for RelevanceMap
        """

        self.weights = np.array(weights, dtype=np.float64)
        if self.weights.ndim != 2 or np.any(self.weights < 0.0) or not np.all(np.isfinite(self.weights)):
            raise ConfigError('Relevance weights must be a finite non-negative 2D raster')
        self.weights.setflags(write=False)


    @classmethod
    def uniform(cls, shape, value=1.0):
        return cls(np.full(shape, float(value)))


    @property
    def shape(self):
        return self.weights.shape


    def scaled(self, factor):
        return RelevanceMap(self.weights * factor)


def relevance_map(gt_mask, visible_mask, dilation=DEFAULT_RELEVANCE_DILATION, weights=DEFAULT_RELEVANCE_WEIGHTS):
    """Function that builds the relevance map emphasizing occluded object parts

    Parameters
    ----------
    gt_mask : np.ndarray
        full extent of the object
    visible_mask : np.ndarray
        detected visible part
    dilation=31 : int
        side of the square structuring element around the visible part
    weights=(0.7, 1.5, 0.2) : tuple of float
        visible band, occluded and background weights

    Returns
    -------
    RelevanceMap
        occluded pixels take precedence over the visible band
    """

    gt_mask = np.asarray(gt_mask, dtype=bool)
    visible_mask = np.asarray(visible_mask, dtype=bool)
    _check_shapes(gt_mask, visible_mask)
    if dilation < 1:
        raise ConfigError('Dilation must be at least one pixel')
    visible_weight, occluded_weight, other_weight = weights

    band = ndimage.binary_dilation(visible_mask, structure=np.ones((dilation, dilation), dtype=bool))
    occluded = gt_mask & ~visible_mask
    gamma = np.full(gt_mask.shape, float(other_weight))
    gamma[band] = visible_weight
    gamma[occluded] = occluded_weight
    return RelevanceMap(gamma)


def completion_loss(gt, pred, relevance):
    """Function that computes the relevance weighted L1 loss over all five RGBA-D channels

    Parameters
    ----------
    gt : RgbadImage
        ground-truth layer
    pred : RgbadImage
        predicted layer
    relevance : RelevanceMap
        per-pixel weights

    Returns
    -------
    float
        mean of gamma * |gt - pred| over pixels and channels
    np.ndarray
        (height, width, 5) subgradient with respect to pred
    """

    _check_shapes(gt.depth, pred.depth, relevance.weights)
    gt_channels = gt.channels()
    pred_channels = pred.channels()
    count = gt_channels.size
    diff = gt_channels - pred_channels
    gamma = relevance.weights[..., None]
    loss = float(np.sum(gamma * np.abs(diff)) / count)
    gradient = -gamma * np.sign(diff) / count
    return loss, gradient


def auto_loss(x, x_hat, return_gradient=False):
    """Function that computes the auto-encoder reconstruction loss

    Returns
    -------
    float
        mean |x - x_hat| over pixels and channels
    """

    loss, gradient = completion_loss(x, x_hat, RelevanceMap.uniform(x.shape))
    return (loss, gradient) if return_gradient else loss


def reconstruction_loss(gt_color, pred_color, gt_depth, pred_depth, return_gradient=False):
    """Function that computes the color plus depth reconstruction loss of the layout

    Parameters
    ----------
    gt_color, pred_color : np.ndarray
        color rasters
    gt_depth, pred_depth : np.ndarray
        depth rasters

    Returns
    -------
    float
        mean |color difference| + mean |depth difference|
    tuple of np.ndarray
        color and depth subgradients, only if return_gradient
    """

    gt_color = np.asarray(gt_color, dtype=np.float64)
    pred_color = np.asarray(pred_color, dtype=np.float64)
    gt_depth = np.asarray(gt_depth, dtype=np.float64)
    pred_depth = np.asarray(pred_depth, dtype=np.float64)
    _check_shapes(gt_color, pred_color)
    _check_shapes(gt_depth, pred_depth)
    if gt_color.shape[:2] != gt_depth.shape[:2]:
        raise DimensionError('Color {} and depth {} rasters differ in size'.format(gt_color.shape, gt_depth.shape))

    color_diff = gt_color - pred_color
    depth_diff = gt_depth - pred_depth
    loss = float(np.abs(color_diff).sum() / color_diff.size + np.abs(depth_diff).sum() / depth_diff.size)
    if not return_gradient:
        return loss
    return loss, (-np.sign(color_diff) / color_diff.size, -np.sign(depth_diff) / depth_diff.size)


class FeatureExtractor:
    """Class that maps color images to fixed convolutional feature maps

    Every kernel is correlated with every input channel (stride 1, replicated borders) and passed
    through an absolute value.

    Attributes
    ----------
    kernels : np.ndarray
        (K, 3, 3) kernel bank
    """

    def __init__(self, kernels):
        """Constructor for FeatureExtractor
        """

        self.kernels = np.array(kernels, dtype=np.float64)
        if self.kernels.ndim != 3 or self.kernels.shape[1:] != (3, 3) or len(self.kernels) == 0:
            raise ConfigError('Feature kernels must form a non-empty (K, 3, 3) bank')
        self.kernels.setflags(write=False)


    @classmethod
    def edge_bank(cls):
        """Function that builds the zero-sum edge detecting preset

        Returns
        -------
        FeatureExtractor
            horizontal Sobel, vertical Sobel and Laplacian kernels
        """

        sobel_x = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
        laplacian = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
        return cls(np.stack([sobel_x, sobel_x.T, laplacian]))


    @classmethod
    def from_seed(cls, seed, count=8):
        """Function that draws a reproducible random kernel bank

        Returns
        -------
        FeatureExtractor
            bank of count normally distributed kernels
        """

        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((count, 3, 3)) / 3.0)


    @property
    def num_kernels(self):
        return len(self.kernels)


    def __call__(self, image):
        """Function that computes the feature maps of an image

        Parameters
        ----------
        image : np.ndarray
            (height, width, channels) or (height, width) image

        Returns
        -------
        np.ndarray
            (height, width, K * channels) features, kernel major
        """

        image = np.asarray(image, dtype=np.float64)
        if image.ndim == 2:
            image = image[..., None]
        features = [np.abs(ndimage.correlate(image[..., channel], kernel, mode='nearest'))
                    for kernel in self.kernels for channel in range(image.shape[-1])]
        return np.stack(features, axis=-1)


def perceptual_loss(gt_color, pred_color, extractor):
    """Function that computes the L1 distance between feature maps

    Returns
    -------
    float
        mean |phi(gt) - phi(pred)| over feature pixels and channels
    """

    gt_color = np.asarray(gt_color, dtype=np.float64)
    pred_color = np.asarray(pred_color, dtype=np.float64)
    _check_shapes(gt_color, pred_color)
    diff = extractor(gt_color) - extractor(pred_color)
    return float(np.abs(diff).sum() / diff.size)


def adversarial_value(d_real, d_fake):
    """Function that evaluates the conditional GAN objective for given discriminator scores

    Returns
    -------
    float
        mean log D(real) + mean log (1 - D(fake)), scores clamped away from 0 and 1
    """

    d_real = np.asarray(d_real, dtype=np.float64).reshape(-1)
    d_fake = np.asarray(d_fake, dtype=np.float64).reshape(-1)
    if d_real.size == 0 or d_fake.size == 0:
        raise ConfigError('Adversarial value needs non-empty score lists')
    real = np.log(np.clip(d_real, EPSILON, 1.0 - EPSILON))
    fake = np.log(np.clip(1.0 - d_fake, EPSILON, 1.0 - EPSILON))
    return float(real.sum() / real.size + fake.sum() / fake.size)


class LossWeights:
    """Class that represents the weighting of the layout loss terms

    Attributes
    ----------
    reconstruction : float
        weight of the reconstruction term
    perceptual : float
        weight of the perceptual term
    """

    def __init__(self, reconstruction=100.0, perceptual=25.0):
        self.reconstruction = float(reconstruction)
        self.perceptual = float(perceptual)
        for value in (self.reconstruction, self.perceptual):
            if not np.isfinite(value) or value < 0.0:
                raise ConfigError('Loss weights must be finite and non-negative')


class LossBreakdown:
    """Class that holds each layout loss term and the weighted total

    Attributes
    ----------
    reconstruction, perceptual : float
        unweighted terms
    adversarial : float or None
        adversarial value, None when disabled
    weights : LossWeights
        weights applied
    total : float
        weighted sum
    """

    def __init__(self, reconstruction, perceptual, adversarial, weights):
        """Constructor for LossBreakdown
        """

        self.reconstruction = float(reconstruction)
        self.perceptual = float(perceptual)
        self.adversarial = None if adversarial is None else float(adversarial)
        self.weights = weights
        self.total = weights.reconstruction * self.reconstruction + weights.perceptual * self.perceptual
        if self.adversarial is not None:
            self.total += self.adversarial


    def to_dict(self):
        return {'reconstruction': self.reconstruction, 'perceptual': self.perceptual,
                'adversarial': self.adversarial,
                'weights': {'reconstruction': self.weights.reconstruction, 'perceptual': self.weights.perceptual},
                'total': self.total}


def layout_loss(reconstruction, perceptual, adversarial=None, weights=None, use_adversarial=True):
    """Function that combines the layout loss terms

    Parameters
    ----------
    reconstruction : float
        reconstruction term
    perceptual : float
        perceptual term
    adversarial=None : float
        adversarial value, ignored when None or when use_adversarial is False
    weights=None : LossWeights
        defaults to 100 and 25
    use_adversarial=True : bool
        set False to disable the adversarial term

    Returns
    -------
    LossBreakdown
        terms and weighted total
    """

    weights = LossWeights() if weights is None else weights
    return LossBreakdown(reconstruction, perceptual, adversarial if use_adversarial else None, weights)


def layout_loss_from_images(gt, pred, extractor=None, d_real=None, d_fake=None, weights=None):
    """Function that evaluates the layout loss between two layout rasters

    The adversarial term is included only when discriminator scores are given.

    Parameters
    ----------
    gt : RgbadImage
        ground-truth layout
    pred : RgbadImage
        predicted layout
    extractor=None : FeatureExtractor
        feature bank, the edge preset by default

    Returns
    -------
    LossBreakdown
        terms and weighted total
    """

    extractor = FeatureExtractor.edge_bank() if extractor is None else extractor
    l_r = reconstruction_loss(gt.rgb, pred.rgb, gt.depth, pred.depth)
    l_p = perceptual_loss(gt.rgb, pred.rgb, extractor)
    l_a = adversarial_value(d_real, d_fake) if d_real is not None and d_fake is not None else None
    return layout_loss(l_r, l_p, l_a, weights)


def mask_iou(a, b):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.count_nonzero(a | b)
    return float(np.count_nonzero(a & b)) / union if union else 0.0


def _mask_key(mask):
    mask = np.asarray(mask, dtype=bool)
    return -int(np.count_nonzero(mask)), np.packbits(mask).tobytes()


def iou_match(pred_masks, gt_masks, min_iou=MIN_MATCH_IOU):
    """Function that pairs predicted masks with ground-truth masks

    Pairs are taken greedily by descending IoU, each mask used at most once. Equal IoUs are
    ordered by mask content, larger masks first, so reordering either list pairs the same masks.
    List positions only separate identical masks.

    Parameters
    ----------
    pred_masks : list of np.ndarray
        predicted masks
    gt_masks : list of np.ndarray
        ground-truth masks
    min_iou=0.3 : float
        pairs below this IoU are discarded

    Returns
    -------
    list of tuple
        (gt_index, pred_index) sorted by gt index
    """

    masks = list(pred_masks) + list(gt_masks)
    if masks:
        _check_shapes(*masks)
    gt_keys = [_mask_key(mask) for mask in gt_masks]
    pred_keys = [_mask_key(mask) for mask in pred_masks]
    candidates = []
    for gt_index, gt_mask in enumerate(gt_masks):
        for pred_index, pred_mask in enumerate(pred_masks):
            iou = mask_iou(gt_mask, pred_mask)
            if iou >= min_iou:
                candidates.append((-iou, gt_keys[gt_index], pred_keys[pred_index], gt_index, pred_index))
    candidates.sort()

    used_gt = set()
    used_pred = set()
    pairs = []
    for _, _, _, gt_index, pred_index in candidates:
        if gt_index in used_gt or pred_index in used_pred:
            continue
        used_gt.add(gt_index)
        used_pred.add(pred_index)
        pairs.append((gt_index, pred_index))
    return sorted(pairs)
