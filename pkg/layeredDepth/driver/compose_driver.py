"""Module responsible for recomposing a layer stack into a single view

Implements minimum depth pooling, front masks, the closed-form depth displacement aligning a
layer to a depth prior, and the recomposition loss.
"""

import numpy as np

import layeredDepth.io.logger as LOG
from layeredDepth.errors import DimensionError, EmptyMaskError, ConfigError
from layeredDepth.data_model.raster import RgbadImage
from layeredDepth.data_model.layer_stack import DEFAULT_ALPHA_MIN


# index_map value of pixels with no present layer
NONE = -1


class ComposeResult:
    """Class that holds the outcome of minimum depth pooling

    Attributes
    ----------
    image : RgbadImage
        recomposed first layer
    index_map : np.ndarray
        (height, width) index of the selected layer, NONE where no layer is present
    alpha_min : float
        presence threshold used for pooling
    """

    def __init__(self, image, index_map, alpha_min=DEFAULT_ALPHA_MIN):
        """Constructor for ComposeResult
        """

        self.image = image
        self.index_map = np.array(index_map, dtype=np.int64)
        self.index_map.setflags(write=False)
        self.alpha_min = alpha_min
        if self.index_map.shape != image.shape:
            raise DimensionError('Index map {} does not match image {}'.format(self.index_map.shape, image.shape))


    @property
    def num_layers(self):
        return int(self.index_map.max()) + 1 if self.index_map.size else 0


class DepthPrior:
    """Class that represents a predicted depth map used to align layers

    Attributes
    ----------
    depth : np.ndarray
        per-pixel depth in meters
    valid : np.ndarray
        bool raster where the prior is defined
    """

    def __init__(self, depth, valid=None):
        """Constructor for DepthPrior
        """

        self.depth = np.array(depth, dtype=np.float64)
        self.valid = np.ones(self.depth.shape, dtype=bool) if valid is None else np.array(valid, dtype=bool)
        if self.valid.shape != self.depth.shape:
            raise DimensionError('Depth prior mask does not match its depth raster')
        if not np.all(np.isfinite(self.depth[self.valid])) or np.any(self.depth[self.valid] < 0.0):
            raise ConfigError('Depth prior must be finite and non-negative where valid')


def pool_images(images, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that pools an ordered list of layer rasters by minimum depth

    Parameters
    ----------
    images : list of RgbadImage
        layers in tie-break order, the earliest wins among equal depths
    alpha_min=0.5 : float
        minimum alpha for a valid pixel to be a candidate

    Returns
    -------
    ComposeResult
        pooled raster and index map into images
    """

    if len(images) == 0:
        raise DimensionError('Cannot pool zero layers')
    if not 0.0 <= alpha_min <= 1.0:
        raise ConfigError('alpha_min must lie in [0, 1]')
    shape = images[0].shape
    for image in images:
        if image.shape != shape:
            raise DimensionError('Layer raster {} does not match {}'.format(image.shape, shape))

    present = np.stack([image.present(alpha_min) for image in images])
    depth = np.stack([image.depth for image in images])
    rgba = np.stack([image.rgba for image in images])

    selected = np.argmin(np.where(present, depth, np.inf), axis=0)
    any_present = present.any(axis=0)
    index_map = np.where(any_present, selected, NONE)

    pooled_rgba = np.take_along_axis(rgba, selected[None, ..., None], axis=0)[0]
    pooled_depth = np.take_along_axis(depth, selected[None], axis=0)[0]
    LOG.print_kernel('pool_images: {} layers, {} of {} pixels covered'.format(
        len(images), int(any_present.sum()), any_present.size))
    return ComposeResult(RgbadImage(pooled_rgba, pooled_depth, any_present), index_map, alpha_min)


def min_depth_pool(stack, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that recomposes a stack by taking the nearest present layer at every pixel

    Ties go to the smaller instance index, the layout loses ties to instances.

    Parameters
    ----------
    stack : LayerStack
        stack to pool
    alpha_min=0.5 : float
        minimum alpha for a valid pixel to be a candidate

    Returns
    -------
    ComposeResult
        pooled image, index map with len(instances) marking the layout
    """

    return pool_images(stack.layer_images(), alpha_min)


def front_mask(result, layer_index):
    """Function that extracts the pixels where a given layer won the pooling

    Returns
    -------
    np.ndarray
        bool raster, index_map == layer_index
    """

    return result.index_map == layer_index


def class_map(stack, result):
    """Function that labels every pixel of a pooled view with the class of its front layer

    Layout pixels take the class of their layout instance.

    Returns
    -------
    np.ndarray
        (height, width) class ids, -1 where no layer is present or the layout is unsegmented
    """

    lookup = np.array([instance.class_id for instance in stack.instances] + [-1, -1], dtype=np.int64)
    classes = lookup[result.index_map]
    layout = result.index_map == len(stack.instances)
    return np.where(layout, stack.layout.class_map(), classes)


def _check_shapes(*rasters):
    shape = np.shape(rasters[0])
    for raster in rasters[1:]:
        if np.shape(raster) != shape:
            raise DimensionError('Raster {} does not match {}'.format(np.shape(raster), shape))


def depth_displacement(mask, gt_depth, pred_depth):
    """Function that computes the depth offset aligning a predicted layer to a prior

    Parameters
    ----------
    mask : np.ndarray
        bool raster of pixels the layer is visible in
    gt_depth : np.ndarray
        prior depth
    pred_depth : np.ndarray
        predicted layer depth

    Returns
    -------
    float
        mean prior depth minus mean predicted depth over the mask
    """

    mask = np.asarray(mask, dtype=bool)
    _check_shapes(mask, gt_depth, pred_depth)
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise EmptyMaskError('Depth displacement is undefined over an empty mask')
    gt = np.asarray(gt_depth, dtype=np.float64)[mask]
    pred = np.asarray(pred_depth, dtype=np.float64)[mask]
    if not (np.all(np.isfinite(gt)) and np.all(np.isfinite(pred))):
        raise ConfigError('Depths must be finite over the displacement mask')
    return float(gt.sum() / count - pred.sum() / count)


def apply_displacement(layer_depth, delta, valid=None):
    """Function that shifts a layer's depth by a displacement

    Pixels pushed below zero are clamped to zero.

    Parameters
    ----------
    layer_depth : np.ndarray
        layer depth in meters
    delta : float
        displacement in meters
    valid=None : np.ndarray
        pixels to shift, all pixels if None

    Returns
    -------
    np.ndarray
        displaced depth
    int
        number of clamped pixels
    """

    depth = np.asarray(layer_depth, dtype=np.float64)
    valid = np.ones(depth.shape, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    _check_shapes(depth, valid)
    shifted = np.where(valid, depth + delta, depth)
    negative = valid & (shifted < 0.0)
    clamped = int(np.count_nonzero(negative))
    if clamped:
        LOG.debug('apply_displacement: clamped {} pixels at depth 0'.format(clamped))
    return np.where(negative, 0.0, shifted), clamped


def displace_image(image, delta):
    """Function that shifts the depth of a layer raster over its valid pixels

    Returns
    -------
    RgbadImage
        raster with displaced depth; pixels clamped to 0 lose validity
    int
        number of clamped pixels
    """

    depth, clamped = apply_displacement(image.depth, delta, image.valid)
    valid = image.valid & (depth > 0.0)
    return RgbadImage(image.rgba, depth, valid), clamped


def align_to_prior(stack, prior, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that aligns every layer of a stack to a depth prior

    Each layer is shifted by the displacement computed over the pixels where it is the front
    layer and the prior is defined. Layers without such pixels keep their depth.

    Parameters
    ----------
    stack : LayerStack
        stack to align
    prior : DepthPrior
        predicted depth of the composite view
    alpha_min=0.5 : float
        presence threshold used for pooling

    Returns
    -------
    list of float
        displacement per layer in pooling order, None for layers never in front
    list of RgbadImage
        displaced layer rasters
    """

    if prior.depth.shape != stack.shape:
        raise DimensionError('Depth prior {} does not match stack {}'.format(prior.depth.shape, stack.shape))
    result = min_depth_pool(stack, alpha_min)
    deltas = []
    images = []
    for index, image in enumerate(stack.layer_images()):
        mask = front_mask(result, index) & prior.valid
        if not mask.any():
            deltas.append(None)
            images.append(image)
            continue
        delta = depth_displacement(mask, prior.depth, image.depth)
        displaced, _ = displace_image(image, delta)
        deltas.append(delta)
        images.append(displaced)
    return deltas, images


def recompose_loss(target_depth, refined_depth, valid):
    """Function that measures the mean absolute depth error of a refined layer

    Returns
    -------
    float
        mean |target - refined| over the valid pixels
    """

    valid = np.asarray(valid, dtype=bool)
    _check_shapes(valid, target_depth, refined_depth)
    count = int(np.count_nonzero(valid))
    if count == 0:
        raise EmptyMaskError('Recomposition loss is undefined over an empty mask')
    diff = np.abs(np.asarray(target_depth, dtype=np.float64)[valid] - np.asarray(refined_depth, dtype=np.float64)[valid])
    return float(diff.sum() / count)


def index_map_colors(index_map, num_layers):
    """Function that color codes an index map for inspection

    Colors are evenly spaced hues, one per layer, NONE pixels are black.

    Returns
    -------
    np.ndarray
        (height, width, 3) uint8 image
    """

    palette = np.zeros((max(num_layers, 1) + 1, 3), dtype=np.uint8)
    for layer in range(num_layers):
        hue = 6.0 * layer / max(num_layers, 1)
        sector = int(hue) % 6
        f = hue - int(hue)
        ramps = ((1, f, 0), (1 - f, 1, 0), (0, 1, f), (0, 1 - f, 1), (f, 0, 1), (1, 0, 1 - f))
        palette[layer + 1] = np.round(np.array(ramps[sector]) * 255.0).astype(np.uint8)
    return palette[np.asarray(index_map) + 1]
