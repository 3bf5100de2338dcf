"""Layered depth image representation.

An Ldi stores, for every pixel, a ragged list of (rgba, depth, source layer) samples sorted
near-to-far along the viewing ray. Samples are kept in flat arrays in row-major pixel order, the
samples of one pixel being consecutive.
"""


import numpy as np

from layeredDepth.errors import DimensionError, InvalidRasterError
from layeredDepth.data_model.raster import RgbadImage
from layeredDepth.data_model.layer_stack import DEFAULT_ALPHA_MIN


class Ldi:
    """Class that represents a layered depth image

    Attributes
    ----------
    counts : np.ndarray
        (height, width) number of samples per pixel
    rgba : np.ndarray
        (total, 4) sample colors
    depth : np.ndarray
        (total,) sample z-depths, non-decreasing within a pixel
    layer : np.ndarray
        (total,) index of the stack layer each sample came from
    offsets : np.ndarray
        (height, width) index of the first sample of each pixel
    """

    def __init__(self, counts, rgba, depth, layer):
        """Constructor for Ldi
        """

        counts = np.array(counts, dtype=np.int64)
        rgba = np.array(rgba, dtype=np.float64).reshape(-1, 4)
        depth = np.array(depth, dtype=np.float64).reshape(-1)
        layer = np.array(layer, dtype=np.int64).reshape(-1)

        if counts.ndim != 2 or np.any(counts < 0):
            raise DimensionError('Sample counts must be a non-negative 2D raster')
        total = int(counts.sum())
        if not (len(rgba) == len(depth) == len(layer) == total):
            raise DimensionError('Sample arrays hold {}/{}/{} entries but counts sum to {}'.format(
                len(rgba), len(depth), len(layer), total))

        offsets = np.zeros(counts.size, dtype=np.int64)
        np.cumsum(counts.reshape(-1)[:-1], out=offsets[1:])

        # consecutive samples of the same pixel must not get closer
        same_pixel = np.ones(total, dtype=bool)
        same_pixel[offsets[counts.reshape(-1) > 0]] = False
        if total > 1 and np.any(depth[1:][same_pixel[1:]] < depth[:-1][same_pixel[1:]]):
            raise InvalidRasterError('LDI samples must be sorted near-to-far at every pixel')

        self.counts = counts
        self.rgba = rgba
        self.depth = depth
        self.layer = layer
        self.offsets = offsets.reshape(counts.shape)
        for array in (self.counts, self.rgba, self.depth, self.layer, self.offsets):
            array.setflags(write=False)


    @classmethod
    def empty(cls, width, height):
        return cls(np.zeros((height, width), dtype=np.int64), np.zeros((0, 4)), np.zeros(0), np.zeros(0, dtype=np.int64))


    @property
    def width(self):
        return self.counts.shape[1]


    @property
    def height(self):
        return self.counts.shape[0]


    @property
    def shape(self):
        return self.counts.shape


    @property
    def total(self):
        return len(self.depth)


    @property
    def max_layers(self):
        """Largest number of samples found at any pixel"""
        return int(self.counts.max()) if self.counts.size else 0


    def samples_at(self, row, col):
        """Function that lists the samples of one pixel

        Returns
        -------
        list of tuple
            (rgba, depth, layer) per sample, near-to-far
        """

        start = self.offsets[row, col]
        return [(self.rgba[i].copy(), float(self.depth[i]), int(self.layer[i]))
                for i in range(start, start + self.counts[row, col])]


    def rank(self, index):
        """Function that extracts the index-th sample of every pixel as a raster

        Parameters
        ----------
        index : int
            zero based depth rank

        Returns
        -------
        RgbadImage
            raster valid where the pixel has more than index samples
        np.ndarray
            source layer raster, -1 where the rank does not exist
        """

        has = self.counts > index
        sample = np.where(has, self.offsets + index, 0)
        rgba = np.where(has[..., None], self.rgba[sample] if self.total else 0.0, 0.0)
        depth = np.where(has, self.depth[sample] if self.total else 0.0, 0.0)
        layer = np.where(has, self.layer[sample] if self.total else -1, -1)
        return RgbadImage(rgba, depth, has), layer


    def equals(self, other):
        return (np.array_equal(self.counts, other.counts) and np.array_equal(self.rgba, other.rgba)
                and np.array_equal(self.depth, other.depth) and np.array_equal(self.layer, other.layer))


def ldi_from_images(images, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that merges a list of layer rasters into an LDI

    Samples are sorted by depth at every pixel. Equal depths keep list order, so earlier layers
    come first.

    Parameters
    ----------
    images : list of RgbadImage
        layers in tie-break order
    alpha_min=0.5 : float
        minimum alpha for a valid pixel to become a sample

    Returns
    -------
    Ldi
        the merged layered depth image
    """

    if len(images) == 0:
        raise DimensionError('Cannot build an LDI from zero layers')
    shape = images[0].shape
    for image in images:
        if image.shape != shape:
            raise DimensionError('Layer raster {} does not match {}'.format(image.shape, shape))

    present = np.stack([image.present(alpha_min) for image in images])
    depth = np.stack([image.depth for image in images])
    rgba = np.stack([image.rgba for image in images])

    keyed = np.where(present, depth, np.inf)
    order = np.argsort(keyed, axis=0, kind='stable')
    counts = present.sum(axis=0)

    # (height, width, layers) so that boolean selection walks pixels row-major, ranks inside
    order = np.moveaxis(order, 0, -1)
    take = np.arange(len(images))[None, None, :] < counts[..., None]
    rows, cols, _ = np.nonzero(take)
    layers = order[take]

    return Ldi(counts, rgba[layers, rows, cols], depth[layers, rows, cols], layers)


def ldi_from_stack(stack, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that sorts the object-wise layers of a stack into an LDI

    Ties between equal depths go to the smaller instance index, the layout comes last. A sample
    is a valid pixel whose alpha reaches alpha_min, the presence rule of minimum depth pooling, so
    the nearest sample always equals the pooled view. With alpha_min 0 every valid pixel counts.

    Parameters
    ----------
    stack : LayerStack
        instances and layout of one view
    alpha_min=0.5 : float
        minimum alpha for a valid pixel to become a sample

    Returns
    -------
    Ldi
        layered depth image, source layer index len(instances) marking the layout
    """

    return ldi_from_images(stack.layer_images(), alpha_min)


def first_layer(ldi):
    """Function that extracts the first visible surface of every pixel

    Returns
    -------
    RgbadImage
        nearest sample per pixel, invalid where the pixel has no samples
    """

    image, _ = ldi.rank(0)
    return image
