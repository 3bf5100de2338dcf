"""Object-wise layered decomposition of a single view.

A LayerStack holds one InstanceLayer per visible object, in full visibility, plus a LayoutLayer
grouping the structural elements of the scene. Instance order is stable and is the tie-break order
for every pooling operation.
"""


import numpy as np

from layeredDepth.errors import DimensionError, InvalidRasterError
from layeredDepth.data_model.raster import RgbadImage


# Padding bands used for the network input, rows top/bottom and columns left/right
DEFAULT_PAD_TOP_BOTTOM = 16
DEFAULT_PAD_LEFT_RIGHT = 12

# A valid layer pixel is present for pooling when its alpha reaches this value
DEFAULT_ALPHA_MIN = 0.5


def one_hot(class_id, num_classes):
    """Function that builds a one-hot class score vector

    Parameters
    ----------
    class_id : int
        index of the true class
    num_classes : int
        size of the class table

    Returns
    -------
    np.ndarray
        float64 vector with a single 1
    """

    scores = np.zeros(num_classes)
    scores[class_id] = 1.0
    return scores


class InstanceLayer:
    """Class that represents one object instance rendered in full visibility

    Attributes
    ----------
    image : RgbadImage
        full extent of the object, including parts occluded in the composed view
    class_id : int
        category of the object
    class_scores : np.ndarray
        probability vector over the class table
    visibility_mask : np.ndarray
        bool raster, pixels where this instance is front-most in the composed view
    confidence_mask : np.ndarray
        float raster in [0, 1], simulated detector mask
    source_index : int or None
        index of the object in the scene it was rendered from
    """

    def __init__(self, image, class_id, class_scores, visibility_mask, confidence_mask=None, source_index=None):
        """Constructor for InstanceLayer
        """

        self.image = image
        self.class_id = int(class_id)
        self.class_scores = np.array(class_scores, dtype=np.float64)
        self.visibility_mask = np.array(visibility_mask, dtype=bool)
        if confidence_mask is None:
            confidence_mask = self.visibility_mask.astype(np.float64)
        self.confidence_mask = np.array(confidence_mask, dtype=np.float64)
        self.source_index = source_index

        if self.visibility_mask.shape != image.shape or self.confidence_mask.shape != image.shape:
            raise DimensionError('Instance masks must match the instance raster size')
        if np.any(self.visibility_mask & ~image.valid):
            raise InvalidRasterError('Visibility mask extends beyond the instance extent')
        if np.any(self.confidence_mask < 0.0) or np.any(self.confidence_mask > 1.0):
            raise InvalidRasterError('Confidence mask must lie in [0, 1]')
        if self.class_scores.ndim != 1 or np.any(self.class_scores < 0.0) or abs(self.class_scores.sum() - 1.0) > 1e-6:
            raise InvalidRasterError('Class scores must be a non-negative vector summing to 1')
        if not 0 <= self.class_id < len(self.class_scores):
            raise InvalidRasterError('Class id {} outside a table of {} classes'.format(self.class_id, len(self.class_scores)))

        for array in (self.class_scores, self.visibility_mask, self.confidence_mask):
            array.setflags(write=False)


    @property
    def touches_border(self):
        """True if the full object extent reaches the outermost image rows or columns"""

        valid = self.image.valid
        return bool(valid[0, :].any() or valid[-1, :].any() or valid[:, 0].any() or valid[:, -1].any())


    def with_detection(self, confidence_mask, class_scores):
        """Function that returns a copy carrying new detector outputs

        Returns
        -------
        InstanceLayer
            instance with replaced confidence mask and class scores
        """

        return InstanceLayer(self.image, self.class_id, class_scores, self.visibility_mask,
                             confidence_mask, self.source_index)


class LayoutLayer:
    """Class that represents the structural shell of the scene merged into one layer

    Attributes
    ----------
    image : RgbadImage
        layout raster, hole-free as generated
    structural_classes : tuple of int
        class ids merged into the layout
    segmentation : np.ndarray or None
        (height, width) index of the layout instance (room face) seen at each pixel, -1 where none
    instance_classes : tuple of int
        class id of every layout instance
    """

    def __init__(self, image, structural_classes, segmentation=None, instance_classes=()):
        """Constructor for LayoutLayer
        """

        self.image = image
        self.structural_classes = tuple(sorted(set(int(c) for c in structural_classes)))
        self.instance_classes = tuple(int(c) for c in instance_classes)
        self.segmentation = None
        if segmentation is not None:
            self.segmentation = np.array(segmentation, dtype=np.int64)
            if self.segmentation.shape != image.shape:
                raise DimensionError('Layout segmentation {} does not match raster {}'.format(self.segmentation.shape, image.shape))
            if np.any(self.segmentation >= len(self.instance_classes)) or np.any(self.segmentation < -1):
                raise InvalidRasterError('Layout segmentation refers to unknown layout instances')
            if not set(self.instance_classes) <= set(self.structural_classes):
                raise InvalidRasterError('Layout instance classes must be structural classes')


    def is_hole_free(self):
        return bool(self.image.valid.all())


    def class_map(self):
        """Function that labels every pixel with the class of its layout instance

        Returns
        -------
        np.ndarray
            (height, width) class ids, -1 where unsegmented
        """

        if self.segmentation is None:
            return np.full(self.image.shape, -1, dtype=np.int64)
        lookup = np.array(self.instance_classes + (-1,), dtype=np.int64)
        return lookup[self.segmentation]


    def padded(self, top_bottom, left_right):
        segmentation = None
        if self.segmentation is not None:
            segmentation = np.pad(self.segmentation, ((top_bottom, top_bottom), (left_right, left_right)), constant_values=-1)
        return LayoutLayer(self.image.pad(top_bottom, left_right), self.structural_classes, segmentation, self.instance_classes)


    def cropped(self, top_bottom, left_right):
        segmentation = None
        if self.segmentation is not None:
            segmentation = _crop_mask(self.segmentation, top_bottom, left_right)
        return LayoutLayer(self.image.crop(top_bottom, left_right), self.structural_classes, segmentation, self.instance_classes)


class LayerStack:
    """Class that represents the per-object decomposition of a single view

    Attributes
    ----------
    instances : tuple of InstanceLayer
        instance layers in stable order
    layout : LayoutLayer
        layout layer, always last in pooling order
    camera : Camera
        intrinsics of the view
    view_pose : Pose
        camera-to-world pose of the view
    class_table : dict of int -> str
        class names, None if unknown
    """

    def __init__(self, instances, layout, camera, view_pose, class_table=None):
        """Constructor for LayerStack
        """

        self.instances = tuple(instances)
        self.layout = layout
        self.camera = camera
        self.view_pose = view_pose
        self.class_table = None if class_table is None else {int(k): str(v) for k, v in class_table.items()}

        shape = layout.image.shape
        if shape != (camera.height, camera.width):
            raise DimensionError('Layout raster {} does not match camera {}x{}'.format(shape, camera.width, camera.height))
        for index, instance in enumerate(self.instances):
            if instance.image.shape != shape:
                raise DimensionError('Instance {} raster {} does not match layout {}'.format(index, instance.image.shape, shape))


    @property
    def shape(self):
        return self.layout.image.shape


    def layer_images(self):
        """Function that lists layer rasters in pooling order, instances first, layout last

        Returns
        -------
        list of RgbadImage
            one raster per layer
        """

        return [instance.image for instance in self.instances] + [self.layout.image]


    def without_instances(self, keep):
        """Function that builds a stack keeping only the selected instances

        Parameters
        ----------
        keep : function(InstanceLayer) -> bool
            predicate choosing instances to keep

        Returns
        -------
        LayerStack
            stack with the same layout and camera
        """

        return LayerStack([inst for inst in self.instances if keep(inst)], self.layout, self.camera,
                          self.view_pose, self.class_table)


def _pad_mask(mask, top_bottom, left_right):
    return np.pad(mask, ((top_bottom, top_bottom), (left_right, left_right)))


def _crop_mask(mask, top_bottom, left_right):
    return mask[top_bottom:mask.shape[0] - top_bottom, left_right:mask.shape[1] - left_right]


def pad_borders(stack, top_bottom=DEFAULT_PAD_TOP_BOTTOM, left_right=DEFAULT_PAD_LEFT_RIGHT):
    """Function that surrounds every raster of a stack with invalid bands

    Parameters
    ----------
    stack : LayerStack
        stack to pad
    top_bottom=16 : int
        rows added at the top and at the bottom
    left_right=12 : int
        columns added at the left and at the right

    Returns
    -------
    LayerStack
        padded stack, principal point shifted accordingly
    """

    if top_bottom < 0 or left_right < 0:
        raise InvalidRasterError('Pad amounts must be non-negative')
    if top_bottom == 0 and left_right == 0:
        return stack

    instances = []
    for instance in stack.instances:
        instances.append(InstanceLayer(instance.image.pad(top_bottom, left_right),
                                       instance.class_id, instance.class_scores,
                                       _pad_mask(instance.visibility_mask, top_bottom, left_right),
                                       _pad_mask(instance.confidence_mask, top_bottom, left_right),
                                       instance.source_index))
    layout = stack.layout.padded(top_bottom, left_right)
    return LayerStack(instances, layout, stack.camera.shifted(top_bottom, left_right), stack.view_pose, stack.class_table)


def crop_borders(stack, top_bottom=DEFAULT_PAD_TOP_BOTTOM, left_right=DEFAULT_PAD_LEFT_RIGHT):
    """Function that removes pad bands, the inverse of pad_borders

    Returns
    -------
    LayerStack
        cropped stack
    """

    if top_bottom < 0 or left_right < 0:
        raise InvalidRasterError('Crop amounts must be non-negative')
    if 2 * top_bottom >= stack.camera.height or 2 * left_right >= stack.camera.width:
        raise DimensionError('Crop bands leave no pixels')
    if top_bottom == 0 and left_right == 0:
        return stack

    instances = []
    for instance in stack.instances:
        instances.append(InstanceLayer(instance.image.crop(top_bottom, left_right),
                                       instance.class_id, instance.class_scores,
                                       _crop_mask(instance.visibility_mask, top_bottom, left_right),
                                       _crop_mask(instance.confidence_mask, top_bottom, left_right),
                                       instance.source_index))
    layout = stack.layout.cropped(top_bottom, left_right)
    return LayerStack(instances, layout, stack.camera.shifted(-top_bottom, -left_right), stack.view_pose, stack.class_table)
