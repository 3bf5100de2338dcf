"""Reading and writing of layer stack directories.

A stack directory holds manifest.json, the composite view under full/, the layout under layout/
and one instances/NNN/ directory per instance. Colors and masks are 8-bit PNG, depths 16-bit PNG
in millimeters with 0 marking invalid pixels. Index maps are 16-bit PNG holding index + 1, so 0
marks pixels without a layer.
"""


import os
import json

import numpy as np
import imageio.v2 as iio

import layeredDepth.io.logger as LOG
from layeredDepth.errors import MissingFileError, VersionError, InconsistentDatasetError, DepthRangeError
from layeredDepth.data_model.raster import RgbadImage, Camera, Pose
from layeredDepth.data_model.layer_stack import InstanceLayer, LayoutLayer, LayerStack
from layeredDepth.io.config_writer import write_json
from layeredDepth.driver.compose_driver import min_depth_pool


FORMAT_VERSION = 1
MANIFEST_FILE = 'manifest.json'

# 16-bit millimeter PNG range; 0 is reserved for invalid pixels
MAX_DEPTH_M = 65.535


def _require_file(path):
    if not os.path.isfile(path):
        raise MissingFileError('Missing dataset file {}'.format(path))
    return path


def encode_depth(depth, valid):
    """Function that converts metric depth to 16-bit millimeters

    Returns
    -------
    np.ndarray
        uint16 raster, 0 where invalid
    """

    valid_depth = depth[valid]
    if valid_depth.size and valid_depth.max() >= MAX_DEPTH_M:
        raise DepthRangeError('Depth {:.4f} m cannot be stored, limit is {} m'.format(float(valid_depth.max()), MAX_DEPTH_M))
    if valid_depth.size and np.round(valid_depth.min() * 1000.0) < 1:
        raise DepthRangeError('Depth {:.6f} m would be stored as invalid'.format(float(valid_depth.min())))
    return np.where(valid, np.round(depth * 1000.0), 0).astype(np.uint16)


def decode_depth(encoded):
    """Function that converts 16-bit millimeters back to meters

    Returns
    -------
    np.ndarray
        depth in meters
    np.ndarray
        bool raster, True where the stored value is non-zero
    """

    encoded = np.asarray(encoded)
    return encoded.astype(np.float64) / 1000.0, encoded > 0


def encode_unit(values):
    return np.round(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_image(image, directory):
    """Function that writes an RgbadImage as rgba.png and depth.png

    Parameters
    ----------
    image : RgbadImage
        raster to write
    directory : str
        output directory, created if needed
    """

    os.makedirs(directory, exist_ok=True)
    iio.imwrite(os.path.join(directory, 'rgba.png'), encode_unit(image.rgba))
    iio.imwrite(os.path.join(directory, 'depth.png'), encode_depth(image.depth, image.valid))


def read_image(directory):
    """Function that reads an RgbadImage written by write_image

    Returns
    -------
    RgbadImage
        raster, valid where the stored depth is non-zero
    """

    rgba = iio.imread(_require_file(os.path.join(directory, 'rgba.png')))
    encoded = iio.imread(_require_file(os.path.join(directory, 'depth.png')))
    depth, valid = decode_depth(encoded)
    if rgba.shape != depth.shape + (4,):
        raise InconsistentDatasetError('Color {} and depth {} in {} disagree'.format(rgba.shape, depth.shape, directory))
    return RgbadImage(rgba.astype(np.float64) / 255.0, depth, valid)


def write_mask(mask, path, soft=False):
    data = encode_unit(mask) if soft else np.where(mask, 255, 0).astype(np.uint8)
    iio.imwrite(path, data)


def read_mask(path, soft=False):
    data = iio.imread(_require_file(path))
    return data.astype(np.float64) / 255.0 if soft else data > 127


def write_index_map(index_map, path):
    index_map = np.asarray(index_map)
    if index_map.size and index_map.max() >= np.iinfo(np.uint16).max:
        raise InconsistentDatasetError('Index map value {} cannot be stored'.format(int(index_map.max())))
    iio.imwrite(path, (index_map + 1).astype(np.uint16))


def read_index_map(path):
    return iio.imread(_require_file(path)).astype(np.int64) - 1


def _read_json(path):
    with open(_require_file(path), 'r') as json_file:
        try:
            return json.load(json_file)
        except ValueError as e:
            raise InconsistentDatasetError('{} is not valid JSON: {}'.format(path, str(e)))


def instance_dir_name(index):
    return '{:03d}'.format(index)


def build_manifest(stack, seed=None, overlap=None, extra=None):
    """Function that describes a stack as a manifest record

    Returns
    -------
    dict
        manifest with a fixed key order
    """

    manifest = {'format_version': FORMAT_VERSION,
                'width': stack.camera.width,
                'height': stack.camera.height,
                'camera': stack.camera.to_dict(),
                'view_pose': stack.view_pose.to_dict(),
                'class_table': None if stack.class_table is None else {str(k): v for k, v in sorted(stack.class_table.items())},
                'structural_classes': list(stack.layout.structural_classes),
                'seed': seed,
                'overlap': overlap,
                'instances': []}
    for index, instance in enumerate(stack.instances):
        manifest['instances'].append({'dir': instance_dir_name(index),
                                      'class_id': instance.class_id,
                                      'class_scores': instance.class_scores.tolist(),
                                      'touches_border': instance.touches_border,
                                      'source_index': instance.source_index})
    for key, value in (extra or {}).items():
        manifest[key] = value
    return manifest


def save_stack(stack, directory, detections=None, seed=None, overlap=None, extra=None):
    """Function that writes a layer stack directory

    Parameters
    ----------
    stack : LayerStack
        stack to write
    directory : str
        output directory
    detections=None : list of tuple
        (confidence_mask, class_scores) per instance, replacing the stack's own
    seed=None : int
        seed recorded in the manifest
    overlap=None : float
        overlap statistic recorded in the manifest
    extra=None : dict
        additional manifest entries
    """

    if detections is not None:
        if len(detections) != len(stack.instances):
            raise InconsistentDatasetError('Got {} detections for {} instances'.format(len(detections), len(stack.instances)))
        stack = LayerStack([inst.with_detection(conf, scores) for inst, (conf, scores) in zip(stack.instances, detections)],
                           stack.layout, stack.camera, stack.view_pose, stack.class_table)

    os.makedirs(directory, exist_ok=True)
    with LOG.stage('write stack'):
        _write_stack_files(stack, directory, seed, overlap, extra)
    LOG.output('stack with {} instances'.format(len(stack.instances)), directory)


def _write_stack_files(stack, directory, seed, overlap, extra):
    full_dir = os.path.join(directory, 'full')
    pooled = min_depth_pool(stack)
    write_image(pooled.image, full_dir)
    write_index_map(pooled.index_map, os.path.join(full_dir, 'instances.png'))
    write_json({'layer_class_ids': [instance.class_id for instance in stack.instances] + [None],
                'layout_index': len(stack.instances)}, os.path.join(full_dir, 'meta.json'))

    layout_dir = os.path.join(directory, 'layout')
    write_image(stack.layout.image, layout_dir)
    if stack.layout.segmentation is not None:
        write_index_map(stack.layout.segmentation, os.path.join(layout_dir, 'segmentation.png'))
    write_json({'instance_classes': list(stack.layout.instance_classes),
                'segmented': stack.layout.segmentation is not None}, os.path.join(layout_dir, 'meta.json'))
    for index, instance in enumerate(stack.instances):
        instance_dir = os.path.join(directory, 'instances', instance_dir_name(index))
        write_image(instance.image, instance_dir)
        write_mask(instance.visibility_mask, os.path.join(instance_dir, 'mask.png'))
        write_mask(instance.confidence_mask, os.path.join(instance_dir, 'conf.png'), soft=True)
        write_json({'class_id': instance.class_id, 'class_scores': instance.class_scores.tolist(),
                    'touches_border': instance.touches_border, 'source_index': instance.source_index},
                   os.path.join(instance_dir, 'meta.json'))
    write_json(build_manifest(stack, seed, overlap, extra), os.path.join(directory, MANIFEST_FILE))


def read_manifest(directory):
    """Function that reads and checks the manifest of a stack directory

    Returns
    -------
    dict
        manifest content
    """

    manifest = _read_json(os.path.join(directory, MANIFEST_FILE))
    if manifest.get('format_version') != FORMAT_VERSION:
        raise VersionError('Manifest version {} is not supported, expected {}'.format(manifest.get('format_version'), FORMAT_VERSION))
    return manifest


def load_stack(directory):
    """Function that reads a layer stack directory

    Parameters
    ----------
    directory : str
        directory written by save_stack

    Returns
    -------
    LayerStack
        stack with detections attached to its instances
    list of tuple
        (confidence_mask, class_scores) per instance
    """

    manifest = read_manifest(directory)
    camera = Camera.from_dict(manifest['camera'])
    pose = Pose.from_dict(manifest['view_pose'])
    table = manifest['class_table']
    class_table = None if table is None else {int(k): v for k, v in table.items()}
    shape = (manifest['height'], manifest['width'])

    layout = read_layout(os.path.join(directory, 'layout'), manifest['structural_classes'])
    if layout.image.shape != shape:
        raise InconsistentDatasetError('Layout {} does not match manifest size {}'.format(layout.image.shape, shape))

    instances = []
    detections = []
    for entry in manifest['instances']:
        instance_dir = os.path.join(directory, 'instances', entry['dir'])
        image = read_image(instance_dir)
        if image.shape != shape:
            raise InconsistentDatasetError('Instance {} {} does not match manifest size {}'.format(entry['dir'], image.shape, shape))
        if class_table is not None and entry['class_id'] not in class_table:
            raise InconsistentDatasetError('Instance {} has class {} missing from the class table'.format(entry['dir'], entry['class_id']))
        visibility = read_mask(os.path.join(instance_dir, 'mask.png')) & image.valid
        confidence = read_mask(os.path.join(instance_dir, 'conf.png'), soft=True)
        scores = np.array(entry['class_scores'], dtype=np.float64)
        instances.append(InstanceLayer(image, entry['class_id'], scores, visibility, confidence, entry.get('source_index')))
        detections.append((confidence, scores))

    try:
        stack = LayerStack(instances, layout, camera, pose, class_table)
    except ValueError as e:
        raise InconsistentDatasetError('Stack in {} is inconsistent: {}'.format(directory, str(e)))
    LOG.debug('Loaded stack with {} instances from {}'.format(len(instances), directory))
    return stack, detections


def read_layout(layout_dir, structural_classes):
    """Function that reads a layout directory with its segmentation

    Returns
    -------
    LayoutLayer
        layout, unsegmented if no segmentation was stored
    """

    image = read_image(layout_dir)
    meta = _read_json(os.path.join(layout_dir, 'meta.json'))
    segmentation = None
    if meta.get('segmented'):
        segmentation = read_index_map(os.path.join(layout_dir, 'segmentation.png'))
    try:
        return LayoutLayer(image, structural_classes, segmentation, meta.get('instance_classes', ()))
    except ValueError as e:
        raise InconsistentDatasetError('Layout in {} is inconsistent: {}'.format(layout_dir, str(e)))


def read_full_segmentation(directory):
    """Function that reads the instance map of the composite view of a stack directory

    Returns
    -------
    np.ndarray
        (height, width) layer index per pixel, the layout at layout_index, -1 where no layer
    list
        class id of every layer, None for the layout
    """

    full_dir = os.path.join(directory, 'full')
    index_map = read_index_map(os.path.join(full_dir, 'instances.png'))
    meta = _read_json(os.path.join(full_dir, 'meta.json'))
    class_ids = meta['layer_class_ids']
    if index_map.size and index_map.max() >= len(class_ids):
        raise InconsistentDatasetError('Instance map of {} refers to {} layers, meta lists {}'.format(
            directory, int(index_map.max()) + 1, len(class_ids)))
    return index_map, class_ids
