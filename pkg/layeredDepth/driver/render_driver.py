"""Module responsible for rendering from layered representations

Forward warps LDI layers into novel views with a deterministic z-test, fills discretization
cracks, and removes object classes from a layer stack.
"""

import math

import numpy as np

import layeredDepth.io.logger as LOG
from layeredDepth.errors import ConfigError, DimensionError, PoseFormatError
from layeredDepth.data_model.raster import RgbadImage, Pose
from layeredDepth.data_model.run_config import WarpConfig
from layeredDepth.data_model.layer_stack import DEFAULT_ALPHA_MIN
from layeredDepth.driver.compose_driver import min_depth_pool


def parse_pose_offset(text):
    """Function that parses a "tx,ty,tz,rx,ry,rz" pose string

    Parameters
    ----------
    text : str
        translation in meters followed by angles in degrees

    Returns
    -------
    tuple of float
        the six offset values
    """

    parts = [part.strip() for part in str(text).split(',')]
    if len(parts) != 6:
        raise PoseFormatError('Pose "{}" must have six comma separated values tx,ty,tz,rx,ry,rz'.format(text))
    try:
        values = tuple(float(part) for part in parts)
    except ValueError:
        raise PoseFormatError('Pose "{}" contains a non-numeric value'.format(text))
    if not all(math.isfinite(value) for value in values):
        raise PoseFormatError('Pose "{}" contains a non-finite value'.format(text))
    return values


def offset_to_relative_pose(offset):
    """Function that converts a target camera offset into the source-to-target transform

    Parameters
    ----------
    offset : tuple of float
        (tx, ty, tz, rx, ry, rz), the target camera expressed in the source camera frame

    Returns
    -------
    Pose
        transform from source camera to target camera coordinates
    """

    tx, ty, tz, rx, ry, rz = offset
    return Pose.from_euler(rx, ry, rz, tx, ty, tz).inverse()


def _resolve_splats(target_index, depth, epsilon):
    # candidates are source pixels in row-major order, so position is the source index
    order = np.lexsort((np.arange(len(depth)), depth, target_index))
    sorted_target = target_index[order]
    starts = np.ones(len(order), dtype=bool)
    starts[1:] = sorted_target[1:] != sorted_target[:-1]
    group_min = depth[order][starts][np.cumsum(starts) - 1]
    near = order[depth[order] <= group_min + epsilon]

    near = near[np.lexsort((near, target_index[near]))]
    first = np.ones(len(near), dtype=bool)
    first[1:] = target_index[near][1:] != target_index[near][:-1]
    return near[first]


def _farthest_neighbor(depth, valid):
    # max depth over the valid 8-neighborhood, inf where no neighbor is valid
    height, width = depth.shape
    padded = np.pad(np.where(valid, depth, -np.inf), 1, constant_values=-np.inf)
    farthest = np.max([padded[1 + dr:1 + dr + height, 1 + dc:1 + dc + width]
                       for dr in (-1, 0, 1) for dc in (-1, 0, 1) if dr or dc], axis=0)
    return np.where(np.isneginf(farthest), np.inf, farthest)


def warp_layer(layer, camera, relative_pose, target=None, config=None, only_empty=False):
    """Function that forward warps one layer into a target view

    Every valid source pixel is lifted with its depth, moved by relative_pose and splatted to the
    nearest target pixel. Among splats landing on one pixel, those within z_test_epsilon of the
    nearest form a tie that the smallest row-major source index wins.

    When only filling empty pixels, a splat lying more than depth_gate behind every valid
    8-neighbor of its pixel in the incoming target is rejected. Such a pixel is a crack in a
    nearer surface, not a dis-occlusion.

    Parameters
    ----------
    layer : RgbadImage
        source layer
    camera : Camera
        intrinsics shared by source and target
    relative_pose : Pose
        source camera to target camera transform
    target=None : RgbadImage
        partially filled target, empty if None
    config=None : WarpConfig
        warp parameters, defaults if None
    only_empty=False : bool
        if True, splats only fill pixels the target leaves invalid

    Returns
    -------
    RgbadImage
        updated target
    int
        number of source pixels dropped behind the camera or out of bounds
    """

    config = WarpConfig() if config is None else config
    if layer.shape != (camera.height, camera.width):
        raise DimensionError('Layer {} does not match camera {}x{}'.format(layer.shape, camera.width, camera.height))
    target = RgbadImage.empty(camera.width, camera.height) if target is None else target
    if target.shape != layer.shape:
        raise DimensionError('Target {} does not match layer {}'.format(target.shape, layer.shape))

    rows, cols = np.nonzero(layer.valid)
    x, y, z = camera.unproject(cols.astype(np.float64), rows.astype(np.float64), layer.depth[rows, cols])
    x, y, z = relative_pose.apply(x, y, z)
    in_front = z > 0.0
    with np.errstate(divide='ignore', invalid='ignore'):
        u, v = camera.project(x, y, z)
        tu = np.floor(u + 0.5)
        tv = np.floor(v + 0.5)
    keep = in_front & np.isfinite(tu) & np.isfinite(tv)
    keep &= (tu >= 0) & (tu < camera.width) & (tv >= 0) & (tv < camera.height)
    dropped = int(len(keep) - np.count_nonzero(keep))

    source = np.nonzero(keep)[0]
    target_index = (tv[source] * camera.width + tu[source]).astype(np.int64)
    winners = _resolve_splats(target_index, z[source], config.z_test_epsilon)
    pixel = target_index[winners]
    source = source[winners]

    rgba = target.rgba.reshape(-1, 4).copy()
    depth = target.depth.reshape(-1).copy()
    valid = target.valid.reshape(-1).copy()
    gated = 0
    if only_empty:
        write = ~valid[pixel]
        if config.depth_gate > 0:
            farthest = _farthest_neighbor(target.depth, target.valid).reshape(-1)
            behind = write & (z[source] > farthest[pixel] + config.depth_gate)
            gated = int(np.count_nonzero(behind))
            write &= ~behind
    else:
        write = ~valid[pixel] | (z[source] < depth[pixel] - config.z_test_epsilon)
    pixel = pixel[write]
    source = source[write]
    rgba[pixel] = layer.rgba[rows[source], cols[source]]
    depth[pixel] = z[source]
    valid[pixel] = True

    LOG.print_kernel('warp_layer: {} splats, {} written, {} gated, {} dropped'.format(
        len(rows), len(pixel), gated, dropped))
    return RgbadImage(rgba.reshape(target.rgba.shape), depth.reshape(target.shape), valid.reshape(target.shape)), dropped


def _neighbors(array, fill):
    width = ((1, 1), (1, 1)) + ((0, 0),) * (array.ndim - 2)
    padded = np.pad(array, width, constant_values=fill)
    return [padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]]


def fill_cracks(image, config=None):
    """Function that closes small holes left by pixel discretization

    In each pass every invalid pixel with at least three valid 4-neighbors whose depths agree
    within fill_depth_tolerance receives the mean of those neighbors. All unit-distance neighbors
    carry equal bilinear weight. Larger holes stay invalid.

    Parameters
    ----------
    image : RgbadImage
        warped view
    config=None : WarpConfig
        fill parameters

    Returns
    -------
    RgbadImage
        view with cracks filled
    """

    config = WarpConfig() if config is None else config
    rgba = image.rgba
    depth = image.depth
    valid = image.valid
    for _ in range(config.max_fill_passes):
        near_valid = _neighbors(valid, False)
        near_depth = _neighbors(depth, 0.0)
        near_rgba = _neighbors(rgba, 0.0)

        count = sum(n.astype(np.int64) for n in near_valid)
        high = np.max([np.where(n, d, -np.inf) for n, d in zip(near_valid, near_depth)], axis=0)
        low = np.min([np.where(n, d, np.inf) for n, d in zip(near_valid, near_depth)], axis=0)
        fill = ~valid & (count >= 3)
        fill &= np.where(fill, high - low, np.inf) <= config.fill_depth_tolerance
        if not fill.any():
            break

        divisor = np.maximum(count, 1)
        mean_depth = sum(np.where(n, d, 0.0) for n, d in zip(near_valid, near_depth)) / divisor
        mean_rgba = sum(np.where(n[..., None], c, 0.0) for n, c in zip(near_valid, near_rgba)) / divisor[..., None]
        depth = np.where(fill, mean_depth, depth)
        rgba = np.where(fill[..., None], mean_rgba, rgba)
        valid = valid | fill
        LOG.print_kernel('fill_cracks: filled {} pixels'.format(int(fill.sum())))
    return RgbadImage(rgba, depth, valid)


def synthesize_view(ldi, camera, relative_pose, config=None, fill=True):
    """Function that renders an LDI from a new viewpoint

    LDI ranks are warped near-to-far, each rank only filling pixels still empty after the
    previous ones. Cracks are filled after every rank, so a rank never shows through discretization
    cracks of the nearer ranks. The last fill runs after all ranks.

    Parameters
    ----------
    ldi : Ldi
        layered depth image of the source view
    camera : Camera
        intrinsics shared by source and target
    relative_pose : Pose
        source camera to target camera transform
    config=None : WarpConfig
        warp parameters
    fill=True : bool
        set False to skip crack filling

    Returns
    -------
    RgbadImage
        synthesized view, invalid where nothing landed
    """

    config = WarpConfig() if config is None else config
    target = RgbadImage.empty(camera.width, camera.height)
    dropped = 0
    with LOG.stage('synthesize'):
        for rank in range(ldi.max_layers):
            layer, _ = ldi.rank(rank)
            target, lost = warp_layer(layer, camera, relative_pose, target, config, only_empty=(rank > 0))
            dropped += lost
            if fill:
                target = fill_cracks(target, config)
    LOG.debug('synthesize_view: {} ranks, {} splats dropped, fill ratio {:.4f}'.format(
        ldi.max_layers, dropped, fill_ratio(target)))
    return target


def synthesize_path(ldi, camera, offset, frames, config=None):
    """Function that renders frames along a straight camera path

    Frame i of n uses the offset scaled by i / n, so the last frame is the full offset.

    Returns
    -------
    list of RgbadImage
        one view per frame
    """

    if frames < 1:
        raise ConfigError('Frame count must be at least 1')
    views = []
    for frame in range(1, frames + 1):
        scaled = tuple(value * frame / frames for value in offset)
        views.append(synthesize_view(ldi, camera, offset_to_relative_pose(scaled), config))
    return views


def fill_ratio(image):
    return float(np.count_nonzero(image.valid)) / image.valid.size


def remove_objects(stack, class_ids, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that recomposes a stack with every instance of the given classes deleted

    Parameters
    ----------
    stack : LayerStack
        source stack, layout always kept
    class_ids : set of int
        classes to delete
    alpha_min=0.5 : float
        pooling presence threshold

    Returns
    -------
    ComposeResult
        diminished view
    """

    class_ids = set(int(c) for c in class_ids)
    known = set(stack.class_table) if stack.class_table is not None else None
    if known is not None and not class_ids <= known:
        raise ConfigError('Unknown class ids {}, available {}'.format(sorted(class_ids - known), sorted(known)))
    kept = stack.without_instances(lambda instance: instance.class_id not in class_ids)
    LOG.debug('remove_objects: removed {} of {} instances'.format(
        len(stack.instances) - len(kept.instances), len(stack.instances)))
    return min_depth_pool(kept, alpha_min)
