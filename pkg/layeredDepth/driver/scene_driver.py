"""Module responsible for procedural ground-truth generation

Ray casts parametric scenes to render every object in full visibility, the layout, and the
composite view, then assembles layer stacks, filters views by layer overlap, perturbs camera poses
and simulates detector outputs. All results are pure functions of the scene and the seeds.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import ndimage

import layeredDepth.io.logger as LOG
from layeredDepth.errors import GeometryError, ConfigError
from layeredDepth.data_model.raster import RgbadImage, Camera, Pose
from layeredDepth.data_model.layer_stack import InstanceLayer, LayoutLayer, LayerStack, one_hot, DEFAULT_ALPHA_MIN
from layeredDepth.data_model.ldi import ldi_from_stack
from layeredDepth.data_model.scene_spec import SceneSpec, Room, Primitive, Texture, ROOM_FACES


# Camera-to-world rotation of an unrotated camera: x right, y down, z forward maps to
# world x right, y up, looking along -z
_BASE_ROTATION = np.diag([1.0, -1.0, -1.0])


class SceneHits:
    """Class that holds the per-primitive ray cast results of one view

    Attributes
    ----------
    object_depth : np.ndarray
        (objects, height, width) z-depth of each object, inf where missed
    object_rgb : np.ndarray
        (objects, height, width, 3) object colors, zero where missed
    layout_depth : np.ndarray
        (height, width) z-depth of the room shell
    layout_rgb : np.ndarray
        (height, width, 3) room shell colors
    layout_face : np.ndarray
        (height, width) index into ROOM_FACES
    """

    def __init__(self, object_depth, object_rgb, layout_depth, layout_rgb, layout_face):
        """Constructor for SceneHits
        """

        self.object_depth = object_depth
        self.object_rgb = object_rgb
        self.layout_depth = layout_depth
        self.layout_rgb = layout_rgb
        self.layout_face = layout_face


    def front_index(self):
        """Function that finds the front-most surface of every pixel

        Ties go to the smaller object index, the layout loses ties to objects.

        Returns
        -------
        np.ndarray
            (height, width) object index, or the object count where the layout is in front
        """

        stacked = np.concatenate([self.object_depth, self.layout_depth[None]], axis=0)
        return np.argmin(stacked, axis=0)


def _world_rays(camera, pose, row_start, row_stop):
    x, y, z = camera.pixel_directions(row_start, row_stop)
    r = pose.rotation
    return (r[0, 0] * x + r[0, 1] * y + r[0, 2] * z,
            r[1, 0] * x + r[1, 1] * y + r[1, 2] * z,
            r[2, 0] * x + r[2, 1] * y + r[2, 2] * z)


def _intersect_box(low, high, origin, directions):
    near = None
    far = None
    for axis in range(3):
        d = directions[axis]
        o = origin[axis]
        with np.errstate(divide='ignore', invalid='ignore'):
            t1 = (low[axis] - o) / d
            t2 = (high[axis] - o) / d
        inside = low[axis] < o < high[axis]
        axis_near = np.where(d == 0, -np.inf if inside else np.inf, np.minimum(t1, t2))
        axis_far = np.where(d == 0, np.inf if inside else -np.inf, np.maximum(t1, t2))
        near = axis_near if near is None else np.maximum(near, axis_near)
        far = axis_far if far is None else np.minimum(far, axis_far)
    hit = (near <= far) & (near > 0)
    return np.where(hit, near, np.inf)


def _intersect_sphere(center, radius, origin, directions):
    dx, dy, dz = directions
    ox, oy, oz = origin - center
    a = dx * dx + dy * dy + dz * dz
    b = dx * ox + dy * oy + dz * oz
    c = ox * ox + oy * oy + oz * oz - radius * radius
    disc = b * b - a * c
    root = np.sqrt(np.maximum(disc, 0.0))
    s = (-b - root) / a
    hit = (disc >= 0) & (s > 0)
    return np.where(hit, s, np.inf)


def _intersect_primitive(primitive, origin, directions):
    if primitive.kind == 'box':
        low, high = primitive.bounds()
        return _intersect_box(low, high, origin, directions)
    return _intersect_sphere(primitive.center, primitive.radius, origin, directions)


def _shade(texture, origin, directions, s, hit):
    safe = np.where(hit, s, 0.0)
    px = origin[0] + safe * directions[0]
    py = origin[1] + safe * directions[1]
    pz = origin[2] + safe * directions[2]
    return np.where(hit[..., None], texture.evaluate(px, py, pz), 0.0)


def _intersect_room(room, origin, directions):
    exits = []
    for axis in range(3):
        d = directions[axis]
        with np.errstate(divide='ignore', invalid='ignore'):
            to_high = (room.max_corner[axis] - origin[axis]) / d
            to_low = (room.min_corner[axis] - origin[axis]) / d
        exits.append(np.where(d > 0, to_high, np.where(d < 0, to_low, np.inf)))
    exits = np.stack(exits)
    axis = np.argmin(exits, axis=0)
    s = np.min(exits, axis=0)
    positive = np.take_along_axis(np.stack(directions), axis[None], axis=0)[0] > 0
    face = axis * 2 + positive.astype(np.int64)
    return s, face


def _cast_band(scene, row_start, row_stop):
    origin = scene.pose.translation
    directions = _world_rays(scene.camera, scene.pose, row_start, row_stop)
    shape = directions[0].shape

    object_depth = np.empty((len(scene.objects),) + shape)
    object_rgb = np.zeros((len(scene.objects),) + shape + (3,))
    for index, primitive in enumerate(scene.objects):
        s = _intersect_primitive(primitive, origin, directions)
        object_depth[index] = s
        object_rgb[index] = _shade(primitive.texture, origin, directions, s, np.isfinite(s))

    layout_depth, layout_face = _intersect_room(scene.room, origin, directions)
    layout_rgb = np.zeros(shape + (3,))
    for face_index, (name, _, _) in enumerate(ROOM_FACES):
        on_face = layout_face == face_index
        if on_face.any():
            layout_rgb += _shade(scene.room.face_textures[name], origin, directions, layout_depth, on_face)
    return object_depth, object_rgb, layout_depth, layout_rgb, layout_face


def _row_bands(height, threads):
    bands = max(1, min(threads, height))
    edges = np.linspace(0, height, bands + 1).astype(int)
    return [(int(edges[i]), int(edges[i + 1])) for i in range(bands)]


def cast_scene(scene, threads=1):
    """Function that ray casts every primitive and the room shell of a scene

    The image is split into row bands processed concurrently. Every pixel is computed
    independently with element-wise operations, so the result does not depend on threads.

    Parameters
    ----------
    scene : SceneSpec
        scene to cast
    threads=1 : int
        number of worker threads

    Returns
    -------
    SceneHits
        per-primitive depths and colors
    """

    if not scene.room.contains(scene.pose.translation):
        raise GeometryError('Camera at {} is outside the room'.format(scene.pose.translation.tolist()))

    bands = _row_bands(scene.camera.height, threads)
    with LOG.stage('ray cast'):
        if len(bands) == 1:
            results = [_cast_band(scene, *bands[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(bands)) as executor:
                results = list(executor.map(lambda band: _cast_band(scene, *band), bands))

    hits = SceneHits(np.concatenate([r[0] for r in results], axis=1),
                     np.concatenate([r[1] for r in results], axis=1),
                     np.concatenate([r[2] for r in results], axis=0),
                     np.concatenate([r[3] for r in results], axis=0),
                     np.concatenate([r[4] for r in results], axis=0))
    LOG.print_kernel('cast_scene: {} objects, {}x{} pixels, {} bands'.format(
        len(scene.objects), scene.camera.width, scene.camera.height, len(bands)))
    return hits


def _instance_from_hits(scene, hits, front, index):
    primitive = scene.objects[index]
    depth = hits.object_depth[index]
    valid = np.isfinite(depth)
    rgba = np.concatenate([hits.object_rgb[index], valid[..., None].astype(np.float64)], axis=-1)
    image = RgbadImage(rgba, np.where(valid, depth, 0.0), valid)
    return InstanceLayer(image, primitive.class_id, one_hot(primitive.class_id, scene.num_classes),
                         front == index, source_index=index)


def _layout_from_hits(scene, hits):
    rgba = np.concatenate([hits.layout_rgb, np.ones(hits.layout_depth.shape + (1,))], axis=-1)
    image = RgbadImage(rgba, hits.layout_depth, np.ones(hits.layout_depth.shape, dtype=bool))
    face_classes = [scene.room.face_classes[name] for name, _, _ in ROOM_FACES]
    return LayoutLayer(image, face_classes, hits.layout_face, face_classes)


def render_instance(scene, object_index, threads=1):
    """Function that renders one object in full visibility

    Parameters
    ----------
    scene : SceneSpec
        scene holding the object
    object_index : int
        index into scene.objects
    threads=1 : int
        number of worker threads

    Returns
    -------
    InstanceLayer
        full object extent, visibility mask where it is front-most in the composite
    """

    if not 0 <= object_index < len(scene.objects):
        raise ConfigError('Object index {} out of range for {} objects'.format(object_index, len(scene.objects)))
    hits = cast_scene(scene, threads)
    return _instance_from_hits(scene, hits, hits.front_index(), object_index)


def render_layout(scene, threads=1):
    """Function that renders the room shell without objects

    Returns
    -------
    LayoutLayer
        hole-free layout layer
    """

    hits = cast_scene(scene.with_objects([]), threads)
    return _layout_from_hits(scene, hits)


def render_full(scene, threads=1):
    """Function that renders the composite view of the whole scene in a single pass

    Returns
    -------
    RgbadImage
        front-most surface at every pixel
    """

    hits = cast_scene(scene, threads)
    front = hits.front_index()
    depth = np.concatenate([hits.object_depth, hits.layout_depth[None]], axis=0)
    rgb = np.concatenate([hits.object_rgb, hits.layout_rgb[None]], axis=0)
    front_depth = np.take_along_axis(depth, front[None], axis=0)[0]
    front_rgb = np.take_along_axis(rgb, front[None, ..., None], axis=0)[0]
    rgba = np.concatenate([front_rgb, np.ones(front_depth.shape + (1,))], axis=-1)
    return RgbadImage(rgba, front_depth, np.ones(front_depth.shape, dtype=bool))


def generate_view(scene, threads=1, keep_hidden=False):
    """Function that builds the layered decomposition of a scene's view

    Objects that are not front-most anywhere are left out of the stack, so a stack never holds
    content the source view gives no evidence of. With keep_hidden, fully occluded objects that
    fall inside the view are kept, which makes object removal reproduce the render of the
    object-deleted scene.

    Parameters
    ----------
    scene : SceneSpec
        scene to decompose
    threads=1 : int
        number of worker threads
    keep_hidden=False : bool
        keep objects with an empty visibility mask but a non-empty extent

    Returns
    -------
    LayerStack
        visible instances in scene order, plus the layout
    """

    hits = cast_scene(scene, threads)
    front = hits.front_index()
    instances = []
    for index in range(len(scene.objects)):
        instance = _instance_from_hits(scene, hits, front, index)
        if instance.visibility_mask.any() or (keep_hidden and instance.image.valid.any()):
            instances.append(instance)
        else:
            LOG.debug('Object {} of scene {} is not visible, dropped from stack'.format(index, scene.seed))
    return LayerStack(instances, _layout_from_hits(scene, hits), scene.camera, scene.pose, scene.class_table)


def overlap_fraction(stack, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that measures how much of the view is covered by more than one layer

    Returns
    -------
    float
        fraction of pixels holding at least two LDI samples
    """

    ldi = ldi_from_stack(stack, alpha_min)
    return float(np.count_nonzero(ldi.counts >= 2)) / ldi.counts.size


def overlap_filter(stack, threshold, alpha_min=DEFAULT_ALPHA_MIN):
    """Function that decides whether a view holds enough occluded content to be kept

    Parameters
    ----------
    stack : LayerStack
        candidate view
    threshold : float
        minimum fraction of multiply covered pixels, in [0, 1]

    Returns
    -------
    bool
        True if the overlap fraction reaches the threshold
    """

    if not 0.0 <= threshold <= 1.0:
        raise ConfigError('Overlap threshold must lie in [0, 1]')
    return overlap_fraction(stack, alpha_min) >= threshold


def sample_perturbation(max_translation, max_rotation, seed):
    """Function that draws a camera perturbation

    Returns
    -------
    tuple of float
        (tx, ty, tz, rx, ry, rz), meters and degrees, each uniform in its +/- bound
    """

    rng = np.random.default_rng(seed)
    translation = rng.uniform(-1.0, 1.0, 3) * max_translation
    rotation = rng.uniform(-1.0, 1.0, 3) * max_rotation
    return tuple(float(v) for v in np.concatenate([translation, rotation]))


def offset_pose(offset):
    """Function that converts a (tx, ty, tz, rx, ry, rz) offset into a Pose

    Returns
    -------
    Pose
        target camera expressed in the source camera frame
    """

    tx, ty, tz, rx, ry, rz = offset
    return Pose.from_euler(rx, ry, rz, tx, ty, tz)


def perturb_pose(pose, config, seed):
    """Function that perturbs a camera pose in its own frame

    Parameters
    ----------
    pose : Pose
        camera-to-world pose
    config : GenerationConfig
        provides max_translation (meters) and max_rotation (degrees)
    seed : int
        perturbation seed

    Returns
    -------
    Pose
        perturbed camera-to-world pose
    """

    offset = sample_perturbation(config.max_translation, config.max_rotation, seed)
    return pose.compose(offset_pose(offset))


def simulate_detections(stack, noise_config, seed):
    """Function that simulates instance segmentation outputs for every stack instance

    Parameters
    ----------
    stack : LayerStack
        ground-truth stack
    noise_config : DetectionNoise
        mask and score noise parameters
    seed : int
        detection seed

    Returns
    -------
    list of tuple
        (confidence_mask, class_scores) per instance
    """

    rng = np.random.default_rng(seed)
    detections = []
    for instance in stack.instances:
        radius = int(rng.integers(noise_config.min_radius, noise_config.max_radius + 1))
        erode = bool(rng.random() < 0.5)
        num_classes = len(instance.class_scores)
        spread = rng.dirichlet(np.ones(num_classes - 1)) if num_classes > 1 else np.zeros(0)

        mask = instance.visibility_mask
        if radius > 0:
            structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
            if erode:
                mask = ndimage.binary_erosion(mask, structure=structure)
            else:
                mask = ndimage.binary_dilation(mask, structure=structure)
        confidence = mask.astype(np.float64)
        if noise_config.blur_radius > 0:
            confidence = ndimage.uniform_filter(confidence, size=2 * noise_config.blur_radius + 1, mode='nearest')
        confidence = np.clip(confidence, 0.0, 1.0)

        s = noise_config.smoothing
        scores = np.zeros(num_classes)
        scores[np.arange(num_classes) != instance.class_id] = s * (num_classes - 1) / num_classes * spread
        scores[instance.class_id] = (1.0 - s) + s / num_classes
        detections.append((confidence, scores))
    return detections


def attach_detections(stack, detections):
    """Function that stores detector outputs on the instances of a stack

    Returns
    -------
    LayerStack
        stack whose instances carry the given confidence masks and class scores
    """

    if len(detections) != len(stack.instances):
        raise ConfigError('Got {} detections for {} instances'.format(len(detections), len(stack.instances)))
    instances = [instance.with_detection(conf, scores) for instance, (conf, scores) in zip(stack.instances, detections)]
    return LayerStack(instances, stack.layout, stack.camera, stack.view_pose, stack.class_table)


def autoencoder_instances(stack):
    """Function that lists instances whose full extent stays clear of the image border

    Returns
    -------
    list of int
        stack instance indices usable for auto-encoder training
    """

    return [index for index, instance in enumerate(stack.instances) if not instance.touches_border]


def _random_texture(rng, kinds, low, high):
    kind = kinds[int(rng.integers(len(kinds)))]
    color_a = rng.uniform(0.15, 0.9, 3)
    color_b = rng.uniform(0.15, 0.9, 3)
    axis = int(rng.integers(3))
    start, end = float(low[axis]), float(high[axis])
    return Texture(kind, color_a, color_b, scale=float(rng.uniform(0.15, 0.4)), axis=axis, start=start, end=end)


def sample_scene(config, seed):
    """Function that samples a random furnished room and a camera inside it

    Parameters
    ----------
    config : GenerationConfig
        generation parameters
    seed : int
        scene seed

    Returns
    -------
    SceneSpec
        valid scene, camera at least 0.6 m from walls and objects
    """

    rng = np.random.default_rng(seed)
    size = np.array([rng.uniform(3.5, 6.0), rng.uniform(2.5, 3.2), rng.uniform(4.0, 7.0)])
    low, high = np.zeros(3), size

    structural = [c for c in config.structural_classes]
    named = {name: c for c, name in config.class_table.items()}
    face_classes = {}
    face_textures = {}
    for name, axis, side in ROOM_FACES:
        key = 'wall' if name.endswith('wall') else name
        face_classes[name] = named.get(key, structural[0])
        face_textures[name] = _random_texture(rng, config.texture_kinds, low, high)
    room = Room(low, high, face_classes, face_textures)

    eye = np.array([rng.uniform(0.35, 0.65) * size[0], rng.uniform(1.2, 1.7), size[2] - rng.uniform(0.6, 1.0)])
    look = Pose.from_euler(rng.uniform(-15.0, -3.0), rng.uniform(-15.0, 15.0), 0.0)
    pose = Pose(_BASE_ROTATION, eye).compose(look)
    camera = Camera.from_fov(config.width, config.height, config.fov)

    object_classes = config.object_classes()
    objects = []
    for _ in range(int(rng.integers(config.min_objects, config.max_objects + 1))):
        for _attempt in range(20):
            class_id = object_classes[int(rng.integers(len(object_classes)))]
            floating = rng.random() < 0.2
            if rng.random() < 0.7:
                extent = np.array([rng.uniform(0.3, 1.2), rng.uniform(0.3, 1.4), rng.uniform(0.3, 1.2)])
                half = extent / 2.0
                kind = 'box'
            else:
                radius = rng.uniform(0.15, 0.5)
                extent = np.array([radius])
                half = np.repeat(radius, 3)
                kind = 'sphere'
            lift = rng.uniform(0.3, 1.0) if floating else 0.0
            center = np.array([np.clip(eye[0] + rng.uniform(-1.2, 1.2), half[0] + 0.01, size[0] - half[0] - 0.01),
                               min(half[1] + lift, size[1] - half[1] - 0.05),
                               rng.uniform(half[2] + 0.01, max(half[2] + 0.02, eye[2] - 1.2))])
            primitive = Primitive(kind, center, extent, class_id,
                                  _random_texture(rng, config.texture_kinds, center - half, center + half))
            box_low, box_high = primitive.bounds()
            gap = np.maximum(np.maximum(box_low - eye, eye - box_high), 0.0)
            if np.all(box_low >= low) and np.all(box_high <= high) and math.sqrt(float(gap @ gap)) > 0.6:
                objects.append(primitive)
                break

    return SceneSpec(room, objects, camera, pose, seed, config.class_table)


def render_target_view(scene, offset, threads=1):
    """Function that renders the composite view from a perturbed camera

    Parameters
    ----------
    scene : SceneSpec
        source scene
    offset : tuple of float
        (tx, ty, tz, rx, ry, rz) target camera in the source camera frame

    Returns
    -------
    RgbadImage
        ground-truth target view
    """

    return render_full(scene.with_pose(scene.pose.compose(offset_pose(offset))), threads)


class GeneratedSample:
    """Class that holds everything generated for one scene

    Attributes
    ----------
    index : int
        position in the generated sequence
    scene : SceneSpec
        sampled scene
    stack : LayerStack
        layered decomposition, detections attached
    overlap : float
        fraction of multiply covered pixels
    accepted : bool
        True if the overlap filter kept the view
    offset : tuple of float
        target view perturbation (tx, ty, tz, rx, ry, rz)
    target_view : RgbadImage
        ground-truth render from the perturbed camera, None if not accepted
    """

    def __init__(self, index, scene, stack, overlap, accepted, offset, target_view):
        self.index = index
        self.scene = scene
        self.stack = stack
        self.overlap = overlap
        self.accepted = accepted
        self.offset = offset
        self.target_view = target_view


class SceneGenerator:
    """Class responsible for driving dataset generation

    Attributes
    ----------
    config : GenerationConfig
        generation parameters
    threads : int
        ray casting worker threads
    alpha_min : float
        presence threshold used for overlap measurement
    """

    def __init__(self, config, threads=1, alpha_min=DEFAULT_ALPHA_MIN):
        """Constructor for SceneGenerator
        """

        self.config = config
        self.threads = threads
        self.alpha_min = alpha_min


    @staticmethod
    def derive_seed(seed, index, stream):
        """Function that derives an independent seed for one scene and purpose

        Parameters
        ----------
        seed : int
            global seed
        index : int
            scene index
        stream : int
            0 scene sampling, 1 detections, 2 pose perturbation

        Returns
        -------
        int
            derived 63-bit seed
        """

        return int(np.random.SeedSequence([seed, index, stream]).generate_state(1, np.uint64)[0] >> np.uint64(1))


    def generate_sample(self, seed, index):
        """Function that generates, filters and annotates one scene

        Returns
        -------
        GeneratedSample
            the scene, its stack and, if accepted, the target view
        """

        scene = sample_scene(self.config, self.derive_seed(seed, index, 0))
        stack = generate_view(scene, self.threads, self.config.keep_hidden)
        overlap = overlap_fraction(stack, self.alpha_min)
        accepted = overlap >= self.config.overlap_threshold
        detections = simulate_detections(stack, self.config.detection_noise, self.derive_seed(seed, index, 1))
        stack = attach_detections(stack, detections)
        offset = sample_perturbation(self.config.max_translation, self.config.max_rotation, self.derive_seed(seed, index, 2))
        target_view = render_target_view(scene, offset, self.threads) if accepted else None
        LOG.debug('Scene {}: {} objects, {} visible, overlap {:.4f}, accepted {}'.format(
            index, len(scene.objects), len(stack.instances), overlap, accepted))
        return GeneratedSample(index, scene, stack, overlap, accepted, offset, target_view)


    def generate(self, count, seed):
        """Function that generates a sequence of scenes

        Returns
        -------
        generator of GeneratedSample
            one sample per index, accepted or not
        """

        for index in range(count):
            yield self.generate_sample(seed, index)
