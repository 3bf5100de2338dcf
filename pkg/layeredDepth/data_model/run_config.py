"""Configuration objects for generation, warping, evaluation and complete CLI runs.

Every configuration converts to and from plain dictionaries with a fixed key order, which is the
format recorded next to each run's outputs and accepted back through --config.
"""


from layeredDepth.errors import ConfigError


DEFAULT_CLASS_TABLE = {0: 'floor', 1: 'ceiling', 2: 'wall', 3: 'chair', 4: 'table', 5: 'bed',
                       6: 'sofa', 7: 'cabinet', 8: 'lamp', 9: 'box'}
DEFAULT_STRUCTURAL_CLASSES = (0, 1, 2)


def _require(condition, message):
    if not condition:
        raise ConfigError(message)


class DetectionNoise:
    """Class that represents the simulated detector's noise parameters

    Attributes
    ----------
    min_radius, max_radius : int
        range of the morphological erosion/dilation radius in pixels
    blur_radius : int
        radius of the box blur applied to the perturbed mask
    smoothing : float
        fraction of class-score mass moved away from the true class
    """

    def __init__(self, min_radius=0, max_radius=2, blur_radius=1, smoothing=0.1):
        """Constructor for DetectionNoise
        """

        self.min_radius = int(min_radius)
        self.max_radius = int(max_radius)
        self.blur_radius = int(blur_radius)
        self.smoothing = float(smoothing)
        _require(0 <= self.min_radius <= self.max_radius, 'Detection radius range must satisfy 0 <= min <= max')
        _require(self.blur_radius >= 0, 'Blur radius must be non-negative')
        _require(0.0 <= self.smoothing <= 1.0, 'Class-score smoothing must lie in [0, 1]')


    def to_dict(self):
        return {'min_radius': self.min_radius, 'max_radius': self.max_radius,
                'blur_radius': self.blur_radius, 'smoothing': self.smoothing}


    @classmethod
    def from_dict(cls, data):
        return cls(**data)


class GenerationConfig:
    """Class that represents all parameters of procedural scene generation

    Attributes
    ----------
    width, height : int
        image size in pixels
    fov : float
        horizontal field of view in degrees
    min_objects, max_objects : int
        object count range per scene
    class_table : dict of int -> str
        category names, ids contiguous from 0
    structural_classes : tuple of int
        class ids merged into the layout
    overlap_threshold : float
        minimum fraction of multiply covered pixels for a view to be kept
    max_translation : float
        pose perturbation, meters per axis
    max_rotation : float
        pose perturbation, degrees per angle
    detection_noise : DetectionNoise
        simulated detector parameters
    texture_kinds : tuple of str
        texture kinds objects and walls are drawn from
    keep_hidden : bool
        keep fully occluded objects inside the view in generated stacks
    """

    def __init__(self, width=256, height=256, fov=60.0, min_objects=2, max_objects=5,
                 class_table=None, structural_classes=DEFAULT_STRUCTURAL_CLASSES, overlap_threshold=0.02,
                 max_translation=0.3, max_rotation=10.0, detection_noise=None,
                 texture_kinds=('solid', 'checker', 'gradient'), keep_hidden=False):
        """Constructor for GenerationConfig
        """

        self.width = int(width)
        self.height = int(height)
        self.fov = float(fov)
        self.min_objects = int(min_objects)
        self.max_objects = int(max_objects)
        table = DEFAULT_CLASS_TABLE if class_table is None else class_table
        self.class_table = {int(k): str(v) for k, v in table.items()}
        self.structural_classes = tuple(int(c) for c in structural_classes)
        self.overlap_threshold = float(overlap_threshold)
        self.max_translation = float(max_translation)
        self.max_rotation = float(max_rotation)
        self.detection_noise = DetectionNoise() if detection_noise is None else detection_noise
        self.texture_kinds = tuple(texture_kinds)
        self.keep_hidden = bool(keep_hidden)

        _require(self.width > 0 and self.height > 0, 'Image size must be positive')
        _require(0.0 < self.fov < 180.0, 'Field of view must lie in (0, 180) degrees')
        _require(0 <= self.min_objects <= self.max_objects, 'Object count range must satisfy 0 <= min <= max')
        _require(sorted(self.class_table) == list(range(len(self.class_table))), 'Class ids must be contiguous from 0')
        _require(all(c in self.class_table for c in self.structural_classes), 'Structural classes must be in the class table')
        _require(len(self.object_classes()) > 0, 'Class table needs at least one non-structural class')
        _require(0.0 <= self.overlap_threshold <= 1.0, 'Overlap threshold must lie in [0, 1]')
        _require(self.max_translation >= 0.0 and self.max_rotation >= 0.0, 'Pose perturbation magnitudes must be non-negative')
        _require(len(self.texture_kinds) > 0, 'At least one texture kind is required')


    def object_classes(self):
        """Function that lists the class ids objects can be drawn from

        Returns
        -------
        list of int
            non-structural class ids in ascending order
        """

        return [c for c in sorted(self.class_table) if c not in self.structural_classes]


    def to_dict(self):
        return {'width': self.width, 'height': self.height, 'fov': self.fov,
                'min_objects': self.min_objects, 'max_objects': self.max_objects,
                'class_table': {str(k): v for k, v in sorted(self.class_table.items())},
                'structural_classes': list(self.structural_classes),
                'overlap_threshold': self.overlap_threshold,
                'max_translation': self.max_translation, 'max_rotation': self.max_rotation,
                'detection_noise': self.detection_noise.to_dict(),
                'texture_kinds': list(self.texture_kinds), 'keep_hidden': self.keep_hidden}


    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if 'detection_noise' in data:
            data['detection_noise'] = DetectionNoise.from_dict(data['detection_noise'])
        if 'class_table' in data:
            data['class_table'] = {int(k): v for k, v in data['class_table'].items()}
        return cls(**data)


class WarpConfig:
    """Class that represents view synthesis parameters

    Attributes
    ----------
    z_test_epsilon : float
        meters a splat must be nearer by to replace an existing one
    fill_depth_tolerance : float
        maximum depth spread of neighbors used for crack filling
    max_fill_passes : int
        number of crack filling iterations
    depth_gate : float
        meters a hole-filling splat may lie behind its farthest valid neighbor, 0 disables the gate
    """

    def __init__(self, z_test_epsilon=1e-4, fill_depth_tolerance=0.05, max_fill_passes=2, depth_gate=0.05):
        """Constructor for WarpConfig
        """

        self.z_test_epsilon = float(z_test_epsilon)
        self.fill_depth_tolerance = float(fill_depth_tolerance)
        self.max_fill_passes = int(max_fill_passes)
        self.depth_gate = float(depth_gate)
        _require(self.z_test_epsilon >= 0 and self.fill_depth_tolerance >= 0 and self.max_fill_passes >= 0
                 and self.depth_gate >= 0,
                 'Warp parameters must be non-negative')


    def to_dict(self):
        return {'z_test_epsilon': self.z_test_epsilon, 'fill_depth_tolerance': self.fill_depth_tolerance,
                'max_fill_passes': self.max_fill_passes, 'depth_gate': self.depth_gate}


    @classmethod
    def from_dict(cls, data):
        return cls(**data)


class SsimConfig:
    """Class that represents SSIM parameters

    Attributes
    ----------
    window : int
        side of the uniform square window
    k1, k2 : float
        stabilizing constants, C = (k * dynamic_range)^2
    dynamic_range : float
        value range of the compared images
    """

    def __init__(self, window=8, k1=0.01, k2=0.03, dynamic_range=255.0):
        """Constructor for SsimConfig
        """

        self.window = int(window)
        self.k1 = float(k1)
        self.k2 = float(k2)
        self.dynamic_range = float(dynamic_range)
        _require(self.window >= 1, 'SSIM window must be at least one pixel')


    @property
    def c1(self):
        return (self.k1 * self.dynamic_range) ** 2


    @property
    def c2(self):
        return (self.k2 * self.dynamic_range) ** 2


    def to_dict(self):
        return {'window': self.window, 'k1': self.k1, 'k2': self.k2, 'dynamic_range': self.dynamic_range}


    @classmethod
    def from_dict(cls, data):
        return cls(**data)


class RunConfig:
    """Class that represents the full effective configuration of one CLI run

    Attributes
    ----------
    command : str
        subcommand name
    seed : int
        global seed
    count : int
        number of scenes to generate
    generation : GenerationConfig
        scene generation parameters
    warp : WarpConfig
        view synthesis parameters
    ssim : SsimConfig
        SSIM parameters
    alpha_min : float
        pooling presence threshold
    threads : int
        ray casting worker threads
    frames : int
        number of frames rendered along the synthesis path
    out, scene, pose, class_name, pred, gt, report : str
        command specific inputs and outputs
    """

    def __init__(self, command=None, seed=0, count=4, generation=None, warp=None, ssim=None,
                 alpha_min=0.5, threads=1, frames=1, out=None, scene=None, pose=None, class_name=None,
                 pred=None, gt=None, report=None):
        """Constructor for RunConfig
        """

        self.command = command
        self.seed = int(seed)
        self.count = int(count)
        self.generation = GenerationConfig() if generation is None else generation
        self.warp = WarpConfig() if warp is None else warp
        self.ssim = SsimConfig() if ssim is None else ssim
        self.alpha_min = float(alpha_min)
        self.threads = int(threads)
        self.frames = int(frames)
        self.out = out
        self.scene = scene
        self.pose = pose
        self.class_name = class_name
        self.pred = pred
        self.gt = gt
        self.report = report

        _require(self.seed >= 0, 'Seed must be non-negative')
        _require(self.count >= 0, 'Scene count must be non-negative')
        _require(0.0 <= self.alpha_min <= 1.0, 'alpha_min must lie in [0, 1]')
        _require(self.threads >= 1, 'Thread count must be at least 1')
        _require(self.frames >= 1, 'Frame count must be at least 1')


    def to_dict(self):
        return {'command': self.command, 'seed': self.seed, 'count': self.count,
                'alpha_min': self.alpha_min, 'threads': self.threads, 'frames': self.frames,
                'out': self.out, 'scene': self.scene, 'pose': self.pose, 'class_name': self.class_name,
                'pred': self.pred, 'gt': self.gt, 'report': self.report,
                'generation': self.generation.to_dict(), 'warp': self.warp.to_dict(),
                'ssim': self.ssim.to_dict()}


    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = set(cls().to_dict())
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError('Unknown configuration keys: {}'.format(', '.join(unknown)))
        if 'generation' in data:
            data['generation'] = GenerationConfig.from_dict(data['generation'])
        if 'warp' in data:
            data['warp'] = WarpConfig.from_dict(data['warp'])
        if 'ssim' in data:
            data['ssim'] = SsimConfig.from_dict(data['ssim'])
        return cls(**data)
