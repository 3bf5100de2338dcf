"""Parametric scene description used for ground-truth generation.

A SceneSpec is an axis-aligned room (floor, ceiling and four walls) holding axis-aligned boxes and
spheres. World coordinates have y pointing up, the floor lies at the room's minimum y.
Textures are evaluated at 3D surface points, so a surface point has the same color from any view.
"""


import numpy as np

from layeredDepth.errors import GeometryError, ConfigError
from layeredDepth.data_model.raster import Camera, Pose


TEXTURE_KINDS = ('solid', 'checker', 'gradient')
PRIMITIVE_KINDS = ('box', 'sphere')

# Room faces, in the order used for ray casting. (axis, side) with side 0 = minimum plane
ROOM_FACES = (('left_wall', 0, 0), ('right_wall', 0, 1), ('floor', 1, 0), ('ceiling', 1, 1),
              ('back_wall', 2, 0), ('front_wall', 2, 1))


class Texture:
    """Class that represents a procedural albedo

    Attributes
    ----------
    kind : str
        one of solid, checker, gradient
    color_a, color_b : np.ndarray
        RGB colors in [0, 1]; color_b unused for solid
    scale : float
        checker cell size in meters
    axis : int
        world axis of a gradient
    start, end : float
        world coordinates where a gradient reaches color_a and color_b
    """

    def __init__(self, kind, color_a, color_b=None, scale=0.5, axis=1, start=0.0, end=1.0):
        """Constructor for Texture
        """

        if kind not in TEXTURE_KINDS:
            raise ConfigError('Unknown texture kind {}'.format(kind))
        self.kind = kind
        self.color_a = np.clip(np.array(color_a, dtype=np.float64), 0.0, 1.0)
        self.color_b = self.color_a.copy() if color_b is None else np.clip(np.array(color_b, dtype=np.float64), 0.0, 1.0)
        self.scale = float(scale)
        self.axis = int(axis)
        self.start = float(start)
        self.end = float(end)
        if self.kind == 'checker' and self.scale <= 0:
            raise ConfigError('Checker scale must be positive')
        if self.kind == 'gradient' and self.end == self.start:
            raise ConfigError('Gradient needs distinct start and end')


    @classmethod
    def solid(cls, color):
        return cls('solid', color)


    def evaluate(self, px, py, pz):
        """Function that computes the color at surface points

        Parameters
        ----------
        px, py, pz : np.ndarray
            world coordinates of the points

        Returns
        -------
        np.ndarray
            (..., 3) RGB colors
        """

        shape = np.shape(px)
        if self.kind == 'solid':
            return np.broadcast_to(self.color_a, shape + (3,)).copy()
        if self.kind == 'checker':
            cells = np.floor(px / self.scale) + np.floor(py / self.scale) + np.floor(pz / self.scale)
            odd = np.mod(cells, 2.0) == 1.0
            return np.where(odd[..., None], self.color_b, self.color_a)
        coordinate = (px, py, pz)[self.axis]
        weight = np.clip((coordinate - self.start) / (self.end - self.start), 0.0, 1.0)[..., None]
        return self.color_a + (self.color_b - self.color_a) * weight


    def to_dict(self):
        return {'kind': self.kind, 'color_a': self.color_a.tolist(), 'color_b': self.color_b.tolist(),
                'scale': self.scale, 'axis': self.axis, 'start': self.start, 'end': self.end}


    @classmethod
    def from_dict(cls, data):
        return cls(data['kind'], data['color_a'], data.get('color_b'), data.get('scale', 0.5),
                   data.get('axis', 1), data.get('start', 0.0), data.get('end', 1.0))


class Primitive:
    """Class that represents a scene object

    Attributes
    ----------
    kind : str
        box or sphere
    center : np.ndarray
        world position in meters
    size : np.ndarray
        full box extents, or the sphere radius repeated three times
    class_id : int
        object category
    texture : Texture
        surface albedo
    """

    def __init__(self, kind, center, size, class_id, texture):
        """Constructor for Primitive
        """

        if kind not in PRIMITIVE_KINDS:
            raise ConfigError('Unknown primitive kind {}'.format(kind))
        self.kind = kind
        self.center = np.array(center, dtype=np.float64)
        size = np.array(size, dtype=np.float64).reshape(-1)
        self.size = np.repeat(size, 3) if size.size == 1 else size
        self.class_id = int(class_id)
        self.texture = texture
        if self.center.shape != (3,) or self.size.shape != (3,):
            raise GeometryError('Primitive center and size must be 3-vectors')
        if np.any(self.size <= 0):
            raise GeometryError('Primitive sizes must be positive')
        if self.kind == 'sphere' and not np.all(self.size == self.size[0]):
            raise GeometryError('Sphere size must be a single radius')


    @property
    def radius(self):
        return float(self.size[0])


    def bounds(self):
        """Function that computes the axis-aligned bounding box

        Returns
        -------
        tuple of np.ndarray
            minimum and maximum corners
        """

        half = self.size / 2.0 if self.kind == 'box' else self.size
        return self.center - half, self.center + half


    def to_dict(self):
        size = [self.radius] if self.kind == 'sphere' else self.size.tolist()
        return {'kind': self.kind, 'center': self.center.tolist(), 'size': size,
                'class_id': self.class_id, 'texture': self.texture.to_dict()}


    @classmethod
    def from_dict(cls, data):
        return cls(data['kind'], data['center'], data['size'], data['class_id'], Texture.from_dict(data['texture']))


class Room:
    """Class that represents the axis-aligned room enclosing the scene

    Attributes
    ----------
    min_corner, max_corner : np.ndarray
        opposite room corners in meters
    face_classes : dict of str -> int
        structural class of each face, keyed by names in ROOM_FACES
    face_textures : dict of str -> Texture
        albedo of each face
    """

    def __init__(self, min_corner, max_corner, face_classes, face_textures):
        """Constructor for Room
        """

        self.min_corner = np.array(min_corner, dtype=np.float64)
        self.max_corner = np.array(max_corner, dtype=np.float64)
        if np.any(self.max_corner <= self.min_corner):
            raise GeometryError('Room must have positive extent along every axis')
        names = [face[0] for face in ROOM_FACES]
        if sorted(face_classes) != sorted(names) or sorted(face_textures) != sorted(names):
            raise GeometryError('Room needs a class and a texture for each of {}'.format(', '.join(names)))
        self.face_classes = {name: int(face_classes[name]) for name in names}
        self.face_textures = {name: face_textures[name] for name in names}


    def contains(self, point, margin=0.0):
        point = np.asarray(point, dtype=np.float64)
        return bool(np.all(point > self.min_corner + margin) and np.all(point < self.max_corner - margin))


    def to_dict(self):
        return {'min_corner': self.min_corner.tolist(), 'max_corner': self.max_corner.tolist(),
                'face_classes': dict(self.face_classes),
                'face_textures': {name: texture.to_dict() for name, texture in self.face_textures.items()}}


    @classmethod
    def from_dict(cls, data):
        return cls(data['min_corner'], data['max_corner'], data['face_classes'],
                   {name: Texture.from_dict(tex) for name, tex in data['face_textures'].items()})


class SceneSpec:
    """Class that represents one procedural scene and the view it is rendered from

    Attributes
    ----------
    room : Room
        enclosing room
    objects : tuple of Primitive
        scene objects in stable order
    camera : Camera
        intrinsics
    pose : Pose
        camera-to-world pose
    seed : int
        seed the scene was sampled with
    class_table : dict of int -> str
        category names, including the structural classes
    """

    def __init__(self, room, objects, camera, pose, seed, class_table):
        """Constructor for SceneSpec
        """

        self.room = room
        self.objects = tuple(objects)
        self.camera = camera
        self.pose = pose
        self.seed = int(seed)
        self.class_table = {int(k): str(v) for k, v in class_table.items()}
        if sorted(self.class_table) != list(range(len(self.class_table))):
            raise ConfigError('Class ids must be contiguous from 0')

        for index, primitive in enumerate(self.objects):
            low, high = primitive.bounds()
            if np.any(low < room.min_corner) or np.any(high > room.max_corner):
                raise GeometryError('Object {} extends outside the room'.format(index))
            if primitive.class_id not in self.class_table:
                raise ConfigError('Object {} has class {} missing from the class table'.format(index, primitive.class_id))


    @property
    def num_classes(self):
        return len(self.class_table)


    def with_objects(self, objects):
        """Function that copies the scene with a different object list

        Returns
        -------
        SceneSpec
            scene sharing room, camera, pose and class table
        """

        return SceneSpec(self.room, objects, self.camera, self.pose, self.seed, self.class_table)


    def with_pose(self, pose):
        return SceneSpec(self.room, self.objects, self.camera, pose, self.seed, self.class_table)


    def to_dict(self):
        return {'seed': self.seed,
                'camera': self.camera.to_dict(),
                'pose': self.pose.to_dict(),
                'class_table': {str(k): v for k, v in sorted(self.class_table.items())},
                'room': self.room.to_dict(),
                'objects': [primitive.to_dict() for primitive in self.objects]}


    @classmethod
    def from_dict(cls, data):
        return cls(Room.from_dict(data['room']), [Primitive.from_dict(p) for p in data['objects']],
                   Camera.from_dict(data['camera']), Pose.from_dict(data['pose']), data['seed'],
                   {int(k): v for k, v in data['class_table'].items()})
