"""Core raster and camera representations.

RgbadImage objects are the five-channel unit (RGBA + metric depth) that every layer is made of,
together with a per-pixel validity flag. Camera and Pose describe the pinhole model and rigid
transforms used for ray casting and warping.
"""


import math
import numpy as np

from layeredDepth.errors import DimensionError, InvalidRasterError


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


class RgbadImage:
    """Class that represents an RGBA-D raster with per-pixel validity

    Invalid pixels always hold the zero sentinel in every channel. Arrays are read-only copies,
    so an RgbadImage never changes after construction.

    Attributes
    ----------
    rgba : np.ndarray
        (height, width, 4) float64 color and alpha in [0, 1]
    depth : np.ndarray
        (height, width) float64 z-depth in meters, > 0 wherever valid
    valid : np.ndarray
        (height, width) bool, True where the layer has content
    """

    def __init__(self, rgba, depth, valid):
        """Constructor for RgbadImage

        Pixels flagged invalid are reset to the zero sentinel.
        """

        rgba = np.asarray(rgba, dtype=np.float64)
        depth = np.asarray(depth, dtype=np.float64)
        valid = np.asarray(valid, dtype=bool)

        if depth.ndim != 2 or rgba.shape != depth.shape + (4,) or valid.shape != depth.shape:
            raise DimensionError('RGBA {}, depth {} and valid {} shapes are inconsistent'.format(
                rgba.shape, depth.shape, valid.shape))

        rgba = np.where(valid[..., None], rgba, 0.0)
        depth = np.where(valid, depth, 0.0)

        if not (np.all(np.isfinite(rgba)) and np.all(np.isfinite(depth))):
            raise InvalidRasterError('Raster contains non-finite values')
        if np.any(rgba < 0.0) or np.any(rgba > 1.0):
            raise InvalidRasterError('Color and alpha must lie in [0, 1]')
        if np.any(depth[valid] <= 0.0):
            raise InvalidRasterError('Depth must be positive wherever the raster is valid')

        self.rgba = _frozen(rgba, np.float64)
        self.depth = _frozen(depth, np.float64)
        self.valid = _frozen(valid, bool)


    @classmethod
    def empty(cls, width, height):
        """Function that creates a fully invalid raster

        Parameters
        ----------
        width : int
            width in pixels
        height : int
            height in pixels

        Returns
        -------
        RgbadImage
            raster with valid=False everywhere
        """

        return cls(np.zeros((height, width, 4)), np.zeros((height, width)), np.zeros((height, width), dtype=bool))


    @property
    def width(self):
        return self.depth.shape[1]


    @property
    def height(self):
        return self.depth.shape[0]


    @property
    def shape(self):
        """(height, width) of the raster"""
        return self.depth.shape


    @property
    def rgb(self):
        return self.rgba[..., :3]


    @property
    def alpha(self):
        return self.rgba[..., 3]


    def channels(self):
        """Function that stacks the five RGBA-D channels

        Returns
        -------
        np.ndarray
            (height, width, 5) array, depth last
        """

        return np.concatenate([self.rgba, self.depth[..., None]], axis=-1)


    def present(self, alpha_min):
        """Function that computes where the layer counts as present for pooling

        Parameters
        ----------
        alpha_min : float
            minimum alpha for a valid pixel to count as present

        Returns
        -------
        np.ndarray
            bool raster, valid and alpha >= alpha_min
        """

        return self.valid & (self.alpha >= alpha_min)


    def pad(self, top_bottom, left_right):
        """Function that enlarges the raster with invalid border bands

        Parameters
        ----------
        top_bottom : int
            rows added above and below
        left_right : int
            columns added left and right

        Returns
        -------
        RgbadImage
            padded raster
        """

        bands = ((top_bottom, top_bottom), (left_right, left_right))
        return RgbadImage(np.pad(self.rgba, bands + ((0, 0),)), np.pad(self.depth, bands), np.pad(self.valid, bands))


    def crop(self, top_bottom, left_right):
        """Function that removes border bands, the inverse of pad

        Returns
        -------
        RgbadImage
            cropped raster
        """

        rows = slice(top_bottom, self.height - top_bottom)
        cols = slice(left_right, self.width - left_right)
        return RgbadImage(self.rgba[rows, cols], self.depth[rows, cols], self.valid[rows, cols])


    def equals(self, other):
        """Function that checks bit-exact equality with another raster

        Returns
        -------
        bool
            True if every channel and validity flag matches exactly
        """

        return (self.shape == other.shape
                and np.array_equal(self.valid, other.valid)
                and np.array_equal(self.depth, other.depth)
                and np.array_equal(self.rgba, other.rgba))


class Camera:
    """Class that represents pinhole intrinsics

    Pixel (u, v) has its center at integer coordinates, so a pixel with z-depth d unprojects to
    d * K^-1 [u, v, 1].

    Attributes
    ----------
    fx, fy : float
        focal lengths in pixels
    cx, cy : float
        principal point in pixels
    width, height : int
        image size in pixels
    """

    def __init__(self, fx, fy, cx, cy, width, height):
        """Constructor for Camera
        """

        self.fx = float(fx)
        self.fy = float(fy)
        self.cx = float(cx)
        self.cy = float(cy)
        self.width = int(width)
        self.height = int(height)

        if not (self.fx > 0 and self.fy > 0):
            raise InvalidRasterError('Focal lengths must be positive')
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidRasterError('Principal point ({}, {}) outside a {}x{} image'.format(
                self.cx, self.cy, self.width, self.height))


    @classmethod
    def from_fov(cls, width, height, horizontal_fov_deg):
        """Function that creates a centered camera with square pixels

        Parameters
        ----------
        width, height : int
            image size in pixels
        horizontal_fov_deg : float
            horizontal field of view in degrees

        Returns
        -------
        Camera
            camera with principal point at the image center
        """

        focal = (width / 2.0) / math.tan(math.radians(horizontal_fov_deg) / 2.0)
        return cls(focal, focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height)


    def intrinsic_matrix(self):
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


    def pixel_directions(self, row_start=0, row_stop=None):
        """Function that computes camera-frame ray directions with unit z component

        Parameters
        ----------
        row_start=0 : int
            first image row
        row_stop=None : int
            one past the last image row, defaults to the image height

        Returns
        -------
        tuple of np.ndarray
            x, y, z direction components, each (rows, width)
        """

        if row_stop is None:
            row_stop = self.height
        v, u = np.mgrid[row_start:row_stop, 0:self.width].astype(np.float64)
        x = (u - self.cx) / self.fx
        y = (v - self.cy) / self.fy
        return x, y, np.ones_like(x)


    def unproject(self, u, v, depth):
        """Function that lifts pixels with z-depth into camera-frame points

        Returns
        -------
        tuple of np.ndarray
            X, Y, Z camera-frame coordinates
        """

        return (u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, np.asarray(depth, dtype=np.float64)


    def project(self, x, y, z):
        """Function that projects camera-frame points onto the image plane

        Returns
        -------
        tuple of np.ndarray
            u, v continuous pixel coordinates
        """

        return self.fx * x / z + self.cx, self.fy * y / z + self.cy


    def shifted(self, top_bottom, left_right):
        """Function that returns the camera of an image padded by the given bands

        Returns
        -------
        Camera
            camera with shifted principal point and enlarged size
        """

        return Camera(self.fx, self.fy, self.cx + left_right, self.cy + top_bottom,
                      self.width + 2 * left_right, self.height + 2 * top_bottom)


    def equals(self, other):
        return self.to_dict() == other.to_dict()


    def to_dict(self):
        return {'fx': self.fx, 'fy': self.fy, 'cx': self.cx, 'cy': self.cy,
                'width': self.width, 'height': self.height}


    @classmethod
    def from_dict(cls, data):
        return cls(data['fx'], data['fy'], data['cx'], data['cy'], data['width'], data['height'])


def _axis_rotation(axis, degrees):
    angle = math.radians(degrees)
    c, s = math.cos(angle), math.sin(angle)
    if axis == 'x':
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == 'y':
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class Pose:
    """Class that represents a rigid transform X' = R X + t

    A camera pose maps camera coordinates (x right, y down, z forward) to world coordinates.

    Attributes
    ----------
    rotation : np.ndarray
        (3, 3) orthonormal matrix with determinant 1
    translation : np.ndarray
        (3,) translation in meters
    """

    TOLERANCE = 1e-9

    def __init__(self, rotation, translation):
        """Constructor for Pose
        """

        rotation = np.asarray(rotation, dtype=np.float64)
        translation = np.asarray(translation, dtype=np.float64)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise DimensionError('Pose needs a 3x3 rotation and a 3-vector translation')
        if not np.allclose(rotation.T @ rotation, np.eye(3), rtol=0.0, atol=Pose.TOLERANCE):
            raise InvalidRasterError('Rotation is not orthonormal')
        if abs(np.linalg.det(rotation) - 1.0) > Pose.TOLERANCE:
            raise InvalidRasterError('Rotation determinant must be 1')
        self.rotation = _frozen(rotation, np.float64)
        self.translation = _frozen(translation, np.float64)


    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))


    @classmethod
    def from_euler(cls, rx, ry, rz, tx=0.0, ty=0.0, tz=0.0):
        """Function that builds a pose from angles in degrees and a translation in meters

        Angles are applied yaw (about y) then pitch (about x) then roll (about z), ie
        R = Ry(ry) Rx(rx) Rz(rz).

        Returns
        -------
        Pose
            the composed pose
        """

        rotation = _axis_rotation('y', ry) @ _axis_rotation('x', rx) @ _axis_rotation('z', rz)
        return cls(rotation, np.array([tx, ty, tz], dtype=np.float64))


    def compose(self, other):
        """Function that composes two transforms, self applied after other

        Returns
        -------
        Pose
            transform X -> self(other(X))
        """

        return Pose(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)


    def inverse(self):
        return Pose(self.rotation.T, -(self.rotation.T @ self.translation))


    def apply(self, x, y, z):
        """Function that transforms point coordinate arrays element-wise

        Returns
        -------
        tuple of np.ndarray
            transformed x, y, z
        """

        r = self.rotation
        t = self.translation
        return (r[0, 0] * x + r[0, 1] * y + r[0, 2] * z + t[0],
                r[1, 0] * x + r[1, 1] * y + r[1, 2] * z + t[1],
                r[2, 0] * x + r[2, 1] * y + r[2, 2] * z + t[2])


    def is_identity(self):
        return np.array_equal(self.rotation, np.eye(3)) and not np.any(self.translation)


    def equals(self, other):
        return np.array_equal(self.rotation, other.rotation) and np.array_equal(self.translation, other.translation)


    def to_dict(self):
        return {'rotation': self.rotation.tolist(), 'translation': self.translation.tolist()}


    @classmethod
    def from_dict(cls, data):
        return cls(data['rotation'], data['translation'])


def relative_pose(source, target):
    """Function that computes the transform from source camera to target camera coordinates

    Parameters
    ----------
    source : Pose
        camera-to-world pose of the source view
    target : Pose
        camera-to-world pose of the target view

    Returns
    -------
    Pose
        transform X_target = R X_source + t
    """

    return target.inverse().compose(source)
