"""Error classes raised by layeredDepth.

Every error class carries a distinct exit code that layeredCLI uses when a command fails.
"""


class LayeredDepthError(Exception):
    """Base class for all layeredDepth errors

    Attributes
    ----------
    exit_code : int
        process exit code used by the CLI when this error aborts a command
    """

    exit_code = 1


class ConfigError(LayeredDepthError):
    """Invalid configuration value, unknown class id, or unusable output location"""

    exit_code = 2


class DimensionError(LayeredDepthError, ValueError):
    """Rasters that must share a size do not"""

    exit_code = 3


class EmptyMaskError(LayeredDepthError, ValueError):
    """A reduction was requested over an empty pixel set"""

    exit_code = 4


class GeometryError(LayeredDepthError):
    """Scene geometry violates a precondition, ex. camera outside the room"""

    exit_code = 5


class PoseFormatError(LayeredDepthError):
    """A pose string could not be parsed"""

    exit_code = 6


class DatasetError(LayeredDepthError):
    """Base class for on-disk dataset errors"""

    exit_code = 7


class MissingFileError(DatasetError):
    """A file referenced by a dataset directory does not exist"""

    exit_code = 8


class VersionError(DatasetError):
    """A manifest carries an unrecognized format version"""

    exit_code = 9


class InconsistentDatasetError(DatasetError):
    """Dataset contents disagree with each other, ex. raster sizes or class ids"""

    exit_code = 10


class DepthRangeError(DatasetError):
    """Depth too large to be stored as 16-bit millimeters"""

    exit_code = 11


class InvalidRasterError(LayeredDepthError, ValueError):
    """Raster channel values violate the RGBA-D invariants"""

    exit_code = 15


class LdiFormatError(LayeredDepthError):
    """Base class for LDI container errors"""

    exit_code = 12


class BadMagicError(LdiFormatError):
    """LDI container does not start with the expected magic bytes"""

    exit_code = 13


class TruncatedFileError(LdiFormatError):
    """LDI container is shorter than its header announces"""

    exit_code = 14


def describe_exit_codes():
    """Function that builds a printable table of exit codes

    Returns
    -------
    str
        one line per error class, ordered by exit code
    """

    classes = [LayeredDepthError, ConfigError, DimensionError, EmptyMaskError, GeometryError,
               PoseFormatError, DatasetError, MissingFileError, VersionError,
               InconsistentDatasetError, DepthRangeError, LdiFormatError, BadMagicError,
               TruncatedFileError, InvalidRasterError]
    lines = ['exit codes:', '  {:>3}  {}'.format(0, 'success')]
    for error_class in sorted(classes, key=lambda c: c.exit_code):
        lines.append('  {:>3}  {}'.format(error_class.exit_code, error_class.__name__))
    return '\n'.join(lines)
