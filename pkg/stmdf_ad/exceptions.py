"""
Error hierarchy for the denoising library.
Library code raises these; the CLI maps them to exit codes.
"""


class DenoiseError(Exception):
    """Base class for every error raised by the library"""

    exit_code = 1


class InvalidParameterError(DenoiseError, ValueError):
    """A parameter is outside its legal range"""

    exit_code = 2


class InvalidTableError(DenoiseError, ValueError):
    """A CSV table has ragged rows"""

    exit_code = 2


class InvalidPairError(DenoiseError, ValueError):
    """Reference and test images do not have matching dimensions"""

    exit_code = 2


class InvalidSizeError(DenoiseError, ValueError):
    """Image is too small for the requested operation"""

    exit_code = 2


class UnsupportedFormatError(DenoiseError):
    """File magic is not a supported format"""

    exit_code = 3


class UnsupportedDepthError(DenoiseError):
    """PGM maxval other than 255"""

    exit_code = 3


class CorruptFileError(DenoiseError):
    """Header or payload cannot be parsed"""

    exit_code = 3


class DegenerateImageError(DenoiseError):
    """Statistic undefined for this image (e.g. zero variance)"""

    exit_code = 4
