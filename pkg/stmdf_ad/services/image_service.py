"""
Image Core Service for the STMDF-AD denoiser
Grayscale image container, replicate-padded neighbourhoods and range discipline
"""

import logging
from dataclasses import dataclass
from typing import Any, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from stmdf_ad.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)

MIN_GRAY = 0.0
MAX_GRAY = 255.0


def round_half_away(values: Any) -> np.ndarray:
    """Round half away from zero (127.5 -> 128, -0.5 -> -1)"""
    arr = np.asarray(values, dtype=np.float64)
    return np.sign(arr) * np.floor(np.abs(arr) + 0.5)


@dataclass(frozen=True, eq=False)
class Image:
    """Row-major grayscale image with real-valued pixels in [0, 255]"""
    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidParameterError(f"image must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("image contains non-finite pixels")
        if arr.min() < MIN_GRAY or arr.max() > MAX_GRAY:
            raise InvalidParameterError(
                f"pixel values must lie in [0, 255], got [{arr.min()}, {arr.max()}]"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_array(cls, values: Any) -> "Image":
        return cls(np.asarray(values, dtype=np.float64))

    @classmethod
    def from_sequence(cls, width: int, height: int, pixels: Any) -> "Image":
        """Build from a flat row-major sequence"""
        flat = np.asarray(pixels, dtype=np.float64).ravel()
        if width < 1 or height < 1 or flat.size != width * height:
            raise InvalidParameterError(
                f"expected {width}x{height}={width * height} pixels, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> "Image":
        return cls(np.full((height, width), float(value)))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape

    @property
    def size(self) -> int:
        return int(self.pixels.size)

    def at(self, x: int, y: int) -> float:
        return float(self.pixels[y, x])

    def with_pixels(self, values: np.ndarray) -> "Image":
        """Fresh image of the same kind from a new buffer"""
        return Image(values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self) -> str:
        return f"Image(width={self.width}, height={self.height})"


@dataclass(frozen=True, eq=False)
class Window:
    """k x k neighbourhood samples in row-major order around a centre pixel"""
    samples: np.ndarray
    center_value: float

    @property
    def size(self) -> int:
        return int(round(np.sqrt(self.samples.size)))


def _check_window_size(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise InvalidParameterError(f"window size must be an odd integer >= 1, got {k}")
    return int(k)


def padded(img: Image, radius: int) -> np.ndarray:
    """Replicate (clamp-to-edge) padding"""
    return np.pad(img.pixels, radius, mode="edge")


def window_at(img: Image, x: int, y: int, k: int = 3) -> Window:
    """Gather the k x k neighbourhood of (x, y) with replicate padding"""
    k = _check_window_size(k)
    if not (0 <= x < img.width and 0 <= y < img.height):
        raise InvalidParameterError(f"pixel ({x}, {y}) outside {img.width}x{img.height} image")

    r = k // 2
    rows = np.clip(np.arange(y - r, y + r + 1), 0, img.height - 1)
    cols = np.clip(np.arange(x - r, x + r + 1), 0, img.width - 1)
    samples = img.pixels[np.ix_(rows, cols)].ravel().copy()
    return Window(samples=samples, center_value=img.at(x, y))


def window_stack(img: Image, k: int = 3) -> np.ndarray:
    """
    Every k x k window at once as a (height, width, k*k) array.
    Entry [y, x] equals window_at(img, x, y, k).samples.
    """
    k = _check_window_size(k)
    view = sliding_window_view(padded(img, k // 2), (k, k))
    return view.reshape(img.height, img.width, k * k)


def clamp_image(img: Union[Image, np.ndarray]) -> Image:
    """Map every value to min(255, max(0, v)); accepts an Image or a raw working buffer"""
    if isinstance(img, Image):
        return img.with_pixels(np.clip(img.pixels, MIN_GRAY, MAX_GRAY))
    return Image(np.clip(np.asarray(img, dtype=np.float64), MIN_GRAY, MAX_GRAY))


def mean_abs_change(before: Image, after: Image) -> float:
    return float(np.mean(np.abs(after.pixels - before.pixels)))
