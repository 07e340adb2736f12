"""
Noise Injection Service for the STMDF-AD denoiser
Reproducible fixed-value (salt-and-pepper) impulse noise and mask persistence
"""

import logging
import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from stmdf_ad.exceptions import CorruptFileError, InvalidParameterError
from stmdf_ad.services.image_service import Image, round_half_away

logger = logging.getLogger(__name__)

SALT_VALUE = 255.0
PEPPER_VALUE = 0.0
_MASK_HEADER = re.compile(rb"\AMASK (\d+) (\d+)\n")


class NoiseSpec(BaseModel):
    """Fixed-value impulse noise model"""
    density: float = Field(..., description="Probability a pixel is corrupted")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="PRNG seed (unsigned 64-bit)")
    salt_value: float = Field(SALT_VALUE, description="Salt gray level")
    pepper_value: float = Field(PEPPER_VALUE, description="Pepper gray level")

    @field_validator("density")
    @classmethod
    def _density_in_range(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"density out of range: {v}")
        return v

    @field_validator("salt_value")
    @classmethod
    def _fixed_salt(cls, v: float) -> float:
        if v != SALT_VALUE:
            raise ValueError("salt value is fixed at 255")
        return v

    @field_validator("pepper_value")
    @classmethod
    def _fixed_pepper(cls, v: float) -> float:
        if v != PEPPER_VALUE:
            raise ValueError("pepper value is fixed at 0")
        return v


@dataclass(eq=False)
class NoiseMask:
    """Row-major corruption flags"""
    width: int
    height: int
    flags: np.ndarray

    def __post_init__(self):
        self.flags = np.asarray(self.flags, dtype=bool).reshape(self.height, self.width)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    @property
    def fraction(self) -> float:
        return self.count / self.flags.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NoiseMask):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and \
            bool(np.array_equal(self.flags, other.flags))


def density_seed(seed: int, density: float) -> int:
    """Per-density seed: seed + round(1000 * density)"""
    return int(seed) + int(round_half_away(1000.0 * density))


def inject_salt_pepper(img: Image, spec: NoiseSpec) -> Tuple[Image, NoiseMask]:
    """
    One uniform draw per pixel in row-major order:
    u < p/2 -> pepper, p/2 <= u < p -> salt, otherwise unchanged.
    """
    rng = np.random.default_rng(spec.seed)
    u = rng.random(img.size).reshape(img.height, img.width)

    half = spec.density / 2.0
    pepper = u < half
    salt = (u >= half) & (u < spec.density)

    noisy = np.array(img.pixels, copy=True)
    noisy[pepper] = spec.pepper_value
    noisy[salt] = spec.salt_value

    mask = NoiseMask(width=img.width, height=img.height, flags=pepper | salt)
    logger.info(
        f"Injected salt-and-pepper noise: density={spec.density} seed={spec.seed} "
        f"corrupted={mask.count}/{img.size}"
    )
    return Image(noisy), mask


def write_mask(mask: NoiseMask) -> bytes:
    header = f"MASK {mask.width} {mask.height}\n".encode("ascii")
    return header + np.packbits(mask.flags.ravel(), bitorder="big").tobytes()


def read_mask(data: bytes) -> NoiseMask:
    match = _MASK_HEADER.match(data)
    if not match:
        raise CorruptFileError("missing or malformed MASK header")
    width, height = int(match.group(1)), int(match.group(2))
    if width < 1 or height < 1:
        raise InvalidParameterError(f"invalid mask dimensions {width}x{height}")

    count = width * height
    needed = (count + 7) // 8
    payload = data[match.end():match.end() + needed]
    if len(payload) < needed:
        raise CorruptFileError(f"truncated mask payload: expected {needed} bytes, got {len(payload)}")

    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="big", count=count)
    return NoiseMask(width=width, height=height, flags=bits.astype(bool))
