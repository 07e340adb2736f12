"""
PGM I/O Service for the STMDF-AD denoiser
Bit-exact binary/ASCII PGM reading, P5 writing and CSV emission
"""

import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Tuple, Union

import numpy as np

from stmdf_ad.exceptions import (
    CorruptFileError,
    InvalidTableError,
    UnsupportedDepthError,
    UnsupportedFormatError,
)
from stmdf_ad.services.image_service import Image, round_half_away

logger = logging.getLogger(__name__)

SUPPORTED_MAXVAL = 255
_WHITESPACE = b" \t\r\n\v\f"


@dataclass
class CsvTable:
    """Header plus equal-length rows"""
    header: List[str]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)

    def validate(self) -> None:
        width = len(self.header)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise InvalidTableError(
                    f"row {index} has {len(row)} values, header has {width} columns"
                )

    def to_bytes(self) -> bytes:
        return write_csv(self)


def format_number(value: Any) -> str:
    """Locale-free rendering with at least 6 significant digits; +inf as 'inf'"""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return format(v, ".10g")
    return str(value)


class _HeaderReader:
    """Tokenizer over a PNM header with '#' comments"""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def token(self) -> bytes:
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos:self.pos + 1]
            if ch in _WHITESPACE:
                self.pos += 1
            elif ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            else:
                break
        start = self.pos
        while self.pos < len(data) and data[self.pos:self.pos + 1] not in _WHITESPACE \
                and data[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise CorruptFileError("unexpected end of PGM header")
        return data[start:self.pos]

    def integer(self, name: str) -> int:
        tok = self.token()
        if not tok.isdigit():
            raise CorruptFileError(f"non-numeric PGM header token for {name}: {tok!r}")
        return int(tok)


def read_pgm(data: bytes) -> Image:
    """Parse a P5 (binary) or P2 (ASCII) PGM with maxval 255"""
    if len(data) < 2 or data[:2] not in (b"P5", b"P2"):
        raise UnsupportedFormatError(f"unsupported image format, magic {data[:2]!r}")
    magic = data[:2]

    reader = _HeaderReader(data)
    reader.pos = 2
    width = reader.integer("width")
    height = reader.integer("height")
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise CorruptFileError(f"invalid PGM dimensions {width}x{height}")
    if maxval != SUPPORTED_MAXVAL:
        raise UnsupportedDepthError(f"unsupported PGM maxval {maxval}, only 255 is supported")

    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in _WHITESPACE:
            raise CorruptFileError("missing raster separator after PGM header")
        raster = data[reader.pos + 1:reader.pos + 1 + count]
        if len(raster) < count:
            raise CorruptFileError(f"truncated PGM raster: expected {count} bytes, got {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        body = re.sub(rb"#[^\n]*", b" ", data[reader.pos:])
        tokens = body.split()
        if len(tokens) < count:
            raise CorruptFileError(f"truncated PGM raster: expected {count} values, got {len(tokens)}")
        try:
            pixels = np.array([int(t) for t in tokens[:count]], dtype=np.float64)
        except ValueError as e:
            raise CorruptFileError(f"non-numeric PGM raster value: {e}")
        if pixels.max(initial=0) > maxval:
            raise CorruptFileError("PGM raster value exceeds maxval")
        if pixels.min(initial=0) < 0:
            raise CorruptFileError("negative PGM raster value")

    logger.debug(f"Read {magic.decode()} PGM {width}x{height}")
    return Image.from_array(pixels.reshape(height, width))


def quantize(img: Image) -> np.ndarray:
    """Round half away from zero and clamp to 8-bit"""
    return np.clip(round_half_away(img.pixels), 0, 255).astype(np.uint8)


def write_pgm(img: Image) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + quantize(img).tobytes()


def write_csv(table: CsvTable) -> bytes:
    table.validate()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue().encode("ascii")


def load_image(path: Union[str, Path]) -> Image:
    path = Path(path)
    with open(path, "rb") as f:
        data = f.read()
    img = read_pgm(data)
    logger.info(f"Loaded {path} ({img.width}x{img.height})")
    return img


def save_image(path: Union[str, Path], img: Image) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(write_pgm(img))
    logger.info(f"Wrote {path}")
    return path

