"""8-bit raster images and the Netpbm (PGM/PPM) codec.

Images are immutable: ``samples`` is a bytes object laid out row-major
and channel-interleaved. All vision pipelines ingest and emit this type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagic,
    MaxvalUnsupported,
    NonPositiveDimensions,
    NotGrayscale,
    TruncatedData,
)

# BT.601 luma weights; the RGB -> gray rule used everywhere in the package.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class Image:
    """Raster with 1 (gray) or 3 (RGB) channels of 8-bit samples."""

    width: int
    height: int
    channels: int
    samples: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dimensions must be positive, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        expected = self.width * self.height * self.channels
        if len(self.samples) != expected:
            raise ValueError(f"expected {expected} samples, got {len(self.samples)}")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Image":
        """Build from an (h, w) or (h, w, 3) uint8-compatible array."""
        a = np.asarray(arr)
        if a.ndim == 2:
            channels = 1
        elif a.ndim == 3 and a.shape[2] == 3:
            channels = 3
        else:
            raise ValueError(f"unsupported array shape {a.shape}")
        if a.dtype != np.uint8:
            if a.min() < 0 or a.max() > 255:
                raise ValueError("sample values outside 0..255")
            a = a.astype(np.uint8)
        h, w = a.shape[:2]
        return cls(w, h, channels, a.tobytes())

    def to_array(self) -> np.ndarray:
        """Read-only uint8 view shaped (h, w) or (h, w, 3)."""
        a = np.frombuffer(self.samples, dtype=np.uint8)
        if self.channels == 1:
            return a.reshape(self.height, self.width)
        return a.reshape(self.height, self.width, 3)

    def pixel(self, x: int, y: int):
        """Sample at column x, row y: an int for gray, an (r, g, b) tuple for RGB."""
        i = (y * self.width + x) * self.channels
        if self.channels == 1:
            return self.samples[i]
        return tuple(self.samples[i:i + 3])


@dataclass(frozen=True)
class Histogram:
    """Counts of the 256 gray levels of a single-channel image."""

    bins: tuple

    def __post_init__(self):
        if len(self.bins) != 256:
            raise ValueError(f"histogram needs 256 bins, got {len(self.bins)}")

    def total(self) -> int:
        return sum(self.bins)


# PNM codec ---------------------------------------------------------------

_MAGIC_CHANNELS = {b"P2": 1, b"P3": 3, b"P5": 1, b"P6": 3}
_MAGIC_ASCII = {b"P2", b"P3"}


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token; '#' comments run to end of line."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise TruncatedData("header ended early")
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, pos = _next_token(data, pos)
    try:
        return int(tok), pos
    except ValueError:
        raise TruncatedData(f"bad {what} token {tok!r}") from None


def parse_pnm(data: bytes) -> Image:
    """Decode a P2/P3 (ASCII) or P5/P6 (binary) image, maxval <= 255."""
    magic = data[:2]
    if magic not in _MAGIC_CHANNELS:
        raise BadMagic(f"unsupported magic {magic!r}")
    channels = _MAGIC_CHANNELS[magic]
    pos = 2
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    if width <= 0 or height <= 0:
        raise NonPositiveDimensions(f"{width}x{height}")
    maxval, pos = _int_token(data, pos, "maxval")
    if not 1 <= maxval <= 255:
        raise MaxvalUnsupported(f"maxval {maxval} outside 1..255")

    count = width * height * channels
    if magic in _MAGIC_ASCII:
        values = []
        for _ in range(count):
            v, pos = _int_token(data, pos, "sample")
            if not 0 <= v <= maxval:
                raise TruncatedData(f"sample {v} outside 0..{maxval}")
            values.append(v)
        samples = bytes(values)
    else:
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise TruncatedData("missing raster separator")
        pos += 1
        samples = data[pos:pos + count]
        if len(samples) != count:
            raise TruncatedData(f"raster has {len(samples)} of {count} bytes")
    return Image(width, height, channels, samples)


def write_pnm(img: Image, ascii: bool = False) -> bytes:
    """Encode to P5/P6, or P2/P3 when ``ascii`` is set; inverse of parse_pnm."""
    if ascii:
        magic = "P2" if img.channels == 1 else "P3"
        header = f"{magic}\n{img.width} {img.height}\n255\n"
        per_row = img.width * img.channels
        lines = []
        for y in range(img.height):
            row = img.samples[y * per_row:(y + 1) * per_row]
            lines.append(" ".join(str(v) for v in row))
        return (header + "\n".join(lines) + "\n").encode("ascii")
    magic = "P5" if img.channels == 1 else "P6"
    header = f"{magic}\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.samples


def to_grayscale(img: Image) -> Image:
    """BT.601 luma with round-half-up; gray input is returned unchanged."""
    if img.channels == 1:
        return img
    rgb = img.to_array().astype(np.float64)
    luma = _LUMA_R * rgb[:, :, 0] + _LUMA_G * rgb[:, :, 1] + _LUMA_B * rgb[:, :, 2]
    gray = np.floor(luma + 0.5).astype(np.uint8)
    return Image.from_array(gray)


def histogram(img: Image) -> Histogram:
    """Gray-level counts; bins sum to width*height."""
    if img.channels != 1:
        raise NotGrayscale("histogram requires a gray image")
    counts = np.bincount(np.frombuffer(img.samples, dtype=np.uint8), minlength=256)
    return Histogram(tuple(int(c) for c in counts))
