"""Binary rasters: PNM I/O, synthetic generators and pixel counting.

Foreground convention used everywhere in the package: a PBM 1-bit is
foreground, and a grayscale sample is foreground when it is strictly below
the threshold (dark region of interest).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import PNMParseError, UnsupportedFormatError, ValidationError

DEFAULT_THRESHOLD = 128

PATTERNS = ("full", "empty", "frame", "hbands", "checker", "random")


class BinaryImage:
    """Immutable row-major foreground mask.

    Pixels are held as a read-only ``uint8`` array of shape ``(height, width)``
    containing only 0 and 1.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ValidationError(f"expected a 2-D mask, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr != 0, dtype=np.uint8)
        arr.flags.writeable = False
        self._pixels = arr

    @classmethod
    def blank(cls, width, height):
        return cls(np.zeros((height, width), dtype=np.uint8))

    @property
    def pixels(self):
        return self._pixels

    @property
    def width(self):
        return self._pixels.shape[1]

    @property
    def height(self):
        return self._pixels.shape[0]

    def get(self, x, y):
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"pixel ({x}, {y}) outside {self.width}x{self.height} image")
        return bool(self._pixels[y, x])

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return (self._pixels.shape == other._pixels.shape
                and np.array_equal(self._pixels, other._pixels))

    __hash__ = None

    def __repr__(self):
        return f"BinaryImage({self.width}x{self.height}, foreground={foreground_count(self)})"


def foreground_count(image):
    return int(np.count_nonzero(image.pixels))


# ---------------------------------------------------------------------------
# PNM

_WS = b" \t\n\r\v\f"


class _HeaderReader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos:self.pos + 1]
            if ch in _WS:
                self.pos += 1
            elif ch == b"#":
                while self.pos < len(data) and data[self.pos:self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            else:
                break

    def integer(self, what):
        self.skip_space()
        start = self.pos
        m = re.compile(rb"[0-9]+").match(self.data, self.pos)
        if m is None:
            if start >= len(self.data):
                raise PNMParseError(f"unexpected end of header while reading {what}", start)
            raise PNMParseError(f"expected decimal {what}", start)
        self.pos = m.end()
        return int(m.group()), start


def load_pnm(data, threshold=DEFAULT_THRESHOLD):
    """Parse a P1/P2/P4/P5 file into a :class:`BinaryImage`.

    ``threshold`` only applies to grayscale formats: samples ``< threshold``
    become foreground. Grayscale files must use maxval 255.
    """
    data = bytes(data)
    if not 0 <= threshold <= 255:
        raise ValidationError(f"threshold must be in 0..255, got {threshold}")
    if len(data) < 2 or data[0:1] != b"P" or data[1:2] not in b"1245":
        raise PNMParseError("bad magic number, expected P1, P2, P4 or P5", 0)
    kind = data[1:2].decode()
    if len(data) > 2 and data[2:3] not in _WS and data[2:3] != b"#":
        raise PNMParseError("bad magic number, expected P1, P2, P4 or P5", 0)

    reader = _HeaderReader(data)
    reader.pos = 2
    width, _ = reader.integer("width")
    height, _ = reader.integer("height")
    if kind in "25":
        maxval, at = reader.integer("maxval")
        if maxval != 255:
            raise UnsupportedFormatError(f"maxval {maxval} at byte {at}: only 255 is supported")

    if kind in "45":
        # exactly one whitespace byte separates the header from the raster
        if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in _WS:
            raise PNMParseError("missing whitespace after header", reader.pos)
        start = reader.pos + 1
        row_bytes = (width + 7) // 8 if kind == "4" else width
        need = row_bytes * height
        have = len(data) - start
        if have < need:
            raise PNMParseError(
                f"truncated raster: need {need} bytes, found {have}", start + have)
        raw = np.frombuffer(data, dtype=np.uint8, count=need, offset=start)
        raw = raw.reshape(height, row_bytes)
        if kind == "4":
            pixels = np.unpackbits(raw, axis=1, count=width) if width else np.zeros((height, 0), np.uint8)
        else:
            pixels = raw < threshold
        return BinaryImage(pixels)

    if kind == "1":
        values = []
        pos = reader.pos
        total = width * height
        while len(values) < total:
            reader.pos = pos
            reader.skip_space()
            pos = reader.pos
            if pos >= len(data):
                raise PNMParseError(f"truncated raster: {len(values)} of {total} pixels", pos)
            ch = data[pos]
            if ch not in (0x30, 0x31):
                raise PNMParseError("P1 raster accepts only '0' and '1'", pos)
            values.append(ch - 0x30)
            pos += 1
        pixels = np.array(values, dtype=np.uint8).reshape(height, width)
        return BinaryImage(pixels)

    values = []
    total = width * height
    for i in range(total):
        value, at = reader.integer(f"sample {i}")
        if value > 255:
            raise PNMParseError(f"sample {value} exceeds maxval 255", at)
        values.append(value)
    pixels = np.array(values, dtype=np.int32).reshape(height, width) < threshold
    return BinaryImage(pixels)


def save_pnm(image):
    """Encode as packed PBM (P4), 1 = foreground."""
    header = f"P4\n{image.width} {image.height}\n".encode("ascii")
    if image.width == 0 or image.height == 0:
        return header
    return header + np.packbits(image.pixels, axis=1).tobytes()


# ---------------------------------------------------------------------------
# Synthetic images

@dataclass(frozen=True)
class SynthSpec:
    """Parameters for :func:`synth`.

    Only the parameter belonging to ``pattern`` is consulted: ``k`` for
    ``hbands``, ``cell`` for ``checker``, ``density`` and ``seed`` for
    ``random``.
    """

    pattern: str
    width: int
    height: int
    k: int = 1
    cell: int = 1
    density: float = 0.5
    seed: int = 0

    def validate(self):
        if self.pattern not in PATTERNS:
            raise ValidationError(f"unknown pattern {self.pattern!r}; choose from {', '.join(PATTERNS)}")
        for name in ("width", "height"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 0:
                raise ValidationError(f"{name} must be a non-negative integer, got {value!r}")
        if self.pattern == "hbands" and not 1 <= self.k <= self.height / 2:
            raise ValidationError(
                f"hbands needs 1 <= k <= height/2 ({self.height / 2:g}), got k={self.k}")
        if self.pattern == "checker" and self.cell < 1:
            raise ValidationError(f"checker cell must be >= 1, got {self.cell}")
        if self.pattern == "random":
            if not 0.0 <= self.density <= 1.0:
                raise ValidationError(f"density must lie in [0, 1], got {self.density}")
            if not 0 <= self.seed < 2**64:
                raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        return self


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed, start, count):
    """Outputs ``start .. start+count-1`` (0-based) of SplitMix64 seeded by ``seed``.

    SplitMix64 (Steele, Lea, Flood 2014; reference code by S. Vigna) is
    counter based: output ``i`` mixes ``seed + (i + 1) * 0x9E3779B97F4A7C15``,
    so any slice of the stream can be generated independently.
    """
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _random_mask(width, height, density, seed):
    # pixel (x, y) is stream element y*width + x; foreground iff
    # (z >> 11) / 2**53 < density
    limit = np.uint64(math.ceil(density * 2.0**53))
    out = np.empty((height, width), dtype=np.uint8)
    if width == 0:
        return out
    rows_per_block = max(1, (1 << 20) // width)
    for y0 in range(0, height, rows_per_block):
        y1 = min(height, y0 + rows_per_block)
        z = splitmix64(seed, y0 * width, (y1 - y0) * width)
        out[y0:y1] = ((z >> np.uint64(11)) < limit).reshape(y1 - y0, width)
    return out


def hband_rows(height, k):
    """Row ranges ``[(top, bottom_exclusive), ...]`` of the ``k`` bands.

    Bands have the largest common height that leaves a one-row gap between
    neighbours; leftover rows stay background at the bottom.
    """
    band = (height - (k - 1)) // k
    return [(i * (band + 1), i * (band + 1) + band) for i in range(k)]


def synth(spec):
    spec.validate()
    w, h = spec.width, spec.height
    if spec.pattern == "full":
        pixels = np.ones((h, w), dtype=np.uint8)
    elif spec.pattern == "empty":
        pixels = np.zeros((h, w), dtype=np.uint8)
    elif spec.pattern == "frame":
        pixels = np.zeros((h, w), dtype=np.uint8)
        if w and h:
            pixels[0, :] = pixels[-1, :] = 1
            pixels[:, 0] = pixels[:, -1] = 1
    elif spec.pattern == "hbands":
        pixels = np.zeros((h, w), dtype=np.uint8)
        for top, bottom in hband_rows(h, spec.k):
            pixels[top:bottom, :] = 1
    elif spec.pattern == "checker":
        ys = (np.arange(h) // spec.cell)[:, None]
        xs = (np.arange(w) // spec.cell)[None, :]
        pixels = ((xs + ys) % 2 == 0).astype(np.uint8)
    else:
        pixels = _random_mask(w, h, spec.density, spec.seed)
    return BinaryImage(pixels)


def checker_hyperedges(width, height, cell):
    """Number of foreground cells of ``checker(cell)``.

    Every foreground cell is an isolated y-convex block (its neighbours
    across a column boundary only touch it at corners), so this is also the
    hyperedge count of the pattern.
    """
    nx = -(-width // cell)
    ny = -(-height // cell)
    return (nx * ny + 1) // 2
