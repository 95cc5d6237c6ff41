"""Column run extraction and cut-vertex counting.

A column's *cut-vertex count* is the number of maximal vertical foreground
runs in it. Step one of the decomposition computes these counts (optionally
materializing the runs) for every column independently; step two flags the
columns whose count differs from the preceding column.

Parallel strategies split the columns into contiguous chunks of
``ceil(width / threads)`` and hand each chunk to a worker thread. The kernels
are compiled with numba in ``nogil`` mode, so workers really do run
concurrently; each one writes only to the pre-sized output slots of its own
columns.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numba
import numpy as np

from .errors import ValidationError


class Run(NamedTuple):
    col: int
    y_top: int
    y_bot: int  # inclusive

    @property
    def length(self):
        return self.y_bot - self.y_top + 1


@dataclass(frozen=True)
class ScanStrategy:
    kind: str = "serial"
    threads: int = 1

    def __post_init__(self):
        if self.kind not in ("serial", "parallel"):
            raise ValidationError(f"unknown strategy kind {self.kind!r}")
        if not isinstance(self.threads, (int, np.integer)) or self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads!r}")
        if self.kind == "serial" and self.threads != 1:
            raise ValidationError("serial strategy runs on exactly one thread")

    @classmethod
    def serial(cls):
        return cls("serial", 1)

    @classmethod
    def parallel(cls, threads):
        return cls("parallel", threads)

    @classmethod
    def parse(cls, text):
        """``"serial"`` or ``"parallel:N"`` (``"parallel"`` alone = all cores)."""
        text = text.strip()
        if text == "serial":
            return cls.serial()
        if text == "parallel":
            return cls.parallel(hardware_threads())
        if text.startswith("parallel:"):
            try:
                n = int(text.split(":", 1)[1])
            except ValueError:
                raise ValidationError(f"bad thread count in strategy {text!r}") from None
            return cls.parallel(n)
        raise ValidationError(f"unknown strategy {text!r}")

    def __str__(self):
        return "serial" if self.kind == "serial" else f"parallel:{self.threads}"


def hardware_threads():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


class ColumnProfile:
    """Runs of every column, stored compactly.

    Runs of column ``c`` occupy ``y_top[offsets[c]:offsets[c+1]]`` and the
    same slice of ``y_bot``, ordered top to bottom. ``runs`` materializes
    them as lists of :class:`Run`.
    """

    def __init__(self, width, height, offsets, y_top, y_bot):
        self.width = int(width)
        self.height = int(height)
        self.offsets = _frozen(offsets, np.int64)
        self.y_top = _frozen(y_top, np.int32)
        self.y_bot = _frozen(y_bot, np.int32)

    @property
    def counts(self):
        return np.diff(self.offsets)

    @property
    def n_runs(self):
        return int(self.offsets[-1])

    @property
    def run_cols(self):
        """Column index of every stored run."""
        return np.repeat(np.arange(self.width, dtype=np.int64), self.counts)

    def column(self, col):
        lo, hi = self.offsets[col], self.offsets[col + 1]
        return [Run(col, int(t), int(b)) for t, b in zip(self.y_top[lo:hi], self.y_bot[lo:hi])]

    @property
    def runs(self):
        return [self.column(c) for c in range(self.width)]

    def validate(self):
        """Raise :class:`ValidationError` unless all profile invariants hold."""
        w, off, top, bot = self.width, self.offsets, self.y_top, self.y_bot
        if off.shape != (w + 1,) or off[0] != 0 or np.any(np.diff(off) < 0):
            raise ValidationError("offsets must be a non-decreasing array of width+1 entries from 0")
        if off[-1] != len(top) or len(top) != len(bot):
            raise ValidationError("run arrays disagree with offsets")
        if len(top) == 0:
            return self
        if np.any(top < 0) or np.any(bot >= self.height) or np.any(top > bot):
            bad = int(np.flatnonzero((top < 0) | (bot >= self.height) | (top > bot))[0])
            raise ValidationError(f"run {bad} [{top[bad]}, {bot[bad]}] outside 0..{self.height - 1}")
        same_col = np.ones(len(top), dtype=bool)
        same_col[off[:-1][off[:-1] < len(top)]] = False
        clash = same_col[1:] & (top[1:] <= bot[:-1] + 1)
        if np.any(clash):
            bad = int(np.flatnonzero(clash)[0]) + 1
            raise ValidationError(f"run {bad} is not separated from its predecessor by background")
        return self

    def __eq__(self, other):
        if not isinstance(other, ColumnProfile):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.y_top, other.y_top)
                and np.array_equal(self.y_bot, other.y_bot))

    __hash__ = None

    def __repr__(self):
        return f"ColumnProfile(width={self.width}, height={self.height}, runs={self.n_runs})"


def _frozen(a, dtype):
    a = np.asarray(a, dtype=dtype)
    if a.flags.writeable or not a.flags.c_contiguous:
        a = np.array(a, dtype=dtype, order="C")
        a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# kernels: row-major sweep over a column range, so memory is read contiguously

@numba.njit(nogil=True, cache=True)
def _count_kernel(px, c0, c1, out):
    h = px.shape[0]
    if h == 0:
        for c in range(c0, c1):
            out[c] = 0
        return
    # virtual row -1 is background: every run starts at a 0 -> 1 transition
    for c in range(c0, c1):
        out[c] = px[0, c]
    for y in range(1, h):
        for c in range(c0, c1):
            out[c] += px[y, c] & (px[y - 1, c] ^ 1)


@numba.njit(nogil=True, cache=True)
def _fill_kernel(px, c0, c1, offsets, tops, bots):
    h = px.shape[0]
    ptr = offsets[c0:c1].copy()
    for y in range(h):
        for c in range(c0, c1):
            if px[y, c]:
                i = c - c0
                if y == 0 or px[y - 1, c] == 0:
                    tops[ptr[i]] = y
                if y == h - 1 or px[y + 1, c] == 0:
                    bots[ptr[i]] = y
                    ptr[i] += 1


@lru_cache(maxsize=None)
def _pool(threads):
    return ThreadPoolExecutor(max_workers=threads, thread_name_prefix="runscan")


def column_chunks(width, threads):
    """Contiguous ``[start, stop)`` column ranges, ``ceil(width/threads)`` wide."""
    step = max(1, -(-width // threads))
    return [(a, min(width, a + step)) for a in range(0, width, step)]


def _dispatch(kernel, strategy, width, *args):
    if not isinstance(strategy, ScanStrategy):
        raise ValidationError(f"expected a ScanStrategy, got {strategy!r}")
    if strategy.kind == "serial" or width == 0:
        kernel(args[0], 0, width, *args[1:])
        return
    pool = _pool(strategy.threads)
    futures = [pool.submit(kernel, args[0], a, b, *args[1:])
               for a, b in column_chunks(width, strategy.threads)]
    for f in futures:
        f.result()


def column_runs(image, col):
    """Maximal vertical foreground segments of one column, top to bottom."""
    if not 0 <= col < image.width:
        raise IndexError(f"column {col} outside 0..{image.width - 1}")
    column = image.pixels[:, col].astype(np.int8)
    edges = np.diff(np.concatenate(([0], column, [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return [Run(col, int(t), int(b)) for t, b in zip(starts, stops)]


def cut_vertex_counts(image, strategy=ScanStrategy.serial()):
    """Runs per column, counted without materializing them."""
    out = np.empty(image.width, dtype=np.int64)
    _dispatch(_count_kernel, strategy, image.width, image.pixels, out)
    return out


def build_profile(image, strategy=ScanStrategy.serial()):
    counts = cut_vertex_counts(image, strategy)
    offsets = np.zeros(image.width + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    tops = np.empty(total, dtype=np.int32)
    bots = np.empty(total, dtype=np.int32)
    _dispatch(_fill_kernel, strategy, image.width, image.pixels, offsets, tops, bots)
    for a in (offsets, tops, bots):
        a.flags.writeable = False
    return ColumnProfile(image.width, image.height, offsets, tops, bots)


def detect_boundary_columns(counts):
    """Columns whose count differs from the preceding one (column -1 counts 0)."""
    counts = np.asarray(counts, dtype=np.int64)
    previous = np.concatenate(([0], counts[:-1]))
    return np.flatnonzero(counts != previous).tolist()
