"""Timing harness for resolution and hyperedge-count sweeps.

Each :class:`BenchRecord` is one plotted point: an operation timed on one
image with one scan strategy. Reports are plain CSV and a dependency-free
SVG line chart.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError
from .hypergraph import decompose, hyperedge_count
from .imagekit import SynthSpec, checker_hyperedges, synth
from .runscan import ScanStrategy, build_profile, cut_vertex_counts

OPS = ("counts", "profile", "decompose")
CSV_HEADER = "op,strategy,threads,width,height,hyperedges,reps,median_ns"


def _run_op(op_name, image, strategy):
    if op_name == "counts":
        return cut_vertex_counts(image, strategy)
    if op_name == "profile":
        return build_profile(image, strategy)
    # full pipeline: profile under the strategy, then the serial linking pass
    return decompose(build_profile(image, strategy))


def _same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


@dataclass(frozen=True)
class BenchRecord:
    op_name: str
    strategy: ScanStrategy
    width: int
    height: int
    hyperedge_count: int
    wall_times: tuple = field(repr=False)

    def __post_init__(self):
        if not self.wall_times:
            raise ValidationError("a record needs at least one wall time")

    @property
    def reps(self):
        return len(self.wall_times)

    @property
    def median_ns(self):
        ordered = sorted(self.wall_times)
        return ordered[(len(ordered) - 1) // 2]


def count_hyperedges(image):
    return hyperedge_count(decompose(build_profile(image)))


def time_op(op_name, image, strategy=ScanStrategy.serial(), reps=5, warmup=1, hyperedges=None):
    """Time ``op_name`` on ``image``: ``warmup`` untimed calls, then ``reps`` timed ones.

    Every timed call must return the same result as the first, otherwise
    ``RuntimeError`` is raised. ``hyperedges`` may be passed to skip the
    one-off decomposition used to fill :attr:`BenchRecord.hyperedge_count`.
    """
    if op_name not in OPS:
        raise ValidationError(f"unknown op {op_name!r}; choose from {', '.join(OPS)}")
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    if warmup < 0:
        raise ValidationError(f"warmup must be >= 0, got {warmup}")
    if hyperedges is None:
        hyperedges = count_hyperedges(image)

    for _ in range(warmup):
        _run_op(op_name, image, strategy)
    times = []
    reference = None
    for i in range(reps):
        start = time.perf_counter_ns()
        result = _run_op(op_name, image, strategy)
        times.append(time.perf_counter_ns() - start)
        if i == 0:
            reference = result
        elif not _same(result, reference):
            raise RuntimeError(f"{op_name} returned a different result on rep {i}")
        del result
    return BenchRecord(op_name, strategy, image.width, image.height, hyperedges, tuple(times))


@dataclass(frozen=True)
class SweepConfig:
    """One experiment axis.

    ``values`` are square sizes for ``axis="resolution"`` and hyperedge
    targets for ``axis="hyperedges"``. The ``pattern`` template supplies the
    generator for resolution sweeps and the fixed geometry for hyperedge
    sweeps.
    """

    axis: str
    values: tuple
    pattern: SynthSpec
    strategies: tuple = (ScanStrategy.serial(),)
    reps: int = 5
    warmup: int = 1
    op_name: str = "counts"

    def validate(self):
        if self.axis not in ("resolution", "hyperedges"):
            raise ValidationError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ValidationError("sweep needs at least one size or target")
        if not self.strategies:
            raise ValidationError("sweep needs at least one strategy")
        if self.reps < 1 or self.warmup < 0:
            raise ValidationError("reps must be >= 1 and warmup >= 0")
        if self.op_name not in OPS:
            raise ValidationError(f"unknown op {self.op_name!r}")
        if self.axis == "resolution":
            if any(b <= a for a, b in zip(self.values, self.values[1:])):
                raise ValidationError("resolution sizes must be strictly increasing")
            if self.values[0] < 0:
                raise ValidationError("resolution sizes must be non-negative")
        return self


def resolution_sweep(cfg):
    cfg.validate()
    if cfg.axis != "resolution":
        raise ValidationError("resolution_sweep needs axis='resolution'")
    records = []
    for size in cfg.values:
        image = synth(replace(cfg.pattern, width=size, height=size))
        edges = count_hyperedges(image)
        for strategy in cfg.strategies:
            records.append(time_op(cfg.op_name, image, strategy, cfg.reps, cfg.warmup, edges))
    return records


def hyperedge_instance(width, height, target):
    """Generator spec whose hyperedge count matches ``target`` at this geometry.

    ``hbands(target)`` is exact whenever ``target <= height/2``. Larger
    targets fall back to ``checker(cell)``, choosing the cell whose
    foreground-cell count is closest to the target (ties go to the larger
    cell); ``checker(1)`` is the densest instance available.
    """
    if target < 1:
        raise ValidationError(f"hyperedge target must be >= 1, got {target}")
    if width < 1 or height < 2:
        raise ValidationError(f"{width}x{height} is too small for a hyperedge sweep")
    if target <= height / 2:
        return SynthSpec("hbands", width, height, k=target)
    ceiling = checker_hyperedges(width, height, 1)
    if target > ceiling:
        raise ValidationError(
            f"target {target} unreachable at {width}x{height}: hbands stops at {height // 2}, "
            f"checker(1) at {ceiling}")
    best = min(range(1, max(width, height) + 1),
               key=lambda c: (abs(checker_hyperedges(width, height, c) - target), -c))
    return SynthSpec("checker", width, height, cell=best)


def hyperedge_sweep(cfg):
    cfg.validate()
    if cfg.axis != "hyperedges":
        raise ValidationError("hyperedge_sweep needs axis='hyperedges'")
    width, height = cfg.pattern.width, cfg.pattern.height
    specs = [hyperedge_instance(width, height, t) for t in cfg.values]
    records = []
    for spec in specs:
        image = synth(spec)
        edges = count_hyperedges(image)
        for strategy in cfg.strategies:
            records.append(time_op(cfg.op_name, image, strategy, cfg.reps, cfg.warmup, edges))
        del image
    return records


def speedup(serial, parallel):
    """``median(serial) / median(parallel)`` for records of the same image and op."""
    if (serial.op_name, serial.width, serial.height) != (parallel.op_name, parallel.width, parallel.height):
        raise ValidationError("speedup compares records of the same op and image")
    return serial.median_ns / parallel.median_ns


def emit_csv(records):
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.op_name},{r.strategy.kind},{r.strategy.threads},{r.width},{r.height},"
                     f"{r.hyperedge_count},{r.reps},{r.median_ns}")
    return ("\n".join(lines) + "\n").encode("ascii")


# ---------------------------------------------------------------------------
# SVG

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 90, 30, 40, 60


def _x_value(record, axis):
    return record.width * record.height if axis == "resolution" else record.hyperedge_count


def emit_svg(records, axis):
    """Median time against pixel count (``axis="resolution"``) or hyperedge count.

    The hyperedge axis is drawn on a log10(1 + x) scale since sweeps cover
    several orders of magnitude. All coordinates are integers.
    """
    if not records:
        raise ValidationError("emit_svg needs at least one record")
    if axis not in ("resolution", "hyperedges"):
        raise ValidationError(f"unknown axis {axis!r}")
    ops = {r.op_name for r in records}
    if len(ops) != 1:
        raise ValidationError(f"records mix operations: {', '.join(sorted(ops))}")

    def scale_x(v):
        return math.log10(1 + v) if axis == "hyperedges" else float(v)

    xs = [_x_value(r, axis) for r in records]
    ys = [r.median_ns for r in records]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    sx_lo, sx_hi = scale_x(x_lo), scale_x(x_hi)
    plot_w = _W - _LEFT - _RIGHT
    plot_h = _H - _TOP - _BOTTOM

    def px(v):
        if sx_hi == sx_lo:
            return _LEFT + plot_w // 2
        return _LEFT + round((scale_x(v) - sx_lo) / (sx_hi - sx_lo) * plot_w)

    def py(v):
        if y_hi == y_lo:
            return _TOP + plot_h // 2
        return _TOP + plot_h - round((v - y_lo) / (y_hi - y_lo) * plot_h)

    series = {}
    for r, x, y in zip(records, xs, ys):
        series.setdefault(str(r.strategy), []).append((x, y))

    x_label = "pixels (width x height)" if axis == "resolution" else "hyperedges (log scale)"
    op = escape(records[0].op_name)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">'
        f'{op}: median wall time</text>',
        f'<line x1="{_LEFT}" y1="{_TOP + plot_h}" x2="{_LEFT + plot_w}" y2="{_TOP + plot_h}" stroke="black"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_TOP + plot_h}" stroke="black"/>',
        f'<text x="{_LEFT}" y="{_TOP + plot_h + 18}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="11">{x_lo}</text>',
        f'<text x="{_LEFT + plot_w}" y="{_TOP + plot_h + 18}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="11">{x_hi}</text>',
        f'<text x="{_LEFT + plot_w // 2}" y="{_H - 16}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">{x_label}</text>',
        f'<text x="{_LEFT - 6}" y="{_TOP + plot_h}" text-anchor="end" font-family="sans-serif" '
        f'font-size="11">{y_lo}</text>',
        f'<text x="{_LEFT - 6}" y="{_TOP + 4}" text-anchor="end" font-family="sans-serif" '
        f'font-size="11">{y_hi}</text>',
        f'<text x="16" y="{_TOP + plot_h // 2}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {_TOP + plot_h // 2})">median ns</text>',
    ]
    for i, (name, points) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(x)},{py(y)}" for x, y in sorted(points))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        out.append(f'<text x="{_LEFT + 10}" y="{_TOP + 14 + 14 * i}" font-family="sans-serif" '
                   f'font-size="11" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
