"""The y-convex hypergraph: construction, oracle, reconstruction, areas, JSON.

Runs in adjacent columns are *linked* when they share at least one row and
each is the other's only such neighbour. Hyperedges are the chains formed by
links, so every hyperedge meets each column of its span in exactly one run.
Hyperedge ids follow ``(col_start, y_top of first run)`` order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np

from .errors import SchemaError, ValidationError
from .imagekit import BinaryImage
from .runscan import ColumnProfile, Run

MAX_DIM = 2**31 - 1


@dataclass(frozen=True)
class Hyperedge:
    id: int
    col_start: int
    runs: tuple

    @property
    def col_end(self):
        return self.col_start + len(self.runs) - 1

    @property
    def area(self):
        return sum(r.y_bot - r.y_top + 1 for r in self.runs)


class YCHG:
    """Partition of a :class:`ColumnProfile`'s runs into y-convex hyperedges.

    ``run_to_edge[i]`` is the hyperedge id of the profile's ``i``-th run.
    """

    def __init__(self, profile, run_to_edge, n_edges=None):
        self.profile = profile
        self.run_to_edge = np.asarray(run_to_edge, dtype=np.int64)
        self.run_to_edge.flags.writeable = False
        if n_edges is None:
            n_edges = int(self.run_to_edge.max()) + 1 if len(self.run_to_edge) else 0
        self.n_edges = int(n_edges)

    @property
    def width(self):
        return self.profile.width

    @property
    def height(self):
        return self.profile.height

    @cached_property
    def _grouping(self):
        if len(self.run_to_edge) != self.profile.n_runs:
            raise ValidationError("run_to_edge must label every run of the profile")
        if len(self.run_to_edge) and (self.run_to_edge.min() < 0 or self.run_to_edge.max() >= self.n_edges):
            raise ValidationError("run_to_edge holds ids outside 0..n_edges-1")
        return _group_by_edge(self.run_to_edge, self.n_edges)

    @property
    def edge_offsets(self):
        """Runs of hyperedge ``k`` are ``edge_runs[edge_offsets[k]:edge_offsets[k+1]]``."""
        return self._grouping[0]

    @property
    def edge_runs(self):
        return self._grouping[1]

    @cached_property
    def edge_col_start(self):
        if self.n_edges == 0:
            return np.zeros(0, dtype=np.int64)
        first = self.edge_runs[self.edge_offsets[:-1]]
        return self.profile.run_cols[first]

    def hyperedge(self, k):
        lo, hi = self.edge_offsets[k], self.edge_offsets[k + 1]
        idx = self.edge_runs[lo:hi]
        start = int(self.edge_col_start[k])
        p = self.profile
        runs = tuple(Run(start + i, int(p.y_top[r]), int(p.y_bot[r])) for i, r in enumerate(idx))
        return Hyperedge(k, start, runs)

    @property
    def hyperedges(self):
        return [self.hyperedge(k) for k in range(self.n_edges)]

    def validate(self):
        """Check partition, y-convexity, overlap and canonical-order invariants."""
        self.profile.validate()
        offsets, runs = self._grouping
        sizes = np.diff(offsets)
        if np.any(sizes == 0):
            raise ValidationError(f"hyperedge {int(np.flatnonzero(sizes == 0)[0])} has no runs")
        if self.n_edges == 0:
            return self
        cols = self.profile.run_cols[runs]
        tops = self.profile.y_top[runs]
        bots = self.profile.y_bot[runs]
        inner = np.ones(len(runs), dtype=bool)
        inner[offsets[:-1]] = False
        inner = inner[1:]
        owner = np.repeat(np.arange(self.n_edges), sizes)[1:]
        gap = inner & (cols[1:] != cols[:-1] + 1)
        if np.any(gap):
            raise ValidationError(f"hyperedge {int(owner[np.argmax(gap)])} does not cover consecutive columns")
        apart = inner & (np.maximum(tops[1:], tops[:-1]) > np.minimum(bots[1:], bots[:-1]))
        if np.any(apart):
            raise ValidationError(f"hyperedge {int(owner[np.argmax(apart)])} has vertically disjoint neighbouring runs")
        first = runs[offsets[:-1]]
        if np.any(np.diff(first) <= 0):
            raise ValidationError("hyperedge ids are not in (col_start, y_top) order")
        return self

    def __eq__(self, other):
        if not isinstance(other, YCHG):
            return NotImplemented
        return (self.n_edges == other.n_edges and self.profile == other.profile
                and np.array_equal(self.run_to_edge, other.run_to_edge))

    __hash__ = None

    def __repr__(self):
        return f"YCHG({self.width}x{self.height}, hyperedges={self.n_edges}, runs={self.profile.n_runs})"

    @classmethod
    def from_hyperedges(cls, width, height, edges):
        """Build from run lists (one list per hyperedge, any order).

        Hyperedges are renumbered canonically; the result is validated.
        """
        labelled = [(r.col, r.y_top, r.y_bot, k) for k, edge in enumerate(edges) for r in edge]
        labelled.sort()
        counts = np.zeros(width, dtype=np.int64)
        for col, *_ in labelled:
            if not 0 <= col < width:
                raise ValidationError(f"run in column {col} outside 0..{width - 1}")
            counts[col] += 1
        offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        tops = np.array([t for _, t, _, _ in labelled], dtype=np.int64)
        bots = np.array([b for _, _, b, _ in labelled], dtype=np.int64)
        if len(tops) and (tops.min() < 0 or bots.max() >= height):
            raise ValidationError(f"run outside rows 0..{height - 1}")
        profile = ColumnProfile(width, height, offsets, tops, bots)
        # first appearance in (col, y_top) order is the canonical id
        remap = {}
        labels = np.empty(len(labelled), dtype=np.int64)
        for i, (*_, k) in enumerate(labelled):
            labels[i] = remap.setdefault(k, len(remap))
        return cls(profile, labels, len(edges)).validate()


@numba.njit(cache=True)
def _group_by_edge(run_to_edge, n_edges):
    offsets = np.zeros(n_edges + 1, dtype=np.int64)
    for e in run_to_edge:
        offsets[e + 1] += 1
    for k in range(n_edges):
        offsets[k + 1] += offsets[k]
    cursor = offsets[:-1].copy()
    runs = np.empty(len(run_to_edge), dtype=np.int64)
    for i in range(len(run_to_edge)):
        e = run_to_edge[i]
        runs[cursor[e]] = i
        cursor[e] += 1
    return offsets, runs


@numba.njit(cache=True)
def _link_columns(offsets, tops, bots, width, run_edge):
    if width == 0:
        return 0
    widest = 0
    for c in range(width):
        widest = max(widest, offsets[c + 1] - offsets[c])
    n_right = np.zeros(widest, dtype=np.int64)
    right_of = np.zeros(widest, dtype=np.int64)
    n_left = np.zeros(widest, dtype=np.int64)
    left_of = np.zeros(widest, dtype=np.int64)

    next_id = 0
    for r in range(offsets[0], offsets[1]):
        run_edge[r] = next_id
        next_id += 1
    for c in range(width - 1):
        a0, a1 = offsets[c], offsets[c + 1]
        b0, b1 = offsets[c + 1], offsets[c + 2]
        n_a, n_b = a1 - a0, b1 - b0
        n_right[:n_a] = 0
        n_left[:n_b] = 0
        # both columns are sorted and disjoint: a merge walk finds all overlaps
        i = 0
        j = 0
        while i < n_a and j < n_b:
            ta, ba = tops[a0 + i], bots[a0 + i]
            tb, bb = tops[b0 + j], bots[b0 + j]
            if max(ta, tb) <= min(ba, bb):
                n_right[i] += 1
                right_of[i] = j
                n_left[j] += 1
                left_of[j] = i
            if ba < bb:
                i += 1
            else:
                j += 1
        for j in range(n_b):
            if n_left[j] == 1 and n_right[left_of[j]] == 1:
                run_edge[b0 + j] = run_edge[a0 + left_of[j]]
            else:
                run_edge[b0 + j] = next_id
                next_id += 1
    return next_id


def decompose(profile):
    """Canonical yCHG of a column profile (single left-to-right pass)."""
    if not isinstance(profile, ColumnProfile):
        raise ValidationError(f"expected a ColumnProfile, got {type(profile).__name__}")
    profile.validate()
    run_edge = np.empty(profile.n_runs, dtype=np.int64)
    n = _link_columns(profile.offsets, profile.y_top, profile.y_bot, profile.width, run_edge)
    return YCHG(profile, run_edge, n)


def oracle_decompose(image):
    """Brute-force reference decomposition straight from the pixels.

    Deliberately naive: pixel-by-pixel run scan, all-pairs interval tests
    between neighbouring columns, and depth-first search over links.
    """
    rows = image.pixels.tolist()
    width, height = image.width, image.height
    columns = []
    for x in range(width):
        runs = []
        y = 0
        while y < height:
            if rows[y][x]:
                top = y
                while y + 1 < height and rows[y + 1][x]:
                    y += 1
                runs.append(Run(x, top, y))
            y += 1
        columns.append(runs)

    neighbours = {}
    for x in range(width - 1):
        overlaps = [(r, s) for r in columns[x] for s in columns[x + 1]
                    if max(r.y_top, s.y_top) <= min(r.y_bot, s.y_bot)]
        degree = {}
        for r, s in overlaps:
            degree[r] = degree.get(r, 0) + 1
            degree[s] = degree.get(s, 0) + 1
        for r, s in overlaps:
            if degree[r] == 1 and degree[s] == 1:
                neighbours.setdefault(r, []).append(s)
                neighbours.setdefault(s, []).append(r)

    seen = set()
    edges = []
    for runs in columns:
        for run in runs:
            if run in seen:
                continue
            component = []
            stack = [run]
            seen.add(run)
            while stack:
                cur = stack.pop()
                component.append(cur)
                for nxt in neighbours.get(cur, ()):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            edges.append(sorted(component))
    return YCHG.from_hyperedges(width, height, edges)


def run_partition(ychg):
    """Hyperedges as a set of frozensets of :class:`Run`, ignoring ids."""
    return {frozenset(e.runs) for e in ychg.hyperedges}


def reconstruct(ychg):
    """Rasterize every run back into a :class:`BinaryImage`."""
    p = ychg.profile
    if p.n_runs and (p.y_top.min() < 0 or p.y_bot.max() >= p.height
                     or np.any(p.y_top > p.y_bot)):
        raise ValidationError(f"run outside {p.width}x{p.height} geometry")
    delta = np.zeros((p.height + 1, p.width), dtype=np.int32)
    cols = p.run_cols
    np.add.at(delta, (p.y_top, cols), 1)
    np.add.at(delta, (p.y_bot + 1, cols), -1)
    return BinaryImage(np.cumsum(delta[:-1], axis=0))


def areas(ychg):
    """``(total, per_edge)`` pixel areas, ``per_edge`` in id order."""
    p = ychg.profile
    lengths = p.y_bot.astype(np.int64) - p.y_top + 1
    per_edge = np.zeros(ychg.n_edges, dtype=np.int64)
    np.add.at(per_edge, ychg.run_to_edge, lengths)
    return int(per_edge.sum()), per_edge.tolist()


def hyperedge_count(ychg):
    return ychg.n_edges


# ---------------------------------------------------------------------------
# JSON

def to_json(ychg):
    edges = []
    p = ychg.profile
    tops, bots = p.y_top.tolist(), p.y_bot.tolist()
    col_start = ychg.edge_col_start.tolist()
    offsets, runs = ychg.edge_offsets.tolist(), ychg.edge_runs.tolist()
    for k in range(ychg.n_edges):
        members = runs[offsets[k]:offsets[k + 1]]
        edges.append({"id": k, "col_start": col_start[k],
                      "runs": [[tops[r], bots[r]] for r in members]})
    doc = {"width": ychg.width, "height": ychg.height, "hyperedges": edges}
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def _int(value, path, lo=0, hi=MAX_DIM):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {json.dumps(value)}", path)
    if not lo <= value <= hi:
        raise SchemaError(f"{value} outside {lo}..{hi}", path)
    return value


def _object(value, path, keys):
    if not isinstance(value, dict):
        raise SchemaError("expected an object", path)
    missing = [k for k in keys if k not in value]
    if missing:
        raise SchemaError(f"missing key {missing[0]!r}", path)
    extra = sorted(set(value) - set(keys))
    if extra:
        raise SchemaError(f"unexpected key {extra[0]!r}", path)
    return value


def from_json(data):
    """Parse and fully validate a serialized yCHG."""
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"not valid JSON: {exc}", "$") from None
    _object(doc, "$", ("width", "height", "hyperedges"))
    width = _int(doc["width"], "$.width")
    height = _int(doc["height"], "$.height")
    if not isinstance(doc["hyperedges"], list):
        raise SchemaError("expected an array", "$.hyperedges")

    edges = []
    located = []
    prev_key = None
    for i, raw in enumerate(doc["hyperedges"]):
        path = f"$.hyperedges[{i}]"
        _object(raw, path, ("id", "col_start", "runs"))
        if _int(raw["id"], f"{path}.id") != i:
            raise SchemaError(f"id {raw['id']} does not match position {i}", f"{path}.id")
        start = _int(raw["col_start"], f"{path}.col_start")
        if not isinstance(raw["runs"], list) or not raw["runs"]:
            raise SchemaError("expected a non-empty array", f"{path}.runs")
        if start + len(raw["runs"]) > width:
            raise SchemaError(f"span exceeds width {width}", f"{path}.runs")
        runs = []
        for j, pair in enumerate(raw["runs"]):
            rpath = f"{path}.runs[{j}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError("expected [y_top, y_bot]", rpath)
            top = _int(pair[0], f"{rpath}[0]", 0, max(height - 1, 0))
            bot = _int(pair[1], f"{rpath}[1]", 0, max(height - 1, 0))
            if height == 0:
                raise SchemaError("run in an image of height 0", rpath)
            if top > bot:
                raise SchemaError(f"y_top {top} > y_bot {bot}", rpath)
            run = Run(start + j, top, bot)
            if runs and max(run.y_top, runs[-1].y_top) > min(run.y_bot, runs[-1].y_bot):
                raise SchemaError("does not overlap the run in the previous column", rpath)
            runs.append(run)
            located.append((run, rpath))
        key = (start, runs[0].y_top)
        if prev_key is not None and key <= prev_key:
            raise SchemaError("hyperedges not in (col_start, y_top) order", path)
        prev_key = key
        edges.append(runs)

    located.sort()
    for (a, _), (b, path) in zip(located, located[1:]):
        if a.col == b.col and b.y_top <= a.y_bot + 1:
            raise SchemaError(f"touches or overlaps another run in column {b.col}", path)
    return YCHG.from_hyperedges(width, height, edges)
