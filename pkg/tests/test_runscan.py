import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import example_b, naive_column_runs
from ychg import (BinaryImage, ColumnProfile, Run, ScanStrategy, SynthSpec, ValidationError,
                  build_profile, column_runs, cut_vertex_counts, detect_boundary_columns,
                  foreground_count, synth)
from ychg.runscan import column_chunks

STRATEGIES = [ScanStrategy.serial()] + [ScanStrategy.parallel(t) for t in (1, 2, 3, 4, 8)]

images = arrays(np.uint8, st.tuples(st.integers(0, 24), st.integers(0, 24)), elements=st.integers(0, 1)).map(BinaryImage)


def test_column_runs_examples(full4, frame5):
    assert column_runs(full4, 2) == [Run(2, 0, 3)]
    assert column_runs(frame5, 1) == [Run(1, 0, 0), Run(1, 4, 4)]
    assert column_runs(synth(SynthSpec("empty", 3, 3)), 0) == []


def test_column_runs_bounds(full4):
    with pytest.raises(IndexError):
        column_runs(full4, 4)


@pytest.mark.parametrize("strategy", STRATEGIES, ids=str)
def test_counts_examples(strategy, full4, frame5):
    assert cut_vertex_counts(full4, strategy).tolist() == [1, 1, 1, 1]
    assert cut_vertex_counts(frame5, strategy).tolist() == [1, 2, 2, 2, 1]
    assert cut_vertex_counts(synth(SynthSpec("empty", 3, 3)), strategy).tolist() == [0, 0, 0]


def test_zero_threads_rejected():
    with pytest.raises(ValidationError):
        ScanStrategy.parallel(0)


def test_strategy_parse():
    assert ScanStrategy.parse("serial") == ScanStrategy.serial()
    assert ScanStrategy.parse("parallel:4") == ScanStrategy.parallel(4)
    with pytest.raises(ValidationError):
        ScanStrategy.parse("parallel:0")
    with pytest.raises(ValidationError):
        ScanStrategy.parse("gpu")


@pytest.mark.parametrize("width, threads", [(0, 4), (1, 4), (5, 2), (10, 3), (10, 10), (7, 16)])
def test_column_chunks_partition(width, threads):
    chunks = column_chunks(width, threads)
    covered = [c for a, b in chunks for c in range(a, b)]
    assert covered == list(range(width))
    assert len(chunks) <= threads
    assert all(b - a <= -(-width // threads) for a, b in chunks)


def test_build_profile_frame(frame5):
    profile = build_profile(frame5)
    assert profile.counts.tolist() == [1, 2, 2, 2, 1]
    assert profile.runs[1] == [Run(1, 0, 0), Run(1, 4, 4)]
    assert profile.runs[0] == [Run(0, 0, 4)]


def test_build_profile_hbands():
    profile = build_profile(synth(SynthSpec("hbands", 8, 11, k=3)), ScanStrategy.parallel(3))
    assert profile.counts.tolist() == [3] * 8


def test_build_profile_empty():
    profile = build_profile(synth(SynthSpec("empty", 3, 3)))
    assert profile.counts.tolist() == [0, 0, 0]
    assert profile.runs == [[], [], []]


def test_degenerate_geometries():
    for w, h in [(0, 0), (0, 5), (5, 0)]:
        img = BinaryImage.blank(w, h)
        assert cut_vertex_counts(img, ScanStrategy.parallel(4)).tolist() == [0] * w
        assert build_profile(img, ScanStrategy.parallel(4)).n_runs == 0


@settings(max_examples=200, deadline=None)
@given(images)
def test_profile_matches_naive_scan(img):
    profile = build_profile(img)
    for c in range(img.width):
        assert [(r.y_top, r.y_bot) for r in profile.column(c)] == naive_column_runs(img, c)
        assert column_runs(img, c) == profile.column(c)
    assert profile.counts.tolist() == cut_vertex_counts(img).tolist()


@settings(max_examples=200, deadline=None)
@given(images, st.sampled_from([1, 2, 4, 8]))
def test_strategy_equivalence(img, threads):
    strategy = ScanStrategy.parallel(threads)
    assert np.array_equal(cut_vertex_counts(img, strategy), cut_vertex_counts(img))
    assert build_profile(img, strategy) == build_profile(img)


@settings(max_examples=200, deadline=None)
@given(images)
def test_profile_invariants_and_conservation(img):
    profile = build_profile(img).validate()
    lengths = (profile.y_bot.astype(int) - profile.y_top + 1).sum()
    assert lengths == foreground_count(img)


@settings(max_examples=200, deadline=None)
@given(images)
def test_detection_soundness(img):
    profile = build_profile(img)
    for c in detect_boundary_columns(profile.counts):
        here = {(r.y_top, r.y_bot) for r in profile.column(c)}
        before = {(r.y_top, r.y_bot) for r in profile.column(c - 1)} if c > 0 else set()
        assert here != before


def test_detect_boundary_examples():
    assert detect_boundary_columns([1, 2, 2, 2, 1]) == [0, 1, 4]
    assert detect_boundary_columns([0, 0, 0]) == []
    assert detect_boundary_columns([]) == []
    assert detect_boundary_columns(cut_vertex_counts(example_b()).tolist()) == [0]


def test_profile_validate_rejects_merged_runs():
    # two runs in one column with no background row between them
    bad = ColumnProfile(1, 5, [0, 2], [0, 2], [1, 3])
    with pytest.raises(ValidationError):
        bad.validate()
    with pytest.raises(ValidationError):
        ColumnProfile(1, 3, [0, 1], [1], [3]).validate()
