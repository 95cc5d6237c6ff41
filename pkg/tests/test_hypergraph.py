import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import example_b
from ychg import (YCHG, BinaryImage, Run, ScanStrategy, SchemaError, SynthSpec, ValidationError, areas,
                  build_profile, decompose, detect_boundary_columns, foreground_count, from_json,
                  hyperedge_count, oracle_decompose, reconstruct, run_partition, synth, to_json)
from ychg.runscan import ColumnProfile

images = arrays(np.uint8, st.tuples(st.integers(0, 20), st.integers(0, 20)), elements=st.integers(0, 1)).map(BinaryImage)


def ychg_of(img, strategy=ScanStrategy.serial()):
    return decompose(build_profile(img, strategy))


def test_full_single_hyperedge(full4):
    g = ychg_of(full4)
    assert hyperedge_count(g) == 1
    (edge,) = g.hyperedges
    assert edge.col_start == 0 and edge.col_end == 3
    assert areas(g) == (16, [16])
    assert oracle_decompose(full4) == g
    assert reconstruct(g) == full4


def test_frame_four_hyperedges(frame5):
    g = ychg_of(frame5)
    assert [tuple(e.runs) for e in g.hyperedges] == [
        (Run(0, 0, 4),),
        (Run(1, 0, 0), Run(2, 0, 0), Run(3, 0, 0)),
        (Run(1, 4, 4), Run(2, 4, 4), Run(3, 4, 4)),
        (Run(4, 0, 4),),
    ]
    assert areas(g) == (16, [5, 3, 3, 5])
    assert oracle_decompose(frame5) == g
    assert reconstruct(g) == frame5


def test_example_b_four_singletons():
    img = example_b()
    g = ychg_of(img)
    assert hyperedge_count(g) == 4
    assert all(len(e.runs) == 1 for e in g.hyperedges)
    assert run_partition(g) == run_partition(oracle_decompose(img))
    assert detect_boundary_columns(build_profile(img).counts) == [0]


def test_empty_geometry():
    g = ychg_of(synth(SynthSpec("empty", 3, 3)))
    assert hyperedge_count(g) == 0
    assert areas(g) == (0, [])
    assert reconstruct(g) == BinaryImage.blank(3, 3)


@pytest.mark.parametrize("k", [1, 3, 7])
def test_hbands_k_hyperedges(k):
    img = synth(SynthSpec("hbands", 9, 2 * k + 3, k=k))
    assert hyperedge_count(ychg_of(img)) == k
    assert hyperedge_count(oracle_decompose(img)) == k


def test_checker1_isolated_pixels():
    img = synth(SynthSpec("checker", 8, 8, cell=1))
    assert hyperedge_count(oracle_decompose(img)) == 32
    assert hyperedge_count(ychg_of(img)) == foreground_count(img) == 32


def test_diagonal_contact_does_not_link():
    img = BinaryImage([[1, 0], [0, 1]])
    assert hyperedge_count(ychg_of(img)) == 2


def test_branch_splits_into_three():
    # a bar in column 0 fanning out into two arms
    img = BinaryImage([
        [1, 1, 1],
        [1, 0, 0],
        [1, 1, 1],
    ])
    g = ychg_of(img)
    assert run_partition(g) == {
        frozenset({Run(0, 0, 2)}),
        frozenset({Run(1, 0, 0), Run(2, 0, 0)}),
        frozenset({Run(1, 2, 2), Run(2, 2, 2)}),
    }


@settings(max_examples=300, deadline=None)
@given(images)
def test_oracle_equivalence(img):
    g = ychg_of(img)
    oracle = oracle_decompose(img)
    assert run_partition(g) == run_partition(oracle)
    assert g == oracle


@settings(max_examples=200, deadline=None)
@given(images)
def test_reconstruction_and_conservation(img):
    g = ychg_of(img)
    assert reconstruct(g) == img
    total, per_edge = areas(g)
    assert total == foreground_count(img) == sum(per_edge)
    assert per_edge == [e.area for e in g.hyperedges]


@settings(max_examples=200, deadline=None)
@given(images)
def test_structural_invariants(img):
    g = ychg_of(img).validate()
    keys = []
    for k, e in enumerate(g.hyperedges):
        assert e.id == k
        assert [r.col for r in e.runs] == list(range(e.col_start, e.col_start + len(e.runs)))
        for a, b in zip(e.runs, e.runs[1:]):
            assert max(a.y_top, b.y_top) <= min(a.y_bot, b.y_bot)
        keys.append((e.col_start, e.runs[0].y_top))
    assert keys == sorted(keys)
    covered = [r for e in g.hyperedges for r in e.runs]
    assert sorted(covered) == sorted(r for col in g.profile.runs for r in col)


@settings(max_examples=200, deadline=None)
@given(images)
def test_boundary_columns_start_or_end_hyperedges(img):
    g = ychg_of(img)
    starts = {e.col_start for e in g.hyperedges}
    ends = {e.col_end for e in g.hyperedges}
    for c in detect_boundary_columns(g.profile.counts):
        # a count drop at c means some hyperedge ended at c - 1
        assert c in starts or (c - 1) in ends


@settings(max_examples=100, deadline=None)
@given(images, st.sampled_from([2, 4, 8]))
def test_decompose_deterministic_across_strategies(img, threads):
    assert to_json(ychg_of(img)) == to_json(ychg_of(img, ScanStrategy.parallel(threads)))


def test_decompose_rejects_invalid_profile():
    with pytest.raises(ValidationError):
        decompose(ColumnProfile(1, 5, [0, 2], [0, 1], [0, 3]))


def test_reconstruct_rejects_out_of_geometry_run():
    g = YCHG(ColumnProfile(1, 2, [0, 1], [0], [2]), [0], 1)
    with pytest.raises(ValidationError):
        reconstruct(g)


# --- JSON ------------------------------------------------------------------

def test_json_roundtrip_frame(frame5):
    g = ychg_of(frame5)
    assert from_json(to_json(g)) == g


def test_json_empty_literal():
    data = b'{"width":3,"height":3,"hyperedges":[]}'
    g = from_json(data)
    assert (g.width, g.height, hyperedge_count(g)) == (3, 3, 0)
    assert to_json(g) == data


@settings(max_examples=100, deadline=None)
@given(images)
def test_json_roundtrip_property(img):
    g = ychg_of(img)
    assert from_json(to_json(g)) == g


def _doc(edges, width=3, height=3):
    return json.dumps({"width": width, "height": height, "hyperedges": edges}).encode()


@pytest.mark.parametrize("data, path", [
    (_doc([{"id": 0, "col_start": 0, "runs": [[2, 1]]}]), "$.hyperedges[0].runs[0]"),
    (_doc([{"id": 0, "col_start": 0, "runs": [[0, 3]]}]), "$.hyperedges[0].runs[0][1]"),
    (_doc([{"id": 1, "col_start": 0, "runs": [[0, 0]]}]), "$.hyperedges[0].id"),
    (_doc([{"id": 0, "col_start": 2, "runs": [[0, 0], [0, 0]]}]), "$.hyperedges[0].runs"),
    (_doc([{"id": 0, "col_start": 0, "runs": [[0, 0], [2, 2]]}]), "$.hyperedges[0].runs[1]"),
    (_doc([{"id": 0, "col_start": 1, "runs": [[0, 0]]},
           {"id": 1, "col_start": 0, "runs": [[0, 0]]}]), "$.hyperedges[1]"),
    (_doc([{"id": 0, "col_start": 0, "runs": [[0, 0]]},
           {"id": 1, "col_start": 0, "runs": [[1, 2]]}]), "$.hyperedges[1].runs[0]"),
    (_doc([{"id": 0, "col_start": 0, "runs": [[0, 1]]},
           {"id": 1, "col_start": 0, "runs": [[1, 2]]}]), "$.hyperedges[1].runs[0]"),
    (_doc([{"id": 0, "col_start": 0, "runs": [[0, 1.5]]}]), "$.hyperedges[0].runs[0][1]"),
    (_doc([], width=-1), "$.width"),
    (_doc([], width=2**40), "$.width"),
    (b'{"width":3,"height":3}', "$"),
    (b"not json", "$"),
])
def test_json_errors_name_path(data, path):
    with pytest.raises(SchemaError) as err:
        from_json(data)
    assert err.value.path == path
