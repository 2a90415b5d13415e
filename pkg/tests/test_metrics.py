import math

import numpy as np
import pandas as pd
import pytest

from hspg_ops.groups import GroupSupport, make_equal_partition
from hspg_ops.metrics import (
    TRACE_COLUMNS,
    RunTrace,
    TraceRecord,
    group_sparsity_ratio,
    iou_zero_groups,
    truncate_by_magnitude,
)
from hspg_ops.regularizer import Parameters


def test_group_sparsity_ratio():
    partition = make_equal_partition(8, 4)
    x = Parameters(np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -2.0]))
    assert group_sparsity_ratio(x, partition) == pytest.approx(0.5)


def test_iou_of_zero_groups():
    truth = GroupSupport.from_zero_groups({1, 2}, 5)
    estimate = GroupSupport.from_zero_groups({2, 3}, 5)
    assert iou_zero_groups(estimate, truth) == pytest.approx(1 / 3)
    assert iou_zero_groups(truth, truth) == 1.0


def test_iou_of_two_empty_sets_is_one():
    empty = GroupSupport.from_zero_groups(set(), 3)
    assert iou_zero_groups(empty, empty) == 1.0


def test_iou_needs_the_same_universe():
    with pytest.raises(ValueError, match="different groups"):
        iou_zero_groups(GroupSupport.from_zero_groups({0}, 3), GroupSupport.from_zero_groups({0}, 4))


def test_truncation_keeps_groups_at_the_threshold():
    partition = make_equal_partition(6, 3)
    x = Parameters(np.array([0.3, 0.4, 0.01, 0.0, 2.0, 0.0]), bias=1.0)
    out = truncate_by_magnitude(x, partition, 0.5)
    np.testing.assert_array_equal(out.x, [0.3, 0.4, 0.0, 0.0, 2.0, 0.0])
    assert out.bias == 1.0
    with pytest.raises(ValueError):
        truncate_by_magnitude(x, partition, -1.0)


def _trace(wall=math.nan) -> RunTrace:
    trace = RunTrace(metadata={"solver_kind": "hspg", "seed": 0})
    trace.append(TraceRecord(0, "initialization", 2.0, 2.0, 0.0, 1.5, wall))
    trace.append(TraceRecord(1, "group_sparsity", 1.25, 1.0, 0.5, 0.1, wall))
    return trace


def test_trace_epochs_must_increase():
    trace = _trace()
    with pytest.raises(ValueError, match="increase"):
        trace.append(TraceRecord(1, "group_sparsity", 1.0, 1.0, 0.5, 0.1))
    assert trace.final.epoch == 1
    assert trace.psi_values() == [2.0, 1.25]


def test_trace_csv_has_fixed_columns_and_empty_wall_time(tmp_path):
    path = _trace().to_csv(tmp_path / "trace.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert lines[1].endswith(",")
    frame = pd.read_csv(path)
    assert frame["wall_seconds"].isna().all()
    assert list(frame["stage"]) == ["initialization", "group_sparsity"]


def test_trace_json_maps_nan_to_null(tmp_path):
    trace = _trace()
    doc = trace.to_dict()
    assert doc["records"][0]["wall_seconds"] is None

    loaded = RunTrace.from_json(trace.to_json(tmp_path / "trace.json"))
    assert loaded.metadata == trace.metadata
    assert math.isnan(loaded.final.wall_seconds)
    assert loaded.psi_values() == trace.psi_values()


def test_truncation_sparsity_grows_with_the_threshold(rng):
    partition = make_equal_partition(40, 10)
    x = Parameters(rng.normal(scale=0.5, size=40))
    ratios = [
        group_sparsity_ratio(truncate_by_magnitude(x, partition, t), partition)
        for t in np.linspace(0.0, 3.0, 31)
    ]
    assert ratios[0] == 0.0
    assert ratios[-1] == 1.0
    assert all(a <= b for a, b in zip(ratios, ratios[1:]))


def test_iou_is_symmetric(rng):
    for _ in range(20):
        a = GroupSupport.from_zero_groups(set(np.flatnonzero(rng.random(8) < 0.5).tolist()), 8)
        b = GroupSupport.from_zero_groups(set(np.flatnonzero(rng.random(8) < 0.5).tolist()), 8)
        assert iou_zero_groups(a, b) == iou_zero_groups(b, a)
