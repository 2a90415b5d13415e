import numpy as np
import pytest

from hspg_ops.data import (
    BatchSchedule,
    batch_stream,
    export_synthetic,
    gen_synthetic,
    load_libsvm,
    load_synthetic,
    next_batch,
    num_zero_groups,
    parse_libsvm,
    serialize_libsvm,
)
from hspg_ops.errors import DataError, EmptyDatasetError, LibsvmFormatError
from hspg_ops.groups import support_of

# =====================================================================
# Synthetic instances
# =====================================================================


def test_synthetic_instance_is_seed_deterministic():
    a = gen_synthetic(50, 10, 5, 0.4, seed=7)
    b = gen_synthetic(50, 10, 5, 0.4, seed=7)
    c = gen_synthetic(50, 10, 5, 0.4, seed=8)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.x_star.x, b.x_star.x)
    assert a.true_zero_groups == b.true_zero_groups
    assert not np.array_equal(a.A, c.A)


def test_synthetic_truth_matches_zero_groups():
    instance = gen_synthetic(100, 40, 10, 0.3, seed=1)
    assert len(instance.true_zero_groups) == 3
    assert support_of(instance.x_star, instance.partition).zero_groups == instance.true_zero_groups
    np.testing.assert_allclose(instance.y, instance.A @ instance.x_star.x)
    assert np.all(np.abs(instance.A) <= 1.0)


@pytest.mark.parametrize("ratio, expected", [(0.0, 0), (0.25, 3), (0.5, 5), (1.0, 10)])
def test_zero_group_count_rounds_half_up(ratio, expected):
    assert num_zero_groups(ratio, 10) == expected


def test_synthetic_rejects_ratio_outside_unit_interval():
    with pytest.raises(ValueError, match="sparsity_ratio"):
        gen_synthetic(10, 10, 2, 1.5, seed=0)


def test_synthetic_dump_round_trip(tmp_path):
    instance = gen_synthetic(30, 8, 4, 0.5, seed=2)
    path = export_synthetic(instance, tmp_path / "inst.bin")
    loaded = load_synthetic(path)
    np.testing.assert_array_equal(loaded.A, instance.A)
    np.testing.assert_array_equal(loaded.y, instance.y)
    np.testing.assert_array_equal(loaded.x_star.x, instance.x_star.x)
    assert loaded.true_zero_groups == instance.true_zero_groups


def test_truncated_synthetic_dump_is_rejected(tmp_path):
    instance = gen_synthetic(30, 8, 4, 0.5, seed=2)
    path = export_synthetic(instance, tmp_path / "inst.bin")
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(DataError, match="expected"):
        load_synthetic(path)


# =====================================================================
# LIBSVM
# =====================================================================


def test_parse_libsvm_lines():
    problem = parse_libsvm(["+1 1:0.5 3:1\n", "-1 2:2\n", "\n", "0 1:1\n"])
    assert problem.num_instances == 3
    assert problem.dimension == 3
    np.testing.assert_array_equal(problem.labels, [1.0, -1.0, -1.0])
    np.testing.assert_array_equal(problem.D.toarray(), [[0.5, 0.0, 1.0], [0.0, 2.0, 0.0], [1.0, 0.0, 0.0]])
    assert problem.has_bias


def test_parse_libsvm_pads_to_requested_dimension():
    assert parse_libsvm(["1 2:1"], n_features=123).dimension == 123
    with pytest.raises(DataError, match="smaller"):
        parse_libsvm(["1 5:1"], n_features=3)


@pytest.mark.parametrize(
    "line",
    ["+1 1:0.5 2-3", "+1 3:1 2:1", "+1 0:1", "+1 1:abc", "yes 1:1"],
)
def test_malformed_libsvm_lines_carry_line_number(line):
    with pytest.raises(LibsvmFormatError) as info:
        parse_libsvm(["-1 1:1", line])
    assert info.value.line_number == 2
    assert "line 2" in str(info.value)


def test_empty_libsvm_input():
    with pytest.raises(EmptyDatasetError, match="no instances"):
        parse_libsvm(["\n", "   \n"])


def test_libsvm_file_round_trip(libsvm_file, small_logistic):
    loaded = load_libsvm(libsvm_file)
    np.testing.assert_array_equal(loaded.labels, small_logistic.labels)
    assert loaded.num_instances == small_logistic.num_instances
    # trailing all-zero columns are not visible in the text format
    width = loaded.dimension
    np.testing.assert_array_equal(loaded.D.toarray(), small_logistic.D.toarray()[:, :width])
    assert "".join(serialize_libsvm(loaded)) == libsvm_file.read_text(encoding="utf-8")


def test_empty_libsvm_file(tmp_path):
    path = tmp_path / "empty.libsvm"
    path.write_text("", encoding="utf-8")
    with pytest.raises(EmptyDatasetError, match="no instances"):
        load_libsvm(path)


def test_undecodable_libsvm_file_reports_the_line(tmp_path):
    path = tmp_path / "latin1.libsvm"
    path.write_bytes(b"+1 1:0.5\n-1 2:\xff\n")
    with pytest.raises(LibsvmFormatError, match="line 2") as excinfo:
        load_libsvm(path)
    assert excinfo.value.line_number == 2


def test_parse_libsvm_accepts_byte_lines():
    problem = parse_libsvm([b"+1 1:0.5 3:1\r\n", b"0 2:2\n"])
    np.testing.assert_array_equal(problem.labels, [1.0, -1.0])
    assert problem.dimension == 3


# =====================================================================
# Sampling
# =====================================================================


def test_epoch_batches_partition_the_instances():
    schedule = BatchSchedule(num_instances=10, batch_size=4, seed=3)
    assert schedule.batches_per_epoch == 3
    batches = [next_batch(schedule, 0, step) for step in range(3)]
    assert [len(b) for b in batches] == [4, 4, 2]
    for b in batches:
        assert np.all(np.diff(b) > 0)
    np.testing.assert_array_equal(np.sort(np.concatenate(batches)), np.arange(10))


def test_batches_are_pure_functions_of_seed_epoch_and_step():
    schedule = BatchSchedule(num_instances=1000, batch_size=32, seed=5)
    np.testing.assert_array_equal(next_batch(schedule, 4, 7), next_batch(schedule, 4, 7))
    assert not np.array_equal(next_batch(schedule, 0, 0), next_batch(schedule, 1, 0))
    other = BatchSchedule(num_instances=1000, batch_size=32, seed=6)
    assert not np.array_equal(next_batch(schedule, 0, 0), next_batch(other, 0, 0))


def test_batch_stream_follows_next_batch():
    schedule = BatchSchedule(num_instances=5, batch_size=2, seed=0)
    stream = batch_stream(schedule)
    seen = [next(stream) for _ in range(7)]
    assert [(e, s) for e, s, _ in seen] == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0)]
    np.testing.assert_array_equal(seen[4][2], next_batch(schedule, 1, 1))


def test_next_batch_rejects_out_of_range_step():
    schedule = BatchSchedule(num_instances=5, batch_size=2, seed=0)
    with pytest.raises(ValueError):
        next_batch(schedule, 0, 3)
    with pytest.raises(ValueError):
        next_batch(schedule, -1, 0)
