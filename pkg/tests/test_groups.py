import numpy as np
import pytest

from hspg_ops.groups import GroupPartition, GroupSupport, make_equal_partition, support_of
from hspg_ops.regularizer import Parameters


def test_equal_partition_gives_extra_coordinates_to_leading_groups():
    partition = make_equal_partition(10, 3)
    assert partition.group_offsets == ((0, 4), (4, 3), (7, 3))
    assert partition.num_groups == 3
    np.testing.assert_array_equal(partition.group_ids, [0, 0, 0, 0, 1, 1, 1, 2, 2, 2])


@pytest.mark.parametrize("n, groups", [(3, 4), (0, 1), (5, 0)])
def test_equal_partition_rejects_impossible_splits(n, groups):
    with pytest.raises(ValueError):
        make_equal_partition(n, groups)


def test_partition_must_be_contiguous_and_cover_n():
    with pytest.raises(ValueError, match="contiguous"):
        GroupPartition(((0, 2), (3, 2)), 5)
    with pytest.raises(ValueError, match="cover"):
        GroupPartition(((0, 2), (2, 2)), 5)
    with pytest.raises(ValueError, match="empty"):
        GroupPartition(((0, 2), (2, 0)), 2)


def test_group_norms_and_expand():
    partition = make_equal_partition(4, 2)
    np.testing.assert_allclose(partition.group_norms(np.array([3.0, 4.0, 0.0, 2.0])), [5.0, 2.0])
    np.testing.assert_array_equal(partition.expand(np.array([1, 7])), [1, 1, 7, 7])


def test_support_uses_exact_zero_test():
    partition = make_equal_partition(6, 3)
    x = Parameters(np.array([0.0, 0.0, 1e-300, 0.0, -0.0, 0.0]))
    support = support_of(x, partition)
    assert support.zero_groups == frozenset({0, 2})
    assert support.nonzero_groups == frozenset({1})


def test_support_ignores_bias():
    partition = make_equal_partition(2, 1)
    support = support_of(Parameters(np.zeros(2), bias=3.0), partition)
    assert support.zero_groups == frozenset({0})


def test_support_dimension_mismatch():
    with pytest.raises(ValueError, match="Dimension mismatch"):
        support_of(Parameters(np.zeros(5)), make_equal_partition(4, 2))


def test_support_from_zero_groups():
    support = GroupSupport.from_zero_groups([0, 3], 4)
    assert support.nonzero_groups == frozenset({1, 2})
    with pytest.raises(ValueError):
        GroupSupport.from_zero_groups([4], 4)


def test_support_is_invariant_under_permutation_within_groups(rng):
    partition = make_equal_partition(12, 4)
    x = rng.normal(size=12)
    x[3:6] = 0.0
    x[9] = 0.0
    permuted = x.copy()
    for g in range(partition.num_groups):
        sl = partition.group_slice(g)
        permuted[sl] = rng.permutation(x[sl])
    assert support_of(Parameters(permuted), partition) == support_of(Parameters(x), partition)
