"""
groups.py
--------------------
The fixed disjoint group partition of the regularized coordinates and the
zero / nonzero group index sets of an iterate.

Groups are contiguous coordinate ranges, so every per-group reduction is a
single `np.add.reduceat` over the group start offsets.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from hspg_ops.regularizer import Parameters

# =====================================================================
# Partition
# =====================================================================


@dataclass(frozen=True)
class GroupPartition:
    """Contiguous, disjoint partition of the coordinates 0..n-1.

    Parameters
    ----------
    group_offsets : tuple[tuple[int, int], ...]
        (start, length) per group, in coordinate order.
    n : int
        Total regularized dimension.
    """

    group_offsets: tuple[tuple[int, int], ...]
    n: int
    _starts: np.ndarray = field(init=False, repr=False, compare=False)
    _lengths: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        offsets = tuple((int(s), int(ln)) for s, ln in self.group_offsets)
        object.__setattr__(self, "group_offsets", offsets)

        if self.n < 1:
            raise ValueError(f"Partition dimension must be positive, got n={self.n}")
        if not offsets:
            raise ValueError("Partition needs at least one group")

        cursor = 0
        for g, (start, length) in enumerate(offsets):
            if length < 1:
                raise ValueError(f"Group {g} is empty")
            if start != cursor:
                raise ValueError(
                    f"Group {g} starts at {start}, expected {cursor} (groups must be contiguous and disjoint)"
                )
            cursor += length
        if cursor != self.n:
            raise ValueError(f"Groups cover {cursor} coordinates, expected n={self.n}")

        starts = np.array([s for s, _ in offsets], dtype=np.intp)
        lengths = np.array([ln for _, ln in offsets], dtype=np.intp)
        starts.flags.writeable = False
        lengths.flags.writeable = False
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_lengths", lengths)

    @property
    def num_groups(self) -> int:
        return len(self.group_offsets)

    @property
    def starts(self) -> np.ndarray:
        return self._starts

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @cached_property
    def group_ids(self) -> np.ndarray:
        """Group id of every coordinate."""
        return np.repeat(np.arange(self.num_groups), self._lengths)

    def group_slice(self, g: int) -> slice:
        start, length = self.group_offsets[g]
        return slice(start, start + length)

    def group_sums(self, values: np.ndarray) -> np.ndarray:
        """Per-group sums of a length-n vector."""
        return np.add.reduceat(values, self._starts)

    def group_norms(self, x: np.ndarray) -> np.ndarray:
        """Per-group Euclidean norms of a length-n vector."""
        return np.sqrt(self.group_sums(x * x))

    def expand(self, per_group: np.ndarray) -> np.ndarray:
        """Broadcasts one value per group back to length n."""
        return np.repeat(per_group, self._lengths)

    def check_dimension(self, x: np.ndarray):
        if x.ndim != 1 or x.shape[0] != self.n:
            raise ValueError(
                f"Dimension mismatch: vector has shape {x.shape}, partition expects ({self.n},)"
            )


def make_equal_partition(n: int, num_groups: int) -> GroupPartition:
    """Splits 0..n-1 into `num_groups` contiguous groups of near-equal size.

    The first ``n mod num_groups`` groups get one extra coordinate.

    Parameters
    ----------
    n : int
        Regularized dimension.
    num_groups : int
        Number of groups.

    Returns
    -------
    GroupPartition
        The contiguous partition.

    Raises
    ------
    ValueError
        If either input is not positive or num_groups exceeds n.
    """
    if n < 1 or num_groups < 1:
        raise ValueError(f"n and num_groups must be positive, got n={n}, num_groups={num_groups}")
    if num_groups > n:
        raise ValueError(f"Cannot split n={n} coordinates into {num_groups} nonempty groups")

    base, extra = divmod(n, num_groups)
    offsets = []
    start = 0
    for g in range(num_groups):
        length = base + (1 if g < extra else 0)
        offsets.append((start, length))
        start += length
    return GroupPartition(group_offsets=tuple(offsets), n=n)


# =====================================================================
# Support
# =====================================================================


@dataclass(frozen=True)
class GroupSupport:
    """Zero and nonzero group ids of an iterate."""

    zero_groups: frozenset[int]
    nonzero_groups: frozenset[int]

    def __post_init__(self):
        if self.zero_groups & self.nonzero_groups:
            raise ValueError("zero_groups and nonzero_groups must be disjoint")

    @property
    def universe(self) -> frozenset[int]:
        return self.zero_groups | self.nonzero_groups

    @classmethod
    def from_zero_groups(cls, zero_groups, num_groups: int) -> "GroupSupport":
        zeros = frozenset(int(g) for g in zero_groups)
        if any(g < 0 or g >= num_groups for g in zeros):
            raise ValueError(f"Zero group ids {sorted(zeros)} outside 0..{num_groups - 1}")
        return cls(zero_groups=zeros, nonzero_groups=frozenset(range(num_groups)) - zeros)


def _coordinates(x: "Parameters | np.ndarray") -> np.ndarray:
    return np.asarray(getattr(x, "x", x), dtype=np.float64)


def nonzero_group_mask(x: "Parameters | np.ndarray", partition: GroupPartition) -> np.ndarray:
    """Boolean mask over groups, True where some coordinate is not exactly 0.0."""
    coords = _coordinates(x)
    partition.check_dimension(coords)
    return np.logical_or.reduceat(coords != 0.0, partition.starts)


def support_of(x: "Parameters | np.ndarray", partition: GroupPartition) -> GroupSupport:
    """Splits the group ids into exact-zero groups and nonzero groups.

    A group is zero only when every coordinate equals 0.0; there is no
    tolerance.

    Parameters
    ----------
    x : Parameters | np.ndarray
        Iterate (the bias, if any, is ignored).
    partition : GroupPartition
        The group partition.

    Returns
    -------
    GroupSupport
        The zero / nonzero split.

    Raises
    ------
    ValueError
        If the dimension of x does not match the partition.
    """
    nonzero = nonzero_group_mask(x, partition)
    ids = np.arange(partition.num_groups)
    return GroupSupport(
        zero_groups=frozenset(ids[~nonzero].tolist()),
        nonzero_groups=frozenset(ids[nonzero].tolist()),
    )
