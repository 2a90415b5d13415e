"""
data.py
--------------------
Synthetic group-lasso instances, LIBSVM text ingestion and seeded mini-batch
sampling.

Randomness always comes from numpy's PCG64 bit generator so a given seed
reproduces the same instance and the same batches on every platform.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix

from hspg_ops.errors import DataError, EmptyDatasetError, LibsvmFormatError
from hspg_ops.groups import GroupPartition, GroupSupport, make_equal_partition
from hspg_ops.logging import get_logger
from hspg_ops.problems import LeastSquaresProblem, LogisticProblem
from hspg_ops.regularizer import Parameters

log = get_logger(__name__)

SAMPLING_SCHEME = "shuffled-epoch"
RNG_ALGORITHM = "PCG64"

# =====================================================================
# Synthetic group-lasso instances
# =====================================================================


@dataclass(frozen=True)
class SyntheticInstance:
    """Ground-truth linear regression instance with zero groups in x*."""

    A: np.ndarray
    y: np.ndarray
    x_star: Parameters
    true_zero_groups: frozenset[int]
    partition: GroupPartition
    seed: int | None = None

    @property
    def num_instances(self) -> int:
        return self.A.shape[0]

    @property
    def dimension(self) -> int:
        return self.A.shape[1]

    def problem(self) -> LeastSquaresProblem:
        return LeastSquaresProblem(self.A, self.y)

    def truth_support(self) -> GroupSupport:
        return GroupSupport.from_zero_groups(self.true_zero_groups, self.partition.num_groups)


def num_zero_groups(sparsity_ratio: float, num_groups: int) -> int:
    """round(ratio * num_groups) with halves rounded up."""
    return int(math.floor(sparsity_ratio * num_groups + 0.5))


def gen_synthetic(
    N: int, n: int, num_groups: int, sparsity_ratio: float, seed: int
) -> SyntheticInstance:
    """Generates a group-lasso recovery instance.

    A and x* have iid uniform[-1, 1] entries, ``round(ratio * num_groups)``
    groups of x* chosen uniformly without replacement are zeroed, and
    y = A x*. The draws happen in that order from one PCG64 stream.

    Parameters
    ----------
    N : int
        Number of instances (rows of A).
    n : int
        Number of features.
    num_groups : int
        Number of contiguous near-equal groups.
    sparsity_ratio : float
        Fraction of zero groups in x*, in [0, 1].
    seed : int
        Seed for the generator.

    Returns
    -------
    SyntheticInstance
        The generated instance.

    Raises
    ------
    ValueError
        If the ratio is outside [0, 1] or any dimension is not positive.
    """
    if not 0.0 <= sparsity_ratio <= 1.0:
        raise ValueError(f"sparsity_ratio must lie in [0, 1], got {sparsity_ratio}")
    if N < 1 or n < 1:
        raise ValueError(f"Dimensions must be positive, got N={N}, n={n}")
    partition = make_equal_partition(n, num_groups)

    rng = np.random.Generator(np.random.PCG64(seed))
    A = rng.uniform(-1.0, 1.0, size=(N, n))
    x_star = rng.uniform(-1.0, 1.0, size=n)
    k = num_zero_groups(sparsity_ratio, num_groups)
    zero_groups = np.sort(rng.choice(num_groups, size=k, replace=False)) if k else np.array([], dtype=int)

    x_star[partition.expand(np.isin(np.arange(num_groups), zero_groups))] = 0.0
    y = A @ x_star

    return SyntheticInstance(
        A=A,
        y=y,
        x_star=Parameters(x_star),
        true_zero_groups=frozenset(int(g) for g in zero_groups),
        partition=partition,
        seed=seed,
    )


def export_synthetic(instance: SyntheticInstance, path: str | Path) -> Path:
    """Writes a flat binary dump of a synthetic instance.

    The file starts with one ASCII header line ``N n num_groups zero_ids``
    (zero ids comma separated, ``-`` when there are none) followed by
    row-major little-endian float64 A, y and x*.
    """
    path = Path(path)
    ids = ",".join(str(g) for g in sorted(instance.true_zero_groups)) or "-"
    header = f"{instance.num_instances} {instance.dimension} {instance.partition.num_groups} {ids}\n"

    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for block in (instance.A, instance.y, instance.x_star.x):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())

    log.info(f"Wrote synthetic instance ({instance.num_instances}x{instance.dimension}) to {path}")
    return path


def load_synthetic(path: str | Path) -> SyntheticInstance:
    """Reads a dump written by `export_synthetic`.

    Raises
    ------
    DataError
        If the header is malformed or the payload size does not match it.
    """
    path = Path(path)
    raw = path.read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise DataError(f"{path}: missing header line")

    fields = raw[:newline].decode("ascii").split()
    if len(fields) != 4:
        raise DataError(f"{path}: header must read 'N n num_groups zero_ids', got {fields}")
    try:
        N, n, num_groups = (int(v) for v in fields[:3])
        zero_ids = [] if fields[3] == "-" else [int(v) for v in fields[3].split(",")]
    except ValueError as e:
        raise DataError(f"{path}: malformed header: {e}") from e

    payload = np.frombuffer(raw, dtype="<f8", offset=newline + 1)
    expected = N * n + N + n
    if payload.size != expected:
        raise DataError(f"{path}: expected {expected} float64 values, found {payload.size}")

    A = payload[: N * n].reshape(N, n).astype(np.float64)
    y = payload[N * n : N * n + N].astype(np.float64)
    x_star = payload[N * n + N :].astype(np.float64)
    return SyntheticInstance(
        A=A,
        y=y,
        x_star=Parameters(x_star),
        true_zero_groups=frozenset(zero_ids),
        partition=make_equal_partition(n, num_groups),
    )


def gen_synthetic_logistic(N: int, n: int, density: float, seed: int, has_bias: bool = True) -> LogisticProblem:
    """Random sparse logistic problem, used where no LIBSVM file is at hand.

    Features are uniform[-1, 1] at the given density; labels are the signs of
    a random linear score plus logistic noise.
    """
    if N < 1 or n < 1:
        raise ValueError(f"Dimensions must be positive, got N={N}, n={n}")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")

    rng = np.random.Generator(np.random.PCG64(seed))
    mask = rng.random((N, n)) < density
    D = np.where(mask, rng.uniform(-1.0, 1.0, size=(N, n)), 0.0)
    w = rng.normal(size=n)
    score = D @ w + rng.logistic(size=N)
    labels = np.where(score > 0, 1.0, -1.0)
    return LogisticProblem(csr_matrix(D), labels, has_bias=has_bias)


# =====================================================================
# LIBSVM format
# =====================================================================


def _parse_line(line_number: int, tokens: list[str]) -> tuple[float, list[int], list[float]]:
    try:
        label = float(tokens[0])
    except ValueError:
        raise LibsvmFormatError(line_number, f"label {tokens[0]!r} is not a number") from None

    cols: list[int] = []
    vals: list[float] = []
    previous = 0
    for token in tokens[1:]:
        idx_str, sep, val_str = token.partition(":")
        if not sep:
            raise LibsvmFormatError(line_number, f"malformed token {token!r}, expected idx:val")
        try:
            idx = int(idx_str)
            val = float(val_str)
        except ValueError:
            raise LibsvmFormatError(line_number, f"malformed token {token!r}") from None
        if idx < 1:
            raise LibsvmFormatError(line_number, f"feature index {idx} is below 1")
        if idx <= previous:
            raise LibsvmFormatError(
                line_number, f"feature index {idx} does not increase (previous {previous})"
            )
        previous = idx
        cols.append(idx - 1)
        vals.append(val)
    return label, cols, vals


def parse_libsvm(
    lines: Iterable[str | bytes], n_features: int | None = None, has_bias: bool = True
) -> LogisticProblem:
    """Parses LIBSVM text lines into a logistic problem.

    Labels greater than zero map to +1 and everything else to -1, which covers
    both the {-1, +1} and the {0, 1} labelings.

    Parameters
    ----------
    lines : Iterable[str | bytes]
        Lines of ``<label> <idx>:<val> ...`` with 1-based increasing indices.
        Blank lines are skipped. Byte lines must be UTF-8.
    n_features : int | None, optional
        Dimension to use when larger than the largest index seen, by default
        the largest index.
    has_bias : bool, optional
        Whether the problem optimizes an intercept, by default True.

    Returns
    -------
    LogisticProblem
        The parsed problem with CSR features.

    Raises
    ------
    LibsvmFormatError
        On a malformed or undecodable line (the message carries the line number).
    EmptyDatasetError
        If no instance was found.
    DataError
        If n_features is smaller than the largest index seen.
    """
    labels: list[float] = []
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []

    for line_number, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as e:
                raise LibsvmFormatError(line_number, f"invalid UTF-8 at byte {e.start}") from None
        tokens = line.split()
        if not tokens:
            continue
        label, cols, vals = _parse_line(line_number, tokens)
        labels.append(1.0 if label > 0 else -1.0)
        indices.extend(cols)
        data.extend(vals)
        indptr.append(len(indices))

    if not labels:
        raise EmptyDatasetError("no instances")

    max_index = max(indices) + 1 if indices else 0
    n = max_index if n_features is None else n_features
    if n < max_index:
        raise DataError(f"n_features={n_features} is smaller than the largest feature index {max_index}")
    if n == 0:
        raise DataError("no feature values in dataset")

    D = csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), n),
    )
    return LogisticProblem(D, np.asarray(labels), has_bias=has_bias)


def load_libsvm(path: str | Path, n_features: int | None = None, has_bias: bool = True) -> LogisticProblem:
    """Streams a LIBSVM file from disk and logs its class balance."""
    path = Path(path)
    with open(path, "rb") as fh:
        problem = parse_libsvm(fh, n_features=n_features, has_bias=has_bias)

    positives, negatives = problem.label_counts()
    log.info(
        f"[{path.name}] Loaded N={problem.num_instances}, n={problem.dimension} "
        f"({positives} positive / {negatives} negative)"
    )
    return problem


def serialize_libsvm(problem: LogisticProblem) -> Iterator[str]:
    """Yields LIBSVM lines for a logistic problem (inverse of `parse_libsvm`).

    Values use the shortest repr that round-trips to the same float64.
    """
    D = problem.D
    for i in range(problem.num_instances):
        start, stop = D.indptr[i], D.indptr[i + 1]
        label = "+1" if problem.labels[i] > 0 else "-1"
        features = " ".join(
            f"{int(j) + 1}:{float(v)!r}" for j, v in zip(D.indices[start:stop], D.data[start:stop])
        )
        yield f"{label} {features}".rstrip() + "\n"


# =====================================================================
# Mini-batch sampling
# =====================================================================


@dataclass(frozen=True)
class BatchSchedule:
    """Shuffled-epoch sampling: each epoch is a fresh permutation of 0..N-1
    cut into consecutive batches (the last one may be short)."""

    num_instances: int
    batch_size: int
    seed: int
    scheme: str = SAMPLING_SCHEME

    def __post_init__(self):
        if self.num_instances < 1:
            raise ValueError(f"num_instances must be positive, got {self.num_instances}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.scheme != SAMPLING_SCHEME:
            raise ValueError(f"Unsupported sampling scheme {self.scheme!r}")

    @property
    def batches_per_epoch(self) -> int:
        return math.ceil(self.num_instances / self.batch_size)

    def resized(self, batch_size: int) -> "BatchSchedule":
        return BatchSchedule(self.num_instances, batch_size, self.seed, self.scheme)


@lru_cache(maxsize=8)
def _epoch_permutation(num_instances: int, seed: int, epoch: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, epoch])))
    perm = rng.permutation(num_instances)
    perm.flags.writeable = False
    return perm


def next_batch(schedule: BatchSchedule, epoch: int, step: int) -> np.ndarray:
    """Indices of batch `step` of epoch `epoch`, sorted ascending.

    A pure function of (seed, epoch, step): the epoch permutation is drawn
    from PCG64 seeded with the pair (seed, epoch).

    Raises
    ------
    ValueError
        If the epoch is negative or the step is outside the epoch.
    """
    if epoch < 0:
        raise ValueError(f"epoch must be nonnegative, got {epoch}")
    if not 0 <= step < schedule.batches_per_epoch:
        raise ValueError(f"step {step} outside 0..{schedule.batches_per_epoch - 1}")
    perm = _epoch_permutation(schedule.num_instances, schedule.seed, epoch)
    start = step * schedule.batch_size
    return np.sort(perm[start : start + schedule.batch_size])


def batch_stream(schedule: BatchSchedule, start_epoch: int = 0) -> Iterator[tuple[int, int, np.ndarray]]:
    """Endless (epoch, step, batch) stream following `next_batch`."""
    epoch = start_epoch
    while True:
        for step in range(schedule.batches_per_epoch):
            yield epoch, step, next_batch(schedule, epoch, step)
        epoch += 1
