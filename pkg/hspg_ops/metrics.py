"""
metrics.py
--------------------
Sparsity and recovery metrics, per-epoch run traces and the magnitude
truncation used for the starred (truncated) baseline rows.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from hspg_ops.groups import GroupPartition, GroupSupport, nonzero_group_mask
from hspg_ops.regularizer import Parameters

TRACE_COLUMNS = ("epoch", "stage", "psi", "f", "group_sparsity", "grad_map_norm", "wall_seconds")

# =====================================================================
# Metrics
# =====================================================================


def group_sparsity_ratio(x: Parameters, partition: GroupPartition) -> float:
    """Fraction of groups whose coordinates are all exactly zero."""
    nonzero = nonzero_group_mask(x, partition)
    return float(np.count_nonzero(~nonzero)) / partition.num_groups


def iou_zero_groups(estimate: GroupSupport, truth: GroupSupport) -> float:
    """Intersection over union of two zero-group sets.

    Two empty sets agree perfectly and score 1.0.

    Raises
    ------
    ValueError
        If the supports were taken over different group universes.
    """
    if estimate.universe != truth.universe:
        raise ValueError(
            f"Supports cover different groups ({len(estimate.universe)} vs {len(truth.universe)})"
        )
    union = estimate.zero_groups | truth.zero_groups
    if not union:
        return 1.0
    return len(estimate.zero_groups & truth.zero_groups) / len(union)


def truncate_by_magnitude(x: Parameters, partition: GroupPartition, threshold: float) -> Parameters:
    """Zeroes every group whose norm is strictly below `threshold`.

    Raises
    ------
    ValueError
        If the threshold is negative.
    """
    if threshold < 0:
        raise ValueError(f"Truncation threshold must be nonnegative, got {threshold}")
    partition.check_dimension(x.x)
    keep = partition.group_norms(x.x) >= threshold
    return Parameters(np.where(partition.expand(keep), x.x, 0.0), x.bias)


# =====================================================================
# Traces
# =====================================================================


@dataclass(frozen=True)
class TraceRecord:
    epoch: int
    stage: str
    psi: float
    f: float
    group_sparsity: float
    grad_map_norm: float
    wall_seconds: float = math.nan


def _json_float(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class RunTrace:
    """Per-epoch records of one solver run plus its metadata.

    `metadata` echoes the resolved configuration, the seed, the dataset id and
    the solver kind so a trace file is self-describing.
    """

    metadata: dict = field(default_factory=dict)
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError(
                f"Trace epochs must increase strictly: {record.epoch} after {self.records[-1].epoch}"
            )
        self.records.append(record)

    @property
    def final(self) -> TraceRecord:
        if not self.records:
            raise ValueError("Trace has no records")
        return self.records[-1]

    def psi_values(self) -> list[float]:
        return [r.psi for r in self.records]

    def to_frame(self) -> pd.DataFrame:
        rows = [asdict(r) for r in self.records]
        return pd.DataFrame(rows, columns=list(TRACE_COLUMNS))

    def to_csv(self, path: str | Path) -> Path:
        """One row per epoch in the fixed column order; NaN wall time is an empty field."""
        path = Path(path)
        self.to_frame().to_csv(path, index=False, na_rep="", float_format="%.17g")
        return path

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "records": [{k: _json_float(v) for k, v in asdict(r).items()} for r in self.records],
        }

    def to_json(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        return path

    @classmethod
    def from_dict(cls, doc: dict) -> "RunTrace":
        names = {f.name for f in fields(TraceRecord)}
        trace = cls(metadata=dict(doc.get("metadata", {})))
        for raw in doc.get("records", []):
            values = {k: (math.nan if v is None else v) for k, v in raw.items() if k in names}
            trace.append(TraceRecord(**values))
        return trace

    @classmethod
    def from_json(cls, path: str | Path) -> "RunTrace":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
