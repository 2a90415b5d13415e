"""
regularizer.py
--------------------
The mixed l1/l2 penalty Omega and the group operators built on it: the
group soft-threshold (proximal mapping), the half-space projection and the
gradient mapping used as a stationarity measure.

Every operator writes literal 0.0 into groups it removes, which is what lets
`groups.support_of` test zero groups exactly.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hspg_ops.groups import GroupPartition

# =====================================================================
# Parameters
# =====================================================================


@dataclass(frozen=True)
class Parameters:
    """Dense iterate x over the regularized coordinates, plus an optional
    unregularized bias."""

    x: np.ndarray
    bias: float | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError(f"Parameters.x must be one-dimensional, got shape {x.shape}")
        object.__setattr__(self, "x", x)
        if self.bias is not None:
            object.__setattr__(self, "bias", float(self.bias))

    @classmethod
    def zeros(cls, n: int, has_bias: bool = False) -> "Parameters":
        return cls(np.zeros(n), 0.0 if has_bias else None)

    @property
    def has_bias(self) -> bool:
        return self.bias is not None

    def copy(self) -> "Parameters":
        return Parameters(self.x.copy(), self.bias)

    def with_x(self, x: np.ndarray) -> "Parameters":
        return Parameters(x, self.bias)

    def distance(self, other: "Parameters") -> float:
        """Euclidean distance over x and, when both carry one, the bias."""
        sq = float(np.dot(self.x - other.x, self.x - other.x))
        if self.bias is not None and other.bias is not None:
            sq += (self.bias - other.bias) ** 2
        return float(np.sqrt(sq))

    def norm(self) -> float:
        sq = float(np.dot(self.x, self.x))
        if self.bias is not None:
            sq += self.bias**2
        return float(np.sqrt(sq))


def _check(params: Parameters, partition: GroupPartition):
    partition.check_dimension(params.x)


# =====================================================================
# Penalty
# =====================================================================


def omega(x: Parameters, partition: GroupPartition) -> float:
    """Sum of the group Euclidean norms; the bias is excluded."""
    _check(x, partition)
    return float(np.sum(partition.group_norms(x.x)))


def grad_omega_on_support(x: Parameters, partition: GroupPartition) -> Parameters:
    """Per-group unit vectors [x]_g / ||[x]_g||, exact zero on zero groups.

    The bias component of the result is 0.0 when x carries a bias.
    """
    _check(x, partition)
    norms = partition.group_norms(x.x)
    nonzero = norms > 0.0
    safe = np.where(nonzero, norms, 1.0)
    out = np.where(partition.expand(nonzero), x.x / partition.expand(safe), 0.0)
    return Parameters(out, 0.0 if x.has_bias else None)


# =====================================================================
# Operators
# =====================================================================


def prox_group_l2(x_hat: Parameters, partition: GroupPartition, threshold: float) -> Parameters:
    """Group soft-threshold: the proximal mapping of threshold * Omega.

    Per group the output is max{0, 1 - threshold / ||[x_hat]_g||} * [x_hat]_g.
    Groups with norm at or below the threshold (including zero groups) become
    exact zeros. The bias passes through unchanged.

    Parameters
    ----------
    x_hat : Parameters
        Trial point.
    partition : GroupPartition
        The group partition.
    threshold : float
        Step size times regularization weight, nonnegative.

    Returns
    -------
    Parameters
        The thresholded point.

    Raises
    ------
    ValueError
        If the threshold is negative or dimensions mismatch.
    """
    if threshold < 0:
        raise ValueError(f"Proximal threshold must be nonnegative, got {threshold}")
    _check(x_hat, partition)

    norms = partition.group_norms(x_hat.x)
    keep = norms > threshold
    safe = np.where(keep, norms, 1.0)
    factor = np.where(keep, 1.0 - threshold / safe, 0.0)
    out = np.where(partition.expand(keep), x_hat.x * partition.expand(factor), 0.0)
    return Parameters(out, x_hat.bias)


def half_space_project(
    z: Parameters, x_ref: Parameters, partition: GroupPartition, epsilon: float
) -> Parameters:
    """Half-space projection anchored at the reference iterate.

    Group g of z is kept when [z]_g . [x_ref]_g >= epsilon * ||[x_ref]_g||^2 and
    set to exact zero otherwise. Ties keep the group. Groups where x_ref is zero
    satisfy the test trivially and pass through, so callers that need them
    fixed at zero must zero them in z first. The bias of z passes through.

    Parameters
    ----------
    z : Parameters
        Trial point.
    x_ref : Parameters
        Current iterate defining the half-spaces.
    partition : GroupPartition
        The group partition.
    epsilon : float
        Aggressiveness in [0, 1).

    Returns
    -------
    Parameters
        The projected point.

    Raises
    ------
    ValueError
        If epsilon is outside [0, 1) or dimensions mismatch.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    _check(z, partition)
    _check(x_ref, partition)

    inner = partition.group_sums(z.x * x_ref.x)
    ref_sq = partition.group_sums(x_ref.x * x_ref.x)
    keep = inner >= epsilon * ref_sq
    out = np.where(partition.expand(keep), z.x, 0.0)
    return Parameters(out, z.bias)


def gradient_mapping(
    x: Parameters,
    eta: float,
    grad_f: Parameters,
    partition: GroupPartition,
    lam: float,
) -> Parameters:
    """Prox-gradient residual (x - prox(x - eta * grad_f, eta * lam)) / eta.

    Zero exactly at fixed points of the proximal gradient update with step
    eta. The bias component, when present, is the bias gradient itself since
    the bias is unregularized.

    Raises
    ------
    ValueError
        If eta is not positive.
    """
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    _check(x, partition)

    trial = Parameters(x.x - eta * grad_f.x)
    proxed = prox_group_l2(trial, partition, eta * lam)
    residual = (x.x - proxed.x) / eta
    bias = None
    if x.has_bias:
        bias = grad_f.bias if grad_f.bias is not None else 0.0
    return Parameters(residual, bias)
