"""
problems.py
--------------------
Finite-sum objectives f = (1/N) sum_i f_i with closed-form batch gradients.

Three concrete problems are provided:

* LeastSquaresProblem: dense group-lasso least squares, f_i = 1/2 (a_i.x - y_i)^2.
* LogisticProblem: sparse binary logistic regression with an optional
  unregularized bias, f_i = log(1 + exp(-l_i (x.d_i + b))).
* QuadraticProblem: single-instance 1/2 ||x - c||^2, whose composite minimizer
  is known in closed form.

Problems are immutable after construction; batch evaluations are pure.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np
from scipy.sparse import csr_matrix, issparse
from scipy.special import expit

from hspg_ops.errors import EmptyDatasetError
from hspg_ops.regularizer import Parameters

# =====================================================================
# Contract
# =====================================================================


class Problem(ABC):
    """Contract for a finite-sum objective over N instances."""

    @property
    @abstractmethod
    def num_instances(self) -> int: ...

    @property
    @abstractmethod
    def dimension(self) -> int: ...

    @property
    def has_bias(self) -> bool:
        return False

    @abstractmethod
    def _value_grad(self, x: Parameters, batch: np.ndarray | None) -> tuple[float, Parameters]:
        """Average value and gradient over `batch` (None means every instance)."""

    @abstractmethod
    def lipschitz_estimate(self) -> float: ...

    def validate_batch(self, batch) -> np.ndarray:
        """Checks a batch of instance indices and returns it as an int array.

        Raises
        ------
        ValueError
            If the batch is empty, not one-dimensional or has an index outside
            0..N-1.
        """
        idx = np.asarray(batch)
        if idx.ndim != 1:
            raise ValueError(f"Batch must be a one-dimensional index set, got shape {idx.shape}")
        if idx.size == 0:
            raise ValueError("Batch is empty")
        if not np.issubdtype(idx.dtype, np.integer):
            raise ValueError(f"Batch indices must be integers, got dtype {idx.dtype}")
        lo, hi = int(idx.min()), int(idx.max())
        if lo < 0 or hi >= self.num_instances:
            raise ValueError(
                f"Batch index out of range: [{lo}, {hi}] not within [0, {self.num_instances - 1}]"
            )
        return idx.astype(np.intp, copy=False)

    def _check_parameters(self, x: Parameters):
        if x.x.shape[0] != self.dimension:
            raise ValueError(
                f"Dimension mismatch: parameters have n={x.x.shape[0]}, problem expects {self.dimension}"
            )
        if self.has_bias and x.bias is None:
            raise ValueError("Problem has a bias but the parameters carry none")

    def batch_value_grad(self, x: Parameters, batch) -> tuple[float, Parameters]:
        """Batch-averaged value and gradient.

        Parameters
        ----------
        x : Parameters
            Evaluation point.
        batch : array-like of int
            Nonempty set of instance indices.

        Returns
        -------
        tuple[float, Parameters]
            The average of f_i over the batch and its gradient.
        """
        self._check_parameters(x)
        return self._value_grad(x, self.validate_batch(batch))

    def batch_value(self, x: Parameters, batch) -> float:
        return self.batch_value_grad(x, batch)[0]

    def batch_gradient(self, x: Parameters, batch) -> Parameters:
        return self.batch_value_grad(x, batch)[1]

    def full_value_grad(self, x: Parameters) -> tuple[float, Parameters]:
        """Value and gradient of f over all N instances."""
        self._check_parameters(x)
        return self._value_grad(x, None)

    def full_value(self, x: Parameters) -> float:
        return self.full_value_grad(x)[0]

    def describe(self) -> dict:
        return {
            "problem": type(self).__name__,
            "num_instances": self.num_instances,
            "dimension": self.dimension,
            "has_bias": self.has_bias,
        }


# =====================================================================
# Least squares
# =====================================================================


class LeastSquaresProblem(Problem):
    """Dense least squares f(x) = (1/2N) ||Ax - y||^2."""

    def __init__(self, A: np.ndarray, y: np.ndarray):
        # private copies: the frozen arrays never alias caller data
        A = np.array(A, dtype=np.float64, copy=True)
        y = np.array(y, dtype=np.float64, copy=True)
        if A.ndim != 2:
            raise ValueError(f"A must be a matrix, got shape {A.shape}")
        if y.shape != (A.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({A.shape[0]},)")
        if A.shape[0] == 0:
            raise EmptyDatasetError("no instances")
        if A.shape[1] == 0:
            raise ValueError("A has no columns")
        A.flags.writeable = False
        y.flags.writeable = False
        self.A = A
        self.y = y

    @property
    def num_instances(self) -> int:
        return self.A.shape[0]

    @property
    def dimension(self) -> int:
        return self.A.shape[1]

    def _value_grad(self, x, batch):
        A = self.A if batch is None else self.A[batch]
        y = self.y if batch is None else self.y[batch]
        residual = A @ x.x - y
        m = residual.shape[0]
        value = 0.5 * float(residual @ residual) / m
        grad = (A.T @ residual) / m
        return value, Parameters(grad)

    def lipschitz_estimate(self) -> float:
        """Upper bound max_i ||a_i||^2 on the per-instance gradient Lipschitz constant."""
        return float(np.max(np.einsum("ij,ij->i", self.A, self.A)))


# =====================================================================
# Logistic regression
# =====================================================================


def _softplus(z: np.ndarray) -> np.ndarray:
    """log(1 + exp(z)) without overflow."""
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


class LogisticProblem(Problem):
    """Binary logistic regression over sparse feature rows.

    Parameters
    ----------
    D : scipy.sparse matrix or np.ndarray
        N x n feature matrix, stored as CSR.
    labels : np.ndarray
        Length-N labels, every entry -1 or +1.
    has_bias : bool, optional
        Whether an unregularized intercept is optimized, by default True.
    """

    def __init__(self, D, labels: np.ndarray, has_bias: bool = True):
        D = csr_matrix(D, dtype=np.float64) if not issparse(D) else D.tocsr().astype(np.float64, copy=True)
        labels = np.array(labels, dtype=np.float64, copy=True)
        if labels.shape != (D.shape[0],):
            raise ValueError(f"labels has shape {labels.shape}, expected ({D.shape[0]},)")
        if D.shape[0] == 0:
            raise EmptyDatasetError("no instances")
        if D.shape[1] == 0:
            raise ValueError("Feature matrix has no columns")
        bad = ~np.isin(labels, (-1.0, 1.0))
        if bad.any():
            first = int(np.flatnonzero(bad)[0])
            raise ValueError(f"Label {labels[first]} at instance {first} is not in {{-1, +1}}")
        D.sort_indices()
        labels.flags.writeable = False
        self.D = D
        self.labels = labels
        self._has_bias = bool(has_bias)

    @property
    def num_instances(self) -> int:
        return self.D.shape[0]

    @property
    def dimension(self) -> int:
        return self.D.shape[1]

    @property
    def has_bias(self) -> bool:
        return self._has_bias

    def _value_grad(self, x, batch):
        D = self.D if batch is None else self.D[batch]
        labels = self.labels if batch is None else self.labels[batch]
        bias = x.bias if self._has_bias else 0.0

        margin = D @ x.x + bias
        z = -labels * margin
        m = labels.shape[0]

        value = float(np.sum(_softplus(z))) / m
        coef = -labels * expit(z)
        grad = np.asarray(D.T @ coef).ravel() / m
        grad_bias = float(np.sum(coef)) / m if self._has_bias else None
        return value, Parameters(grad, grad_bias)

    def row_sq_norms(self) -> np.ndarray:
        return np.asarray(self.D.multiply(self.D).sum(axis=1)).ravel()

    def lipschitz_estimate(self) -> float:
        """max_i ||d_i||^2 / 4 over the data rows (bias feature excluded)."""
        return float(np.max(self.row_sq_norms())) / 4.0

    def label_counts(self) -> tuple[int, int]:
        positives = int(np.sum(self.labels > 0))
        return positives, self.num_instances - positives


# =====================================================================
# Quadratic
# =====================================================================


class QuadraticProblem(Problem):
    """One-instance objective f(x) = 1/2 ||x - c||^2 with L = 1.

    With this f the composite minimizer of f + lam * Omega is prox(c, lam),
    which makes it the reference instance for identification checks.
    """

    def __init__(self, center: np.ndarray):
        center = np.array(center, dtype=np.float64, copy=True)
        if center.ndim != 1 or center.size == 0:
            raise ValueError(f"center must be a nonempty vector, got shape {center.shape}")
        center.flags.writeable = False
        self.center = center

    @property
    def num_instances(self) -> int:
        return 1

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def _value_grad(self, x, batch):
        diff = x.x - self.center
        return 0.5 * float(diff @ diff), Parameters(diff)

    def lipschitz_estimate(self) -> float:
        return 1.0
