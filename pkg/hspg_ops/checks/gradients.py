"""
gradients.py
--------------------
Finite-difference checks of the analytic gradients: batch gradients of the
least-squares and logistic problems, and the gradient of psi on the nonzero
groups (including its Lipschitz bound away from the origin).
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import numpy as np
from scipy.sparse import random as sparse_random

from hspg_ops import regularizer
from hspg_ops.checks.operators import random_partition, record
from hspg_ops.problems import LeastSquaresProblem, LogisticProblem, Problem
from hspg_ops.regularizer import Parameters, omega

FD_STEP = 1e-6


def _flatten(p: Parameters) -> np.ndarray:
    return p.x if p.bias is None else np.append(p.x, p.bias)


def _unflatten(v: np.ndarray, has_bias: bool) -> Parameters:
    return Parameters(v[:-1], float(v[-1])) if has_bias else Parameters(v)


def central_differences(func, point: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of a vector."""
    grad = np.empty_like(point)
    for i in range(point.size):
        e = np.zeros_like(point)
        e[i] = step
        grad[i] = (func(point + e) - func(point - e)) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-6)
    return float(np.linalg.norm(analytic - numeric)) / scale


def _batch_gradient_error(problem: Problem, x: Parameters, batch: np.ndarray) -> float:
    has_bias = x.bias is not None
    analytic = _flatten(problem.batch_gradient(x, batch))
    numeric = central_differences(lambda v: problem.batch_value(_unflatten(v, has_bias), batch), _flatten(x))
    return relative_error(analytic, numeric)


def _random_batch(rng: np.random.Generator, num_instances: int) -> np.ndarray:
    size = int(rng.integers(1, num_instances + 1))
    return np.sort(rng.choice(num_instances, size=size, replace=False))


# =====================================================================
# Checks
# =====================================================================


def check_problem_gradients(num_instances: int = 100, seed: int = 6, rtol: float = 1e-5) -> list[dict]:
    """Analytic batch gradients against central differences on random problems."""
    rng = np.random.Generator(np.random.PCG64(seed))

    ls_failures, ls_worst = 0, 0.0
    for _ in range(num_instances):
        problem = LeastSquaresProblem(rng.normal(size=(5, 4)), rng.normal(size=5))
        x = Parameters(rng.normal(size=4))
        err = _batch_gradient_error(problem, x, _random_batch(rng, 5))
        ls_worst = max(ls_worst, err)
        ls_failures += err >= rtol

    lr_failures, lr_worst = 0, 0.0
    for _ in range(num_instances):
        N, n = 8, 6
        D = sparse_random(N, n, density=0.5, format="csr", random_state=rng, data_rvs=lambda k: rng.uniform(-2, 2, k))
        labels = rng.choice([-1.0, 1.0], size=N)
        problem = LogisticProblem(D, labels, has_bias=True)
        x = Parameters(rng.normal(size=n), float(rng.normal()))
        err = _batch_gradient_error(problem, x, _random_batch(rng, N))
        lr_worst = max(lr_worst, err)
        lr_failures += err >= rtol

    return [
        record("least_squares_gradient", int(ls_failures), num_instances, f"max rel. error {ls_worst:.2e}"),
        record("logistic_gradient", int(lr_failures), num_instances, f"max rel. error {lr_worst:.2e}"),
    ]


def psi_gradient_on_support(problem: Problem, partition, lam: float, x: Parameters) -> np.ndarray:
    """grad f + lam * grad Omega, restricted to the nonzero groups of x."""
    grad_f = problem.full_value_grad(x)[1]
    return grad_f.x + lam * regularizer.grad_omega_on_support(x, partition).x


def check_psi_gradient(
    num_instances: int = 100, seed: int = 7, rtol: float = 1e-5, min_group_norm: float = 0.5
) -> list[dict]:
    """Gradient of psi away from the origin of every group.

    Points are drawn with every group norm at least `min_group_norm`, where psi
    is differentiable. The analytic gradient is compared with central
    differences of f + lam * Omega, and the ratio
    ||grad psi(a) - grad psi(b)|| / ||a - b|| on nearby pairs is checked
    against L_f + 2 lam / min_group_norm.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    grad_failures, grad_worst = 0, 0.0
    lip_failures, lip_worst = 0, 0.0

    def far_point(partition) -> np.ndarray:
        x = np.empty(partition.n)
        for g in range(partition.num_groups):
            sl = partition.group_slice(g)
            direction = rng.normal(size=sl.stop - sl.start)
            x[sl] = rng.uniform(min_group_norm, 3.0) * direction / np.linalg.norm(direction)
        return x

    for _ in range(num_instances):
        partition = random_partition(rng)
        problem = LeastSquaresProblem(rng.normal(size=(6, partition.n)), rng.normal(size=6))
        lam = float(rng.uniform(0.1, 2.0))
        x = Parameters(far_point(partition))

        analytic = psi_gradient_on_support(problem, partition, lam, x)
        numeric = central_differences(
            lambda v: problem.full_value(Parameters(v)) + lam * omega(Parameters(v), partition), x.x
        )
        err = relative_error(analytic, numeric)
        grad_worst = max(grad_worst, err)
        grad_failures += err >= rtol

        a = x
        b = Parameters(far_point(partition))
        bound = problem.lipschitz_estimate() + 2.0 * lam / min_group_norm
        ratio = float(
            np.linalg.norm(
                psi_gradient_on_support(problem, partition, lam, a) - psi_gradient_on_support(problem, partition, lam, b)
            )
            / max(np.linalg.norm(a.x - b.x), 1e-12)
        )
        lip_worst = max(lip_worst, ratio / bound)
        lip_failures += ratio > bound

    return [
        record("psi_gradient", int(grad_failures), num_instances, f"max rel. error {grad_worst:.2e}"),
        record("psi_lipschitz", int(lip_failures), num_instances, f"max ratio/bound {lip_worst:.2f}"),
    ]
