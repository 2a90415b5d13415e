"""
half_space.py
--------------------
Property checks on the Half-Space step, driven through the solver's own step
implementation:

* projection region: a group the proximal step would zero is also zeroed by
  the Half-Space step, for every epsilon;
* sufficient decrease: full-batch Half-Space steps on a logistic problem
  decrease psi by at least the guaranteed amount, along a descent direction;
* identification: from anywhere close enough to a known minimizer, one
  Half-Space step zeroes every group that is zero at the minimizer.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import numpy as np

from hspg_ops import regularizer
from hspg_ops.checks.operators import random_partition, record
from hspg_ops.groups import GroupPartition, nonzero_group_mask
from hspg_ops.logging import get_logger
from hspg_ops.problems import LogisticProblem, QuadraticProblem
from hspg_ops.regularizer import Parameters, omega, prox_group_l2
from hspg_ops.solvers import SolverConfig, SolverKind, SolverState, Stage, half_space_step

log = get_logger(__name__)


def _hspg_config(lam: float, epsilon: float) -> SolverConfig:
    return SolverConfig(solver_kind=SolverKind.HSPG, lam=lam, batch_size=1, max_epochs=0, epsilon=epsilon)


def _unit(rng: np.random.Generator, size: int) -> np.ndarray:
    v = rng.normal(size=size)
    return v / np.linalg.norm(v)


# =====================================================================
# Projection region
# =====================================================================


def check_projection_region(num_draws: int = 10_000, seed: int = 3) -> list[dict]:
    """Groups inside the prox threshold ball are projected to zero.

    Each draw picks x_k with every group nonzero, a designated group g and a
    gradient such that the SGD trial point x_k - alpha * grad has
    ||[trial]_g|| < alpha * lam. The gradient is realized by a quadratic
    problem centered at x_k - grad.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = 0
    for _ in range(num_draws):
        partition = random_partition(rng, max_groups=5)
        x = rng.normal(size=partition.n)
        # every group nonzero
        for g in range(partition.num_groups):
            sl = partition.group_slice(g)
            if not np.any(x[sl]):
                x[sl] = 1.0
        alpha = float(rng.uniform(0.01, 1.0))
        lam = float(rng.uniform(0.05, 2.0))
        eps = float(rng.uniform(0.0, 0.99))

        g = int(rng.integers(partition.num_groups))
        sl = partition.group_slice(g)
        size = sl.stop - sl.start
        radius = alpha * lam * float(rng.uniform(0.0, 0.999))
        trial_g = radius * _unit(rng, size)

        grad = rng.normal(size=partition.n)
        grad[sl] = (x[sl] - trial_g) / alpha

        problem = QuadraticProblem(x - grad)
        state = SolverState(x=Parameters(x), alpha=alpha, stage=Stage.GROUP_SPARSITY)
        x_next = half_space_step(state, problem, partition, _hspg_config(lam, eps), np.array([0]))
        if np.any(x_next.x[sl]):
            failures += 1
    return [record("projection_region", failures, num_draws)]


# =====================================================================
# Sufficient decrease
# =====================================================================


def decrease_step_size(
    x: Parameters, grad_psi: np.ndarray, partition: GroupPartition, lam: float, lipschitz_f: float, eps: float
) -> tuple[float, float]:
    """Step size and curvature bound for one checked Half-Space step.

    With r = min ||[x]_g|| over the nonzero groups, L = L_f + 2 lam / r bounds
    the curvature of psi wherever every kept group stays at least r / 2 from
    the origin. The step is half of min{2(1-eps)/L, 1/L}, further capped so
    that alpha ||[grad psi]_g|| <= ||[x]_g|| / 2 on every group the step keeps.
    Projected groups move to zero along a ray, where the norm is linear, so the
    whole segment [x, x+] stays inside that region. Shrinking alpha only adds
    kept groups, so the cap is repeated until the kept set settles.

    Returns
    -------
    tuple[float, float]
        ``(alpha, L)``, both fixed before the step is taken.
    """
    nonzero = nonzero_group_mask(x, partition)
    norms = partition.group_norms(x.x)
    lipschitz = lipschitz_f + 2.0 * lam / float(np.min(norms[nonzero]))
    alpha = 0.5 * min(2.0 * (1.0 - eps) / lipschitz, 1.0 / lipschitz)

    grad_norms = partition.group_norms(grad_psi)
    for _ in range(partition.num_groups + 1):
        # same keep rule as the Half-Space projection
        inner = partition.group_sums((x.x - alpha * grad_psi) * x.x)
        moving = nonzero & (inner >= eps * norms**2) & (grad_norms > 0.0)
        if not moving.any():
            break
        capped = min(alpha, float(np.min(norms[moving] / (2.0 * grad_norms[moving]))))
        if capped == alpha:
            break
        alpha = capped
    return alpha, lipschitz


def check_sufficient_decrease(
    problem: LogisticProblem,
    partition: GroupPartition,
    lam: float,
    num_steps: int = 100,
    epsilons: tuple[float, ...] = (0.0, 0.05),
    seed: int = 4,
    slack: float = 1e-9,
) -> list[dict]:
    """Guaranteed decrease of full-batch Half-Space steps.

    For each epsilon, `num_steps` consecutive full-batch steps are taken from a
    dense random start. Step size and curvature bound L come from
    `decrease_step_size` before each step, and afterwards the inequality

        psi(x+) <= psi(x) - (a - a^2 L / 2) sum_kept ||[grad psi]_g||^2
                          - ((1 - eps)/a - L/2) sum_projected ||[x]_g||^2

    is checked with that same L. The direction d = x+ - x must satisfy
    d . grad psi < 0 when d != 0. The bias is treated as a kept, unregularized coordinate.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    batch = np.arange(problem.num_instances)
    # curvature of f in (x, b): Hessian norm <= max_i (||d_i||^2 + 1) / 4
    lipschitz_f = float(np.max(problem.row_sq_norms() + (1.0 if problem.has_bias else 0.0))) / 4.0

    def psi(p: Parameters) -> float:
        return problem.full_value(p) + lam * omega(p, partition)

    records = []
    for eps in epsilons:
        x = Parameters(rng.normal(scale=0.1, size=problem.dimension), 0.0 if problem.has_bias else None)
        config = _hspg_config(lam, eps)
        decrease_failures = 0
        direction_failures = 0
        worst = np.inf

        for _ in range(num_steps):
            nonzero = nonzero_group_mask(x, partition)
            if not nonzero.any():
                # all groups zero: a fixed point, nothing left to check
                break
            grad_f = problem.batch_gradient(x, batch)
            support = partition.expand(nonzero)
            grad_psi = np.where(
                support, grad_f.x + lam * regularizer.grad_omega_on_support(x, partition).x, 0.0
            )
            grad_bias = grad_f.bias or 0.0
            alpha, lipschitz = decrease_step_size(x, grad_psi, partition, lam, lipschitz_f, eps)

            state = SolverState(x=x, alpha=alpha, stage=Stage.GROUP_SPARSITY)
            y = half_space_step(state, problem, partition, config, batch)

            next_nonzero = nonzero_group_mask(y, partition)
            kept = nonzero & next_nonzero
            projected = nonzero & ~next_nonzero

            kept_sq = float(np.sum(partition.group_sums(grad_psi**2)[kept])) + grad_bias**2
            projected_sq = float(np.sum(partition.group_sums(x.x**2)[projected]))
            bound = (
                psi(x)
                - (alpha - alpha**2 * lipschitz / 2.0) * kept_sq
                - ((1.0 - eps) / alpha - lipschitz / 2.0) * projected_sq
            )
            margin = bound - psi(y)
            worst = min(worst, margin)
            if margin < -slack:
                decrease_failures += 1

            d = y.x - x.x
            d_bias = (y.bias or 0.0) - (x.bias or 0.0)
            if np.any(d) or d_bias != 0.0:
                if float(d @ grad_psi) + d_bias * grad_bias >= 0.0:
                    direction_failures += 1
            x = y

        records.append(
            record(f"sufficient_decrease(eps={eps:g})", decrease_failures, num_steps, f"min margin {worst:.2e}")
        )
        records.append(record(f"descent_direction(eps={eps:g})", direction_failures, num_steps))
    return records


# =====================================================================
# Identification
# =====================================================================


def check_identification(num_instances: int = 100, seed: int = 5) -> list[dict]:
    """One Half-Space step near a known minimizer zeroes its zero groups.

    Each instance is f(x) = 1/2 ||x - c||^2 (L = 1) with some groups of c inside
    the lam-ball, so the minimizer of psi is x* = prox(c, lam) and its zero
    groups are exactly those. With delta = min (lam - ||c_g||) / 2 over them,
    x_k is drawn uniformly inside the ball of radius
    2 alpha delta / (1 - eps + alpha) around x*.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = 0
    for _ in range(num_instances):
        partition = random_partition(rng, max_groups=8)
        while partition.num_groups < 2:
            partition = random_partition(rng, max_groups=8)
        lam = float(rng.uniform(0.5, 1.5))
        alpha = float(rng.uniform(0.05, 0.95))
        eps = float(rng.uniform(0.0, 0.5))

        zero_type = rng.random(partition.num_groups) < 0.5
        zero_type[int(rng.integers(partition.num_groups))] = True
        center = np.empty(partition.n)
        for g in range(partition.num_groups):
            sl = partition.group_slice(g)
            scale = rng.uniform(0.1, 0.8) if zero_type[g] else rng.uniform(1.5, 3.0)
            center[sl] = lam * scale * _unit(rng, sl.stop - sl.start)

        x_star = prox_group_l2(Parameters(center), partition, lam).x
        star_zero = ~nonzero_group_mask(x_star, partition)
        center_norms = partition.group_norms(center)
        delta = float(np.min(lam - center_norms[star_zero])) / 2.0
        radius = 2.0 * alpha * delta / (1.0 - eps + alpha) * 0.999

        u = rng.random() ** (1.0 / partition.n)
        x_k = x_star + radius * u * _unit(rng, partition.n)

        state = SolverState(x=Parameters(x_k), alpha=alpha, stage=Stage.GROUP_SPARSITY)
        x_next = half_space_step(
            state, QuadraticProblem(center), partition, _hspg_config(lam, eps), np.array([0])
        )
        next_zero = ~nonzero_group_mask(x_next, partition)
        if np.any(star_zero & ~next_zero):
            failures += 1
    return [record("identification", failures, num_instances)]
