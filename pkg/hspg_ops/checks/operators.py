"""
operators.py
--------------------
Property checks on the group operators: the proximal mapping against a
brute-force scalar search, prox nonexpansiveness and idempotence of the
half-space projection.

Every check returns a list of ``{"suite", "status", "note"}`` records with
status ``ok`` or ``fail``.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import numpy as np
from scipy.optimize import minimize_scalar

from hspg_ops.groups import GroupPartition
from hspg_ops.logging import get_logger
from hspg_ops.regularizer import Parameters, half_space_project, prox_group_l2

log = get_logger(__name__)

# =====================================================================
# Helpers
# =====================================================================


def random_partition(rng: np.random.Generator, max_groups: int = 4, max_size: int = 5) -> GroupPartition:
    """Partition with 1..max_groups groups of 1..max_size coordinates each."""
    sizes = rng.integers(1, max_size + 1, size=int(rng.integers(1, max_groups + 1)))
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return GroupPartition(tuple(zip(starts.tolist(), sizes.tolist())), int(sizes.sum()))


def record(suite: str, failures: int, total: int, detail: str = "") -> dict:
    status = "ok" if failures == 0 else "fail"
    note = f"{total - failures}/{total} passed"
    if detail:
        note = f"{note}; {detail}"
    log.debug(f"[{suite}] {status}: {note}")
    return {"suite": suite, "status": status, "note": note}


def ray_search_prox(x_hat: np.ndarray, partition: GroupPartition, eta: float, lam: float) -> np.ndarray:
    """Minimizer of (1/2 eta)||x - x_hat||^2 + lam * Omega(x) by scalar search.

    The minimizer of each group subproblem lies on the ray c * [x_hat]_g with
    c in [0, 1]; c is found with a bounded scalar minimization.
    """
    out = np.zeros_like(x_hat)
    for g in range(partition.num_groups):
        sl = partition.group_slice(g)
        norm = float(np.linalg.norm(x_hat[sl]))
        if norm == 0.0:
            continue

        def objective(c, norm=norm):
            return (1.0 - c) ** 2 * norm**2 / (2.0 * eta) + lam * c * norm

        res = minimize_scalar(objective, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
        c = res.x
        # the bounded search never lands exactly on the endpoint
        if objective(0.0) <= res.fun:
            c = 0.0
        out[sl] = c * x_hat[sl]
    return out


# =====================================================================
# Checks
# =====================================================================


def check_prox_oracle(num_trials: int = 1000, seed: int = 0, atol: float = 1e-6) -> list[dict]:
    """prox_group_l2 against the scalar-search minimizer on random triples."""
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = 0
    worst = 0.0
    for _ in range(num_trials):
        partition = random_partition(rng)
        x_hat = rng.normal(scale=2.0, size=partition.n)
        lam = float(rng.uniform(0.0, 2.0))
        eta = float(rng.uniform(0.05, 2.0))

        got = prox_group_l2(Parameters(x_hat), partition, eta * lam).x
        expected = ray_search_prox(x_hat, partition, eta, lam)
        err = float(np.max(np.abs(got - expected)))
        worst = max(worst, err)
        if err > atol:
            failures += 1
    return [record("prox_oracle", failures, num_trials, f"max deviation {worst:.2e}")]


def check_nonexpansive(num_pairs: int = 1000, seed: int = 1) -> list[dict]:
    """||prox(a) - prox(b)|| <= ||a - b|| on random pairs."""
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = 0
    for _ in range(num_pairs):
        partition = random_partition(rng)
        a = rng.normal(size=partition.n)
        b = a + rng.normal(scale=float(rng.uniform(0.01, 2.0)), size=partition.n)
        threshold = float(rng.uniform(0.0, 2.0))
        pa = prox_group_l2(Parameters(a), partition, threshold).x
        pb = prox_group_l2(Parameters(b), partition, threshold).x
        if np.linalg.norm(pa - pb) > np.linalg.norm(a - b) * (1.0 + 1e-12):
            failures += 1
    return [record("nonexpansive", failures, num_pairs)]


def check_projection_idempotent(num_trials: int = 1000, seed: int = 2) -> list[dict]:
    """project(project(z)) == project(z) for a fixed reference and epsilon."""
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = 0
    for _ in range(num_trials):
        partition = random_partition(rng)
        x_ref = Parameters(rng.normal(size=partition.n))
        z = Parameters(x_ref.x + rng.normal(size=partition.n))
        eps = float(rng.uniform(0.0, 0.99))
        once = half_space_project(z, x_ref, partition, eps)
        twice = half_space_project(once, x_ref, partition, eps)
        if not np.array_equal(once.x, twice.x):
            failures += 1
    return [record("projection_idempotent", failures, num_trials)]
