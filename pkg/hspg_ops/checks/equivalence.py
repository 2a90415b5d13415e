"""
equivalence.py
--------------------
Solvers that must coincide under special settings:

* Prox-SVRG with the full batch follows deterministic proximal gradient
  descent iterate for iterate;
* HSPG that never switches stage reproduces Prox-SG bit for bit.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import numpy as np

from hspg_ops.checks.operators import record
from hspg_ops.data import gen_synthetic, gen_synthetic_logistic
from hspg_ops.groups import make_equal_partition
from hspg_ops.solvers import (
    SolverConfig,
    SolverKind,
    StepSchedule,
    prox_gradient_descent,
    resolve_base_alpha,
    run,
)


def check_svrg_equivalence(iterations: int = 50, seed: int = 8, atol: float = 1e-12) -> list[dict]:
    """Full-batch Prox-SVRG against proximal gradient descent, per iterate."""
    cases = {
        "least_squares": (gen_synthetic(40, 12, 3, 0.34, seed).problem(), make_equal_partition(12, 3)),
        "logistic": (gen_synthetic_logistic(60, 12, 0.5, seed), make_equal_partition(12, 4)),
    }
    records = []
    for name, (problem, partition) in cases.items():
        N = problem.num_instances
        lam = 0.05
        config = SolverConfig(
            solver_kind=SolverKind.PROX_SVRG,
            lam=lam,
            batch_size=N,
            max_epochs=iterations,
            seed=seed,
            svrg_inner_loop=5,
        )
        alpha = resolve_base_alpha(config, problem)
        config = config.replace(step_schedule=StepSchedule(initial=alpha))

        svrg_iterates = []
        run(config, problem, partition, record_timing=False, on_step=lambda s: svrg_iterates.append(s.x))
        reference = []
        prox_gradient_descent(
            problem, partition, lam, alpha, max_iter=iterations, tol=0.0,
            on_step=lambda i, x: reference.append(x),
        )

        failures = 0
        worst = 0.0
        for a, b in zip(svrg_iterates, reference):
            dist = a.distance(b)
            worst = max(worst, dist)
            failures += dist > atol
        failures += abs(len(svrg_iterates) - len(reference))
        records.append(
            record(f"svrg_equivalence({name})", int(failures), iterations, f"max deviation {worst:.2e}")
        )
    return records


def _trace_values(trace) -> list[tuple]:
    return [(r.epoch, r.stage, r.psi, r.f, r.group_sparsity, r.grad_map_norm) for r in trace.records]


def check_hspg_prox_sg_equivalence(seed: int = 9, max_epochs: int = 5) -> list[dict]:
    """HSPG without a stage switch against Prox-SG at the same seed."""
    instance = gen_synthetic(300, 40, 5, 0.4, seed)
    problem = instance.problem()
    base = dict(lam=100.0 / problem.num_instances, batch_size=32, max_epochs=max_epochs, seed=seed,
                step_schedule=StepSchedule(initial=0.1))

    hspg_steps, prox_steps = [], []
    _, hspg_trace = run(
        SolverConfig(solver_kind=SolverKind.HSPG, n_p=None, epsilon=0.05, **base),
        problem, instance.partition, record_timing=False, on_step=lambda s: hspg_steps.append(s.x.x.copy()),
    )
    _, prox_trace = run(
        SolverConfig(solver_kind=SolverKind.PROX_SG, **base),
        problem, instance.partition, record_timing=False, on_step=lambda s: prox_steps.append(s.x.x.copy()),
    )

    failures = sum(not np.array_equal(a, b) for a, b in zip(hspg_steps, prox_steps))
    failures += abs(len(hspg_steps) - len(prox_steps))
    if _trace_values(hspg_trace) != _trace_values(prox_trace):
        failures += 1
    return [record("hspg_prox_sg_equivalence", int(failures), len(prox_steps))]
