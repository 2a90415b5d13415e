"""
checks
--------------------
Property suites behind ``hspg verify``. Each check returns a list of
``{"suite", "status", "note"}`` records; `summary.summarize_results` renders
them.
"""

from hspg_ops.checks.equivalence import check_hspg_prox_sg_equivalence, check_svrg_equivalence
from hspg_ops.checks.gradients import check_problem_gradients, check_psi_gradient
from hspg_ops.checks.half_space import (
    check_identification,
    check_projection_region,
    check_sufficient_decrease,
)
from hspg_ops.checks.operators import (
    check_nonexpansive,
    check_projection_idempotent,
    check_prox_oracle,
)
from hspg_ops.checks.summary import (
    SUITE_ALIASES,
    SUITES,
    all_passed,
    resolve_suite_name,
    run_suites,
    summarize_results,
)

__all__ = [
    "SUITES",
    "SUITE_ALIASES",
    "all_passed",
    "check_hspg_prox_sg_equivalence",
    "check_identification",
    "check_nonexpansive",
    "check_problem_gradients",
    "check_projection_idempotent",
    "check_projection_region",
    "check_prox_oracle",
    "check_psi_gradient",
    "check_sufficient_decrease",
    "check_svrg_equivalence",
    "resolve_suite_name",
    "run_suites",
    "summarize_results",
]
