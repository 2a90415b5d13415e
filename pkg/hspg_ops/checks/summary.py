"""
summary.py
--------------------
Runs the property suites and renders their pass/fail table.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from collections.abc import Callable
from pathlib import Path

from tabulate import tabulate

from hspg_ops.checks.equivalence import check_hspg_prox_sg_equivalence, check_svrg_equivalence
from hspg_ops.checks.gradients import check_problem_gradients, check_psi_gradient
from hspg_ops.checks.half_space import (
    check_identification,
    check_projection_region,
    check_sufficient_decrease,
)
from hspg_ops.checks.operators import (
    check_nonexpansive,
    check_prox_oracle,
    check_projection_idempotent,
)
from hspg_ops.config import LOGREG_NUM_GROUPS, paper_lambda
from hspg_ops.data import gen_synthetic_logistic, load_libsvm
from hspg_ops.errors import VerificationError
from hspg_ops.groups import make_equal_partition
from hspg_ops.logging import get_logger

log = get_logger(__name__)

CHECK = "🟢"
CROSS = "🔴"


def _sufficient_decrease_suite(dataset: Path | None) -> list[dict]:
    if dataset is not None and Path(dataset).exists():
        problem = load_libsvm(dataset)
        source = Path(dataset).name
    else:
        problem = gen_synthetic_logistic(2000, 100, 0.2, seed=11)
        source = "synthetic logistic"
    log.info(f"[sufficient_decrease] using {source} (N={problem.num_instances}, n={problem.dimension})")
    partition = make_equal_partition(problem.dimension, min(LOGREG_NUM_GROUPS, problem.dimension))
    return check_sufficient_decrease(problem, partition, paper_lambda(problem.num_instances))


SUITES: dict[str, Callable[[Path | None], list[dict]]] = {
    "prox_oracle": lambda _: check_prox_oracle(),
    "nonexpansive": lambda _: check_nonexpansive(),
    "projection_idempotent": lambda _: check_projection_idempotent(),
    "projection_region": lambda _: check_projection_region(),
    "sufficient_decrease": _sufficient_decrease_suite,
    "identification": lambda _: check_identification(),
    "gradients": lambda _: check_problem_gradients(),
    "psi_gradient": lambda _: check_psi_gradient(),
    "svrg_equivalence": lambda _: check_svrg_equivalence(),
    "hspg_equivalence": lambda _: check_hspg_prox_sg_equivalence(),
}

# short names for the descent, superset and identification properties
SUITE_ALIASES = {
    "lemma1": "sufficient_decrease",
    "superset": "projection_region",
    "theorem33": "identification",
}


def resolve_suite_name(name: str) -> str:
    return SUITE_ALIASES.get(name, name)


def _is_ok_status(record) -> bool:
    if record is None:
        return False
    val = record.get("status", "")
    if isinstance(val, bool):
        return val
    return str(val).strip().lower() == "ok"


def run_suites(names: list[str] | None = None, dataset: Path | None = None, strict: bool = False) -> list[dict]:
    """Runs the named suites (all by default) and collects their records.

    A suite that raises is reported as a failing record.

    Raises
    ------
    ValueError
        On an unknown suite name. Names in `SUITE_ALIASES` are resolved first.
    VerificationError
        In strict mode, when any record fails.
    """
    names = list(SUITES) if not names else list(dict.fromkeys(resolve_suite_name(n) for n in names))
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suite(s) {unknown}, expected some of {list(SUITES)}")

    records = []
    for name in names:
        log.info(f"[{name}] running...")
        try:
            records.extend(SUITES[name](dataset))
        except Exception as e:
            log.exception(f"[{name}] crashed")
            records.append({"suite": name, "status": "fail", "note": f"raised {type(e).__name__}: {e}"})

    if strict and not all_passed(records):
        failed = [r["suite"] for r in records if not _is_ok_status(r)]
        raise VerificationError(f"Failed suites: {', '.join(failed)}")
    return records


def all_passed(records: list[dict]) -> bool:
    return bool(records) and all(_is_ok_status(r) for r in records)


def summarize_results(records: list[dict], show_table: bool = True) -> str:
    """Renders the suite results as a grid table with pass/fail markers.

    Parameters
    ----------
    records : list[dict]
        ``{"suite", "status", "note"}`` records.
    show_table : bool, optional
        Whether to include the per-suite table below the counts, by default True.

    Returns
    -------
    str
        The rendered summary.
    """
    passed = sum(1 for r in records if _is_ok_status(r))
    lines = [
        "",
        "==============================",
        "  PROPERTY SUITE SUMMARY",
        "==============================",
        f"Suites passed: {passed}/{len(records)}",
    ]
    if show_table:
        table = [[r["suite"], CHECK if _is_ok_status(r) else CROSS, r.get("note", "")] for r in records]
        lines.append(tabulate(table, headers=["SUITE", "STATUS", "NOTE"], tablefmt="grid"))
    return "\n".join(lines)
