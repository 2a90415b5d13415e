"""
sweep.py
--------------------
Prefect flow running a grid of benchmark cells in parallel, with every cell
tracked in the run registry.

Usage:
------
# from the command line
hspg sweep --experiment synth --ratios 0.1 0.3 0.5 --workers 4

# or as a deployment (from the repository root)
prefect deploy --all --prefect-file flows/prefect.yaml

Overview of Prefect Flow:
-----------------------
1. Expand the experiment into cells and register each one as 'pending'.
2. Skip cells the registry already reports as 'complete'.
3. Run the remaining cells on a thread pool, marking each 'in_progress'.
4. Record final metrics and mark 'complete', or mark 'error' with the message.
5. Write summary.csv and manifest.json over every completed cell.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import json
from dataclasses import asdict
from pathlib import Path
from typing import Optional

from prefect import flow, get_run_logger, task
from prefect.cache_policies import NO_CACHE
from prefect.task_runners import ThreadPoolTaskRunner

from hspg_ops.config import DB_PATH
from hspg_ops.db import (
    get_run_record,
    init_registry,
    open_registry,
    register_run,
    update_run_record,
)
from hspg_ops.experiments import (
    CellResult,
    ExperimentCell,
    ExperimentSpec,
    cell_dataset_info,
    expand_cells,
    finish_experiment,
    load_cell_problem,
    render_table,
    run_cell,
)

# =====================================================================
# Prefect Tasks
# =====================================================================


@task(name="Run Benchmark Cell", cache_policy=NO_CACHE)
def run_benchmark_cell(cell: ExperimentCell, output_dir: str, record_timing: bool, db_path: str) -> CellResult:
    """Runs one cell, moving its registry row to 'in_progress' first.

    On failure the row is set to 'error' with the exception message and the
    exception is re-raised.
    """
    log = get_run_logger()
    run_id = cell.run_id

    with open_registry(db_path) as conn:
        update_run_record(conn, run_id, status="in_progress", error_message=None)
    log.info(f"[{run_id}] Status updated to 'in_progress'.")

    try:
        return run_cell(cell, output_dir, record_timing=record_timing)
    except Exception as e:
        with open_registry(db_path) as conn:
            update_run_record(conn, run_id, status="error", error_message=f"{type(e).__name__}: {e}")
        log.error(f"[{run_id}] Failed: {e}")
        raise


@task(name="Record Cell Result", cache_policy=NO_CACHE)
def record_cell_result(result: CellResult, db_path: str):
    """Writes the final metrics and resolved config, and marks the run 'complete'."""
    log = get_run_logger()
    with open_registry(db_path) as conn:
        update_run_record(
            conn,
            result.run_id,
            status="complete",
            config_json=result.config,
            **result.registry_fields(),
        )
    log.info(f"[{result.run_id}] Status updated to 'complete'.")


def _result_from_record(row, cell: ExperimentCell) -> CellResult:
    problem, _, _ = load_cell_problem(cell)
    return CellResult(
        run_id=row["run_id"],
        experiment=row["experiment"],
        dataset_id=row["dataset_id"],
        solver=row["solver"],
        seed=row["seed"],
        final_psi=row["final_psi"],
        final_f=row["final_f"],
        group_sparsity=row["group_sparsity"],
        iou=row["iou"],
        trace_path=row["trace_path"],
        config=json.loads(row["config_json"]),
        dataset_info=cell_dataset_info(cell, problem),
    )


_TUPLE_FIELDS = ("solvers", "seeds", "ratios", "epsilons")


def _as_spec(spec: ExperimentSpec | dict) -> ExperimentSpec:
    """Accepts the JSON form a deployment passes as well as a spec object."""
    if isinstance(spec, ExperimentSpec):
        return spec
    doc = dict(spec)
    for key in _TUPLE_FIELDS:
        if key in doc and doc[key] is not None:
            doc[key] = tuple(doc[key])
    doc["output_dir"] = Path(doc.get("output_dir") or "results")
    if doc.get("dataset") is not None:
        doc["dataset"] = Path(doc["dataset"])
    return ExperimentSpec(**doc)


# =====================================================================
# Prefect Flows
# =====================================================================


@flow(name="Benchmark Sweep", validate_parameters=False)
def benchmark_sweep_flow(spec: ExperimentSpec | dict, db_path: Optional[str] = None) -> dict:
    """Runs every cell of `spec` that is not already complete in the registry.

    Parameters
    ----------
    spec : ExperimentSpec | dict
        The experiment grid, or its `ExperimentSpec.to_dict` form.
    db_path : Optional[str], optional
        Run registry database, by default `config.DB_PATH`.

    Returns
    -------
    dict
        ``completed``, ``skipped`` and ``failed`` run ids, and the rendered
        summary ``table`` (empty when nothing completed).
    """
    log = get_run_logger()

    # parsing input parameters
    log.info("Parsing input variables...")
    spec = _as_spec(spec)
    log.info(f"experiment set as: {spec.experiment} ({', '.join(spec.solvers)})")
    db_path = str(db_path or DB_PATH)
    log.info(f"db_path set as: {db_path}")
    log.info(f"output_dir set as: {spec.output_dir}")

    init_registry(db_path)
    cells = expand_cells(spec)

    results: list[CellResult] = []
    skipped, pending = [], []
    with open_registry(db_path) as conn:
        for cell in cells:
            register_run(conn, cell.run_id, cell.experiment, cell.label(), cell.dataset_id, cell.seed, asdict(cell))
            row = get_run_record(conn, cell.run_id)
            if row["status"] == "complete":
                results.append(_result_from_record(row, cell))
                skipped.append(cell.run_id)
            else:
                pending.append(cell)

    log.info(f"{len(cells)} cell(s): {len(skipped)} already complete, {len(pending)} to run")

    futures = [
        (cell, run_benchmark_cell.submit(cell, str(spec.output_dir), spec.record_timing, db_path))
        for cell in pending
    ]

    completed, failed = [], []
    for cell, future in futures:
        try:
            result = future.result()
        except Exception:
            failed.append(cell.run_id)
            continue
        record_cell_result(result, db_path)
        results.append(result)
        completed.append(cell.run_id)

    table = ""
    if results:
        order = {cell.run_id: i for i, cell in enumerate(cells)}
        results.sort(key=lambda r: order[r.run_id])
        table = render_table(finish_experiment(spec, results))

    if failed:
        log.warning(f"{len(failed)} cell(s) ended in 'error': {failed}")
    return {"completed": completed, "skipped": skipped, "failed": failed, "table": table}


def run_sweep(spec: ExperimentSpec, workers: int = 1, db_path: str | Path = DB_PATH) -> dict:
    """Runs `benchmark_sweep_flow` on a thread pool of `workers` threads."""
    runner = ThreadPoolTaskRunner(max_workers=workers)
    return benchmark_sweep_flow.with_options(task_runner=runner)(spec=spec, db_path=str(db_path))
