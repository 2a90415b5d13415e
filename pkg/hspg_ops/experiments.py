"""
experiments.py
--------------------
Benchmark protocols built on the solvers: synthetic group-lasso recovery and
LIBSVM logistic regression.

An experiment is expanded into cells (one solver configuration on one
dataset at one seed). Cells run independently, write their own trace files
and report a `CellResult`; the experiment then gathers the results into a
summary table and a manifest.

Output layout under the output directory:

    manifest.json        resolved configuration of every cell + digests
    summary.csv          one row per cell
    traces/<run>.csv     per-epoch trace
    traces/<run>.json    trace with metadata
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import pandas as pd
from tabulate import tabulate

from hspg_ops import __version__
from hspg_ops.config import LOGREG_EPSILONS, LOGREG_NUM_GROUPS, SYNTH_EPSILON
from hspg_ops.data import SyntheticInstance, gen_synthetic, load_libsvm
from hspg_ops.errors import ConfigError
from hspg_ops.groups import GroupPartition, GroupSupport, make_equal_partition, support_of
from hspg_ops.logging import get_logger
from hspg_ops.metrics import group_sparsity_ratio, iou_zero_groups, truncate_by_magnitude
from hspg_ops.problems import Problem
from hspg_ops.regularizer import Parameters, omega
from hspg_ops.solvers import (
    SolverConfig,
    SolverKind,
    logreg_defaults,
    make_epsilon_tuner,
    run,
    synthetic_defaults,
    tune_rda_gamma,
)
from hspg_ops.utils import config_digest, make_run_id, to_dir_run_id

log = get_logger(__name__)

EXPERIMENTS = ("synth", "logreg")
TRUNCATABLE = (SolverKind.PROX_SG.value, SolverKind.PROX_SVRG.value)

# override keys per solver kind; everything else is shared
_HSPG_ONLY = {"epsilon", "n_p", "switch_epochs", "switch_rule", "stationarity_window", "stationarity_rtol"}
_KIND_ONLY = {"rda_gamma": SolverKind.RDA, "svrg_inner_loop": SolverKind.PROX_SVRG}

# =====================================================================
# Specs
# =====================================================================


@dataclass(frozen=True)
class ExperimentSpec:
    """Resolved command line of one experiment.

    Synthetic fields (N, n, groups, ratios) are used by ``synth``; dataset,
    epsilons, truncate and tune_gamma by ``logreg``.
    """

    experiment: str
    solvers: tuple[str, ...]
    seeds: tuple[int, ...] = (0,)
    output_dir: Path = Path("results")
    overrides: dict = field(default_factory=dict)
    record_timing: bool = True
    tune_epsilon: bool = False
    theoretical_schedule: bool = False
    N: int | None = None
    n: int | None = None
    groups: int | None = None
    ratios: tuple[float, ...] = ()
    dataset: Path | None = None
    epsilons: tuple[float, ...] = LOGREG_EPSILONS
    truncate: float | None = None
    tune_gamma: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment {self.experiment!r}, expected one of {EXPERIMENTS}")
        if not self.solvers:
            raise ConfigError("No solvers requested")
        for solver in self.solvers:
            try:
                SolverKind(solver)
            except ValueError:
                raise ConfigError(f"Unknown solver {solver!r}") from None
        if self.experiment == "synth":
            if None in (self.N, self.n, self.groups) or not self.ratios:
                raise ConfigError("synth needs N, n, groups and at least one ratio")
            for ratio in self.ratios:
                if not 0.0 <= ratio <= 1.0:
                    raise ConfigError(f"ratio must lie in [0, 1], got {ratio}")
            if self.groups > self.n:
                raise ConfigError(f"Cannot split n={self.n} into {self.groups} groups")
        if self.experiment == "logreg" and self.dataset is None:
            raise ConfigError("logreg needs a dataset path")
        if self.truncate is not None and self.truncate < 0:
            raise ConfigError(f"truncate must be nonnegative, got {self.truncate}")
        for eps in self.epsilons:
            if not 0.0 <= eps < 1.0:
                raise ConfigError(f"epsilon must lie in [0, 1), got {eps}")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["output_dir"] = str(self.output_dir)
        doc["dataset"] = None if self.dataset is None else str(self.dataset)
        return doc


@dataclass(frozen=True)
class ExperimentCell:
    """One solver configuration on one dataset at one seed."""

    experiment: str
    solver: str
    seed: int
    epsilon: float | None = None
    N: int | None = None
    n: int | None = None
    groups: int | None = None
    ratio: float | None = None
    dataset: str | None = None
    overrides: tuple[tuple[str, object], ...] = ()
    tune_epsilon: bool = False
    tune_gamma: bool = False
    theoretical_schedule: bool = False

    @property
    def kind(self) -> SolverKind:
        return SolverKind(self.solver)

    @property
    def dataset_id(self) -> str:
        if self.experiment == "synth":
            return f"synth-N{self.N}-n{self.n}-g{self.groups}-r{self.ratio:g}-s{self.seed}"
        return Path(self.dataset).name

    def label(self) -> str:
        if self.kind is SolverKind.HSPG:
            eps = "auto" if self.tune_epsilon else f"{self.epsilon:g}"
            return f"hspg(eps={eps})"
        if self.kind is SolverKind.RDA and self.tune_gamma:
            return "rda(gamma=auto)"
        return self.solver

    @property
    def run_id(self) -> str:
        return make_run_id(self.experiment, self.dataset_id, self.label(), self.seed)


@dataclass
class CellResult:
    run_id: str
    experiment: str
    dataset_id: str
    solver: str
    seed: int
    final_psi: float
    final_f: float
    group_sparsity: float
    iou: float | None
    trace_path: str
    config: dict
    dataset_info: dict = field(default_factory=dict)
    x: Parameters | None = field(default=None, repr=False)

    def registry_fields(self) -> dict:
        return {
            "final_psi": self.final_psi,
            "final_f": self.final_f,
            "group_sparsity": self.group_sparsity,
            "iou": self.iou,
            "trace_path": self.trace_path,
        }


def expand_cells(spec: ExperimentSpec) -> list[ExperimentCell]:
    """Cells of an experiment in a deterministic order (seed, data, solver)."""
    overrides = tuple(sorted((k, v) for k, v in spec.overrides.items() if v is not None))
    common = dict(
        overrides=overrides,
        tune_epsilon=spec.tune_epsilon,
        tune_gamma=spec.tune_gamma,
        theoretical_schedule=spec.theoretical_schedule,
    )
    cells = []
    for seed in spec.seeds:
        if spec.experiment == "synth":
            for ratio in spec.ratios:
                for solver in spec.solvers:
                    eps = None
                    if solver == "hspg":
                        eps = spec.overrides.get("epsilon")
                        eps = SYNTH_EPSILON if eps is None else eps
                    cells.append(
                        ExperimentCell(
                            "synth", solver, seed, eps, spec.N, spec.n, spec.groups, ratio, **common
                        )
                    )
        else:
            for solver in spec.solvers:
                epsilons = spec.epsilons if solver == "hspg" and not spec.tune_epsilon else (None,)
                for eps in epsilons:
                    if solver == "hspg" and eps is None:
                        eps = 0.0
                    cells.append(
                        ExperimentCell("logreg", solver, seed, eps, dataset=str(spec.dataset), **common)
                    )
    return cells


# =====================================================================
# Data
# =====================================================================


@lru_cache(maxsize=4)
def synthetic_instance(N: int, n: int, groups: int, ratio: float, seed: int) -> SyntheticInstance:
    return gen_synthetic(N, n, groups, ratio, seed)


@lru_cache(maxsize=4)
def logreg_dataset(path: str) -> Problem:
    return load_libsvm(path)


def load_cell_problem(cell: ExperimentCell) -> tuple[Problem, GroupPartition, GroupSupport | None]:
    """Problem, partition and (synthetic only) ground-truth support of a cell."""
    if cell.experiment == "synth":
        instance = synthetic_instance(cell.N, cell.n, cell.groups, cell.ratio, cell.seed)
        return instance.problem(), instance.partition, instance.truth_support()
    problem = logreg_dataset(cell.dataset)
    return problem, make_equal_partition(problem.dimension, min(LOGREG_NUM_GROUPS, problem.dimension)), None


def build_config(cell: ExperimentCell, problem: Problem) -> SolverConfig:
    """Protocol defaults for the cell's solver with its overrides applied.

    Overrides that belong to another solver kind are dropped for this one.
    """
    kind = cell.kind
    overrides = {}
    for key, value in cell.overrides:
        if key in _HSPG_ONLY and kind is not SolverKind.HSPG:
            continue
        if key in _KIND_ONLY and _KIND_ONLY[key] is not kind:
            continue
        if key == "epsilon":
            continue
        overrides[key] = value
    if kind is SolverKind.HSPG and cell.theoretical_schedule:
        overrides["theoretical_schedule"] = True

    N = problem.num_instances
    if cell.experiment == "synth":
        config = synthetic_defaults(N, kind, **overrides)
        if kind is SolverKind.HSPG:
            config = config.replace(epsilon=cell.epsilon)
        return config
    return logreg_defaults(N, kind, epsilon=cell.epsilon if kind is SolverKind.HSPG else 0.0, **overrides)


# =====================================================================
# Cells
# =====================================================================


def cell_dataset_info(cell: ExperimentCell, problem: Problem) -> dict:
    info = {"N": problem.num_instances, "n": problem.dimension}
    if cell.experiment == "synth":
        info["ratio"] = cell.ratio
    return info


def run_cell(cell: ExperimentCell, output_dir: str | Path, record_timing: bool = True) -> CellResult:
    """Runs one cell and writes its trace files.

    Parameters
    ----------
    cell : ExperimentCell
        The cell to run.
    output_dir : str | Path
        Experiment output directory; traces go to ``traces/`` below it.
    record_timing : bool, optional
        Whether wall time is recorded in the trace, by default True.

    Returns
    -------
    CellResult
        Final metrics, the trace path and the final iterate.
    """
    run_id = cell.run_id
    problem, partition, truth = load_cell_problem(cell)
    config = build_config(cell, problem)

    if config.solver_kind is SolverKind.RDA and cell.tune_gamma:
        gamma, _ = tune_rda_gamma(problem, partition, config)
        config = config.replace(rda_gamma=gamma)

    tuner = None
    if config.solver_kind is SolverKind.HSPG and cell.tune_epsilon:
        tuner = make_epsilon_tuner(problem, partition, config)

    log.info(f"[{run_id}] running {config.label()} on {cell.dataset_id}")
    x, trace = run(
        config, problem, partition, dataset_id=cell.dataset_id, record_timing=record_timing, epsilon_tuner=tuner
    )
    trace.metadata["run_id"] = run_id
    trace.metadata["config_digest"] = config_digest(config.to_dict())

    iou = None
    if truth is not None:
        iou = iou_zero_groups(support_of(x, partition), truth)

    traces_dir = Path(output_dir) / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    stem = to_dir_run_id(run_id)
    trace_path = trace.to_csv(traces_dir / f"{stem}.csv")
    trace.to_json(traces_dir / f"{stem}.json")

    final = trace.final
    log.info(
        f"[{run_id}] finished: psi={final.psi:.6g} sparsity={final.group_sparsity:.2f}"
        + (f" iou={iou:.3f}" if iou is not None else "")
    )
    return CellResult(
        run_id=run_id,
        experiment=cell.experiment,
        dataset_id=cell.dataset_id,
        solver=cell.label(),
        seed=cell.seed,
        final_psi=final.psi,
        final_f=final.f,
        group_sparsity=final.group_sparsity,
        iou=iou,
        trace_path=str(trace_path),
        config=config.to_dict(),
        dataset_info=cell_dataset_info(cell, problem),
        x=x,
    )


def truncated_result(result: CellResult, cell: ExperimentCell, threshold: float) -> CellResult:
    """Starred row: the cell's final iterate after magnitude truncation."""
    problem, partition, truth = load_cell_problem(cell)
    x = truncate_by_magnitude(result.x, partition, threshold)
    f = problem.full_value(x)
    lam = result.config["lam"]
    return CellResult(
        run_id=f"{result.run_id}*",
        experiment=result.experiment,
        dataset_id=result.dataset_id,
        solver=f"{result.solver}*",
        seed=result.seed,
        final_psi=f + lam * omega(x, partition),
        final_f=f,
        group_sparsity=group_sparsity_ratio(x, partition),
        iou=None if truth is None else iou_zero_groups(support_of(x, partition), truth),
        trace_path="",
        config={**result.config, "truncate": threshold},
        dataset_info=result.dataset_info,
        x=x,
    )


# =====================================================================
# Experiments
# =====================================================================


def summary_frame(results: list[CellResult]) -> pd.DataFrame:
    """One summary row per result, columns depending on the experiment."""
    rows = []
    for r in results:
        row = {"dataset": r.dataset_id, **r.dataset_info, "solver": r.solver, "seed": r.seed}
        if r.experiment == "synth":
            row.update({"final_psi": r.final_psi, "group_sparsity": r.group_sparsity, "iou": r.iou})
        else:
            row.update({"final_psi": r.final_psi, "final_f": r.final_f, "group_sparsity": r.group_sparsity})
        rows.append(row)
    return pd.DataFrame(rows)


def render_table(df: pd.DataFrame) -> str:
    return tabulate(df, headers="keys", tablefmt="grid", showindex=False, floatfmt=".6g", missingval="-")


def write_manifest(spec: ExperimentSpec, results: list[CellResult], output_dir: str | Path) -> Path:
    """Writes manifest.json: the experiment spec, every resolved cell config and digests."""
    runs = [
        {
            "run_id": r.run_id,
            "solver": r.solver,
            "dataset_id": r.dataset_id,
            "seed": r.seed,
            "config": r.config,
            "config_digest": config_digest(r.config),
        }
        for r in results
    ]
    manifest = {
        "package_version": __version__,
        "experiment": spec.experiment,
        "spec": spec.to_dict(),
        "runs": runs,
        "config_digest": config_digest({"spec": spec.to_dict(), "runs": [r["config"] for r in runs]}),
    }
    path = Path(output_dir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def finish_experiment(spec: ExperimentSpec, results: list[CellResult]) -> pd.DataFrame:
    """Writes summary.csv and the manifest, and returns the summary frame."""
    output_dir = Path(spec.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    df = summary_frame(results)
    df.to_csv(output_dir / "summary.csv", index=False, float_format="%.17g")
    write_manifest(spec, results, output_dir)
    return df


def run_experiment(spec: ExperimentSpec) -> tuple[pd.DataFrame, list[CellResult]]:
    """Runs every cell of `spec` sequentially and writes the artifacts.

    With ``truncate`` set on a logreg spec, truncated copies of the Prox-SG
    and Prox-SVRG results are appended as starred rows.
    """
    cells = expand_cells(spec)
    log.info(f"{spec.experiment}: {len(cells)} cell(s) -> {spec.output_dir}")
    results = []
    for cell in cells:
        result = run_cell(cell, spec.output_dir, record_timing=spec.record_timing)
        results.append(result)
        if spec.truncate is not None and cell.solver in TRUNCATABLE:
            results.append(truncated_result(result, cell, spec.truncate))
    return finish_experiment(spec, results), results


def run_synth_recovery(spec: ExperimentSpec) -> tuple[pd.DataFrame, list[CellResult]]:
    if spec.experiment != "synth":
        raise ConfigError(f"run_synth_recovery needs a synth spec, got {spec.experiment!r}")
    return run_experiment(spec)


def run_logreg(spec: ExperimentSpec) -> tuple[pd.DataFrame, list[CellResult]]:
    if spec.experiment != "logreg":
        raise ConfigError(f"run_logreg needs a logreg spec, got {spec.experiment!r}")
    return run_experiment(spec)
