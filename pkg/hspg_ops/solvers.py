"""
solvers.py
--------------------
HSPG and its baselines for min_x f(x) + lam * Omega(x).

HSPG runs in two stages. The initialization stage takes Prox-SG steps until
the switch rule fires; the group-sparsity stage then takes Half-Space steps,
which only ever move nonzero groups and project a group onto zero as soon as
its trial point leaves the half-space anchored at the current iterate. Once a
group is zero it stays zero.

Baselines: Prox-SG, RDA (dual averaging with a sqrt(k) proximal term) and
Prox-SVRG. A deterministic proximal gradient descent serves as a reference
solver for the baselines.

Every run is single threaded and a pure function of (config, problem, x0):
two runs with equal seeds produce identical traces.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

from __future__ import annotations

import dataclasses
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from hspg_ops import regularizer
from hspg_ops.config import (
    EPSILON_TUNING_CAP,
    EPSILON_TUNING_RHO,
    EPSILON_TUNING_STEP,
    FALLBACK_STEP_SIZE,
    MAX_EPOCHS,
    RDA_GAMMA,
    RDA_GAMMA_GRID,
    STATIONARITY_RTOL,
    STATIONARITY_WINDOW,
    SWITCH_EPOCHS,
    SYNTH_BATCH_SIZE,
    SYNTH_EPSILON,
    SYNTH_STEP_SIZE,
    logreg_batch_size,
    paper_lambda,
)
from hspg_ops.data import RNG_ALGORITHM, BatchSchedule, batch_stream, next_batch
from hspg_ops.errors import ConfigError
from hspg_ops.groups import GroupPartition, nonzero_group_mask
from hspg_ops.logging import get_logger
from hspg_ops.metrics import RunTrace, TraceRecord, group_sparsity_ratio
from hspg_ops.problems import Problem
from hspg_ops.regularizer import Parameters, gradient_mapping, omega, prox_group_l2

log = get_logger(__name__)

RDA_VARIANT = "group-rda: x = -(sqrt(k)/gamma) * groupshrink(mean_grad, lam); bias = -(sqrt(k)/gamma) * mean_grad_bias"

# =====================================================================
# Configuration
# =====================================================================


class SolverKind(str, Enum):
    HSPG = "hspg"
    PROX_SG = "prox_sg"
    RDA = "rda"
    PROX_SVRG = "prox_svrg"


class Stage(str, Enum):
    INITIALIZATION = "initialization"
    GROUP_SPARSITY = "group_sparsity"


SWITCH_RULES = ("fixed", "stationarity")
SCHEDULE_KINDS = ("constant", "piecewise")


def _is_number(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


@dataclass(frozen=True)
class StepSchedule:
    """Step size alpha per epoch.

    `initial` None means 1/L from the problem's Lipschitz estimate. The
    piecewise schedule multiplies by `decay` every `period` epochs.
    """

    kind: str = "constant"
    initial: float | None = None
    decay: float = 0.1
    period: int = 30

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigError(f"step schedule kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}")
        if self.initial is not None and (not _is_number(self.initial) or not self.initial > 0):
            raise ConfigError(f"initial step size must be positive, got {self.initial!r}")
        if not _is_number(self.decay) or not 0 < self.decay <= 1:
            raise ConfigError(f"decay must lie in (0, 1], got {self.decay!r}")
        if not _is_int(self.period) or self.period < 1:
            raise ConfigError(f"period must be a positive integer, got {self.period!r}")

    def alpha_at(self, epoch_index: int, base: float) -> float:
        """Step size for the 0-based epoch `epoch_index` given the resolved base."""
        if self.kind == "constant":
            return base
        return base * self.decay ** (epoch_index // self.period)


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of one solver run.

    Fields that only make sense for one solver kind must stay at None / their
    default for the other kinds: `epsilon`, `n_p`, a non-fixed `switch_rule`
    and `theoretical_schedule` are HSPG-only, `rda_gamma` is RDA-only and
    `svrg_inner_loop` is Prox-SVRG-only.

    `n_p` counts steps; None means the switch never happens (infinity).
    """

    solver_kind: SolverKind
    lam: float
    batch_size: int
    max_epochs: int = MAX_EPOCHS
    seed: int = 0
    step_schedule: StepSchedule = field(default_factory=StepSchedule)
    epsilon: float | None = None
    n_p: int | None = None
    switch_rule: str = "fixed"
    stationarity_window: int = STATIONARITY_WINDOW
    stationarity_rtol: float = STATIONARITY_RTOL
    theoretical_schedule: bool = False
    rda_gamma: float | None = None
    svrg_inner_loop: int | None = None
    fallback_alpha: float = FALLBACK_STEP_SIZE

    def __post_init__(self):
        try:
            object.__setattr__(self, "solver_kind", SolverKind(self.solver_kind))
        except ValueError:
            raise ConfigError(f"Unknown solver kind {self.solver_kind!r}") from None
        if isinstance(self.step_schedule, dict):
            object.__setattr__(self, "step_schedule", StepSchedule(**self.step_schedule))

        if not _is_number(self.lam) or self.lam < 0:
            raise ConfigError(f"lambda must be a nonnegative number, got {self.lam!r}")
        if not _is_int(self.batch_size) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not _is_int(self.max_epochs) or self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be a nonnegative integer, got {self.max_epochs!r}")
        if not _is_int(self.seed) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not _is_number(self.fallback_alpha) or self.fallback_alpha <= 0:
            raise ConfigError(f"fallback_alpha must be positive, got {self.fallback_alpha!r}")
        if self.switch_rule not in SWITCH_RULES:
            raise ConfigError(f"switch_rule must be one of {SWITCH_RULES}, got {self.switch_rule!r}")
        if not _is_int(self.stationarity_window) or self.stationarity_window < 1:
            raise ConfigError(f"stationarity_window must be a positive integer, got {self.stationarity_window!r}")
        if not _is_number(self.stationarity_rtol) or self.stationarity_rtol < 0:
            raise ConfigError(f"stationarity_rtol must be nonnegative, got {self.stationarity_rtol!r}")

        kind = self.solver_kind
        if kind is SolverKind.HSPG:
            if self.epsilon is not None and (not _is_number(self.epsilon) or not 0 <= self.epsilon < 1):
                raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")
            if self.n_p is not None and (not _is_int(self.n_p) or self.n_p < 0):
                raise ConfigError(f"n_p must be a nonnegative integer or None, got {self.n_p!r}")
        else:
            hspg_only = {
                "epsilon": self.epsilon is not None,
                "n_p": self.n_p is not None,
                "switch_rule": self.switch_rule != "fixed",
                "theoretical_schedule": self.theoretical_schedule,
            }
            offending = [name for name, is_set in hspg_only.items() if is_set]
            if offending:
                raise ConfigError(f"{kind.value} does not accept HSPG-only fields: {', '.join(offending)}")

        if kind is SolverKind.RDA:
            gamma = RDA_GAMMA if self.rda_gamma is None else self.rda_gamma
            if not _is_number(gamma) or gamma <= 0:
                raise ConfigError(f"rda_gamma must be positive, got {self.rda_gamma!r}")
        elif self.rda_gamma is not None:
            raise ConfigError(f"rda_gamma only applies to rda, not {kind.value}")

        if kind is SolverKind.PROX_SVRG:
            if self.svrg_inner_loop is not None and (
                not _is_int(self.svrg_inner_loop) or self.svrg_inner_loop < 1
            ):
                raise ConfigError(f"svrg_inner_loop must be a positive integer, got {self.svrg_inner_loop!r}")
        elif self.svrg_inner_loop is not None:
            raise ConfigError(f"svrg_inner_loop only applies to prox_svrg, not {kind.value}")

    @property
    def epsilon_value(self) -> float:
        return 0.0 if self.epsilon is None else float(self.epsilon)

    @property
    def gamma_value(self) -> float:
        return RDA_GAMMA if self.rda_gamma is None else float(self.rda_gamma)

    def label(self) -> str:
        """Short display name, e.g. ``hspg(eps=0.05)``."""
        if self.solver_kind is SolverKind.HSPG:
            return f"hspg(eps={self.epsilon_value:g})"
        if self.solver_kind is SolverKind.RDA:
            return f"rda(gamma={self.gamma_value:g})"
        return self.solver_kind.value

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["solver_kind"] = self.solver_kind.value
        return doc


# =====================================================================
# Defaults
# =====================================================================

# override keys that edit the step schedule, mapped to StepSchedule fields
_SCHEDULE_KEYS = {"alpha": "initial", "schedule": "kind", "decay": "decay", "period": "period"}


def _apply_overrides(config: SolverConfig, overrides: dict, steps_per_epoch: int) -> SolverConfig:
    known = {f.name for f in dataclasses.fields(SolverConfig)}
    changes = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in _SCHEDULE_KEYS:
            changes["step_schedule"] = dataclasses.replace(
                changes.get("step_schedule", config.step_schedule), **{_SCHEDULE_KEYS[key]: value}
            )
        elif key == "switch_epochs":
            if not _is_int(value) or value < 0:
                raise ConfigError(f"switch_epochs must be a nonnegative integer, got {value!r}")
            changes["n_p"] = value * steps_per_epoch
        elif key in known:
            changes[key] = value
        else:
            raise ConfigError(f"Unknown solver override {key!r}")
    return config.replace(**changes) if changes else config


def _kind_fields(kind: SolverKind, epsilon: float | None, n_p: int) -> dict:
    if kind is SolverKind.HSPG:
        return {"epsilon": epsilon, "n_p": n_p}
    if kind is SolverKind.RDA:
        return {"rda_gamma": RDA_GAMMA}
    return {}


def synthetic_defaults(num_instances: int, solver_kind: SolverKind | str, **overrides) -> SolverConfig:
    """Group-lasso recovery defaults: lam = 100/N, batch 64, constant alpha 0.1,
    switch after 30 epochs, 60 epochs, epsilon 0.05.

    Raises
    ------
    ConfigError
        On an unknown or ill-typed override.
    """
    kind = SolverKind(solver_kind)
    steps_per_epoch = math.ceil(num_instances / SYNTH_BATCH_SIZE)
    config = SolverConfig(
        solver_kind=kind,
        lam=paper_lambda(num_instances),
        batch_size=SYNTH_BATCH_SIZE,
        max_epochs=MAX_EPOCHS,
        step_schedule=StepSchedule(kind="constant", initial=SYNTH_STEP_SIZE),
        **_kind_fields(kind, SYNTH_EPSILON, SWITCH_EPOCHS * steps_per_epoch),
    )
    if "batch_size" in overrides and overrides["batch_size"] is not None:
        steps_per_epoch = math.ceil(num_instances / overrides["batch_size"])
        if kind is SolverKind.HSPG and "n_p" not in overrides and "switch_epochs" not in overrides:
            overrides = {**overrides, "switch_epochs": SWITCH_EPOCHS}
    return _apply_overrides(config, overrides, steps_per_epoch)


def logreg_defaults(
    num_instances: int, solver_kind: SolverKind | str, epsilon: float = 0.0, **overrides
) -> SolverConfig:
    """Logistic-regression defaults: lam = 100/N, batch min{256, ceil(0.01N)},
    alpha = 1/L, switch after 30 epochs, 60 epochs.

    Raises
    ------
    ConfigError
        On an unknown or ill-typed override.
    """
    kind = SolverKind(solver_kind)
    batch = logreg_batch_size(num_instances)
    steps_per_epoch = math.ceil(num_instances / batch)
    config = SolverConfig(
        solver_kind=kind,
        lam=paper_lambda(num_instances),
        batch_size=batch,
        max_epochs=MAX_EPOCHS,
        step_schedule=StepSchedule(kind="constant", initial=None),
        **_kind_fields(kind, epsilon, SWITCH_EPOCHS * steps_per_epoch),
    )
    if "batch_size" in overrides and overrides["batch_size"] is not None:
        steps_per_epoch = math.ceil(num_instances / overrides["batch_size"])
        if kind is SolverKind.HSPG and "n_p" not in overrides and "switch_epochs" not in overrides:
            overrides = {**overrides, "switch_epochs": SWITCH_EPOCHS}
    return _apply_overrides(config, overrides, steps_per_epoch)


# =====================================================================
# State
# =====================================================================


@dataclass
class SvrgAnchor:
    x: Parameters
    full_grad: Parameters


@dataclass
class SolverState:
    """Mutable state of one solver run."""

    x: Parameters
    alpha: float
    k: int = 0
    epoch: int = 0
    stage: Stage = Stage.INITIALIZATION
    rda_accumulator: Parameters | None = None
    svrg_anchor: SvrgAnchor | None = None


StepCallback = Callable[[SolverState], None]


def resolve_base_alpha(config: SolverConfig, problem: Problem) -> float:
    """Initial step size: the configured one, else 1/L, else the fallback when L is 0."""
    if config.step_schedule.initial is not None:
        return float(config.step_schedule.initial)
    lipschitz = problem.lipschitz_estimate()
    if lipschitz <= 0 or not math.isfinite(lipschitz):
        log.warning(f"Lipschitz estimate is {lipschitz}; falling back to alpha={config.fallback_alpha}")
        return float(config.fallback_alpha)
    return 1.0 / lipschitz


def _bias_step(x: Parameters, grad: Parameters, alpha: float) -> float | None:
    if x.bias is None:
        return None
    return x.bias - alpha * (grad.bias or 0.0)


# =====================================================================
# Steps
# =====================================================================


def prox_sg_step(
    state: SolverState, problem: Problem, partition: GroupPartition, config: SolverConfig, batch
) -> Parameters:
    """One stochastic proximal gradient step.

    x_{k+1} = prox(x_k - alpha * grad f_B(x_k), alpha * lam); the bias takes a
    plain gradient step.
    """
    grad = problem.batch_gradient(state.x, batch)
    trial = Parameters(state.x.x - state.alpha * grad.x)
    proxed = prox_group_l2(trial, partition, state.alpha * config.lam)
    return Parameters(proxed.x, _bias_step(state.x, grad, state.alpha))


def half_space_step(
    state: SolverState, problem: Problem, partition: GroupPartition, config: SolverConfig, batch
) -> Parameters:
    """One Half-Space step.

    The gradient of psi restricted to the nonzero groups of x_k drives an SGD
    trial point, zero groups of x_k stay zero, and the trial point is projected
    with the half-space rule anchored at x_k. The zero groups of x_k are a
    subset of the zero groups of the result.
    """
    grad = problem.batch_gradient(state.x, batch)
    support = partition.expand(nonzero_group_mask(state.x, partition))
    grad_psi = grad.x + config.lam * regularizer.grad_omega_on_support(state.x, partition).x
    trial = np.where(support, state.x.x - state.alpha * grad_psi, 0.0)
    projected = regularizer.half_space_project(
        Parameters(trial), state.x, partition, config.epsilon_value
    )
    return Parameters(projected.x, _bias_step(state.x, grad, state.alpha))


def rda_step(
    state: SolverState, problem: Problem, config: SolverConfig, batch, partition: GroupPartition
) -> Parameters:
    """One regularized dual averaging step.

    Updates the running gradient mean stored in ``state.rda_accumulator`` with
    t = k + 1, then returns
    x = -(sqrt(t)/gamma) * max{0, 1 - lam/||mean_g||} * mean_g per group.

    Raises
    ------
    ValueError
        If gamma is not positive.
    """
    gamma = config.gamma_value
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")

    t = state.k + 1
    grad = problem.batch_gradient(state.x, batch)
    prev = state.rda_accumulator
    if prev is None:
        mean = grad
    else:
        mean_x = ((t - 1) * prev.x + grad.x) / t
        mean_b = None
        if grad.bias is not None:
            mean_b = ((t - 1) * (prev.bias or 0.0) + grad.bias) / t
        mean = Parameters(mean_x, mean_b)
    state.rda_accumulator = mean

    scale = math.sqrt(t) / gamma
    shrunk = prox_group_l2(Parameters(mean.x), partition, config.lam)
    bias = None
    if state.x.bias is not None:
        bias = -scale * (mean.bias or 0.0)
    return Parameters(-scale * shrunk.x, bias)


# =====================================================================
# Switch rule
# =====================================================================


def stationarity_switch_test(values, window_size: int, rtol: float) -> bool:
    """True when the means of the last two windows of psi values agree.

    |mean(last) - mean(previous)| <= rtol * |mean(previous)|. Returns False
    while fewer than 2 * window_size values are available.
    """
    if window_size < 1:
        raise ValueError(f"window_size must be positive, got {window_size}")
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2 * window_size:
        return False
    last = float(np.mean(values[-window_size:]))
    previous = float(np.mean(values[-2 * window_size : -window_size]))
    return abs(last - previous) <= rtol * abs(previous)


# =====================================================================
# Runs
# =====================================================================


def _check_inputs(problem: Problem, partition: GroupPartition, x0: Parameters | None) -> Parameters:
    if partition.n != problem.dimension:
        raise ValueError(
            f"Partition covers n={partition.n} but the problem has dimension {problem.dimension}"
        )
    if x0 is None:
        return Parameters.zeros(problem.dimension, has_bias=problem.has_bias)
    partition.check_dimension(x0.x)
    if problem.has_bias and x0.bias is None:
        return Parameters(x0.x.copy(), 0.0)
    return x0.copy()


def _record(
    epoch: int,
    state: SolverState,
    problem: Problem,
    partition: GroupPartition,
    config: SolverConfig,
    started: float | None,
) -> TraceRecord:
    f, grad = problem.full_value_grad(state.x)
    psi = f + config.lam * omega(state.x, partition)
    xi = gradient_mapping(state.x, state.alpha, grad, partition, config.lam)
    return TraceRecord(
        epoch=epoch,
        stage=state.stage.value,
        psi=psi,
        f=f,
        group_sparsity=group_sparsity_ratio(state.x, partition),
        grad_map_norm=xi.norm(),
        wall_seconds=math.nan if started is None else time.perf_counter() - started,
    )


def _metadata(
    config: SolverConfig, problem: Problem, dataset_id: str, base_alpha: float
) -> dict:
    meta = {
        "solver_kind": config.solver_kind.value,
        "label": config.label(),
        "dataset_id": dataset_id,
        "seed": config.seed,
        "config": config.to_dict(),
        "problem": problem.describe(),
        "base_alpha": base_alpha,
        "rng": RNG_ALGORITHM,
        "sampling": BatchSchedule(problem.num_instances, config.batch_size, config.seed).scheme,
    }
    if config.solver_kind is SolverKind.HSPG:
        meta["switch_rule"] = config.switch_rule
        if config.switch_rule == "stationarity":
            meta["stationarity_window"] = config.stationarity_window
            meta["stationarity_rtol"] = config.stationarity_rtol
        meta["theoretical_schedule"] = config.theoretical_schedule
    if config.solver_kind is SolverKind.RDA:
        meta["rda_variant"] = RDA_VARIANT
    return meta


def run(
    config: SolverConfig,
    problem: Problem,
    partition: GroupPartition,
    x0: Parameters | None = None,
    dataset_id: str = "",
    on_step: StepCallback | None = None,
    record_timing: bool = True,
    epsilon_tuner: Callable[[SolverState], float] | None = None,
) -> tuple[Parameters, RunTrace]:
    """Runs one solver for `config.max_epochs` epochs.

    Parameters
    ----------
    config : SolverConfig
        Solver kind and hyperparameters.
    problem : Problem
        The objective.
    partition : GroupPartition
        Group partition of the regularized coordinates.
    x0 : Parameters | None, optional
        Starting point, by default zero.
    dataset_id : str, optional
        Recorded in the trace metadata.
    on_step : StepCallback | None, optional
        Called with the state after every step.
    record_timing : bool, optional
        Whether wall time is recorded; NaN otherwise, by default True.
    epsilon_tuner : Callable | None, optional
        HSPG only. Called with the warm state at the stage switch; the
        returned epsilon is used for the group-sparsity stage.

    Returns
    -------
    tuple[Parameters, RunTrace]
        The final iterate and the per-epoch trace (epoch 0 is the start point).

    Raises
    ------
    ValueError
        If dimensions of the problem, partition and x0 disagree.
    """
    if config.solver_kind is SolverKind.PROX_SVRG:
        return prox_svrg_run(
            config, problem, partition, x0, dataset_id=dataset_id, on_step=on_step, record_timing=record_timing
        )

    x = _check_inputs(problem, partition, x0)
    base_alpha = resolve_base_alpha(config, problem)
    schedule = BatchSchedule(problem.num_instances, config.batch_size, config.seed)
    state = SolverState(x=x, alpha=config.step_schedule.alpha_at(0, base_alpha))
    trace = RunTrace(metadata=_metadata(config, problem, dataset_id, base_alpha))
    run_id = dataset_id or config.label()
    started = time.perf_counter() if record_timing else None

    is_hspg = config.solver_kind is SolverKind.HSPG
    switch_step: int | None = None
    switch_alpha = state.alpha
    stage2_epochs = 0

    def maybe_switch(at_epoch_start: bool):
        nonlocal switch_step, switch_alpha, config
        if not is_hspg or state.stage is Stage.GROUP_SPARSITY:
            return
        if config.switch_rule == "fixed":
            fire = config.n_p is not None and state.k >= config.n_p
        else:
            fire = at_epoch_start and stationarity_switch_test(
                trace.psi_values(), config.stationarity_window, config.stationarity_rtol
            )
        if not fire:
            return
        state.stage = Stage.GROUP_SPARSITY
        switch_step = state.k
        switch_alpha = state.alpha
        if epsilon_tuner is not None:
            tuned = epsilon_tuner(state)
            config = config.replace(epsilon=tuned)
            trace.metadata["tuned_epsilon"] = tuned
        log.info(f"[{run_id}] switched to group-sparsity stage at k={state.k} (epoch {state.epoch})")

    trace.append(_record(0, state, problem, partition, config, started))

    for epoch in range(1, config.max_epochs + 1):
        state.epoch = epoch
        maybe_switch(at_epoch_start=True)

        epoch_schedule = schedule
        if state.stage is Stage.GROUP_SPARSITY and config.theoretical_schedule:
            stage2_epochs += 1
            state.alpha = switch_alpha / stage2_epochs
            epoch_schedule = schedule.resized(min(problem.num_instances, config.batch_size * stage2_epochs))
        else:
            state.alpha = config.step_schedule.alpha_at(epoch - 1, base_alpha)

        for step in range(epoch_schedule.batches_per_epoch):
            maybe_switch(at_epoch_start=False)
            batch = next_batch(epoch_schedule, epoch - 1, step)

            if config.solver_kind is SolverKind.RDA:
                state.x = rda_step(state, problem, config, batch, partition)
            elif state.stage is Stage.GROUP_SPARSITY:
                state.x = half_space_step(state, problem, partition, config, batch)
            else:
                state.x = prox_sg_step(state, problem, partition, config, batch)

            state.k += 1
            if on_step is not None:
                on_step(state)

        trace.append(_record(epoch, state, problem, partition, config, started))
        log.debug(
            f"[{run_id}] epoch {epoch}: psi={trace.final.psi:.6g} sparsity={trace.final.group_sparsity:.2f}"
        )

    if is_hspg:
        trace.metadata["switch_step"] = switch_step
        trace.metadata["epsilon"] = config.epsilon_value
    return state.x, trace


def prox_svrg_run(
    config: SolverConfig,
    problem: Problem,
    partition: GroupPartition,
    x0: Parameters | None = None,
    dataset_id: str = "",
    on_step: StepCallback | None = None,
    record_timing: bool = True,
) -> tuple[Parameters, RunTrace]:
    """Proximal SVRG for `config.max_epochs` epochs' worth of steps.

    Each outer loop snapshots the anchor x~ and its full gradient mu, then
    takes `svrg_inner_loop` steps (one epoch of batches by default) along
    v = grad f_B(x) - grad f_B(x~) + mu followed by the group prox. Trace
    records are taken every epoch's worth of steps.
    """
    if config.solver_kind is not SolverKind.PROX_SVRG:
        raise ConfigError(f"prox_svrg_run needs a prox_svrg config, got {config.solver_kind.value}")

    x = _check_inputs(problem, partition, x0)
    base_alpha = resolve_base_alpha(config, problem)
    schedule = BatchSchedule(problem.num_instances, config.batch_size, config.seed)
    steps_per_epoch = schedule.batches_per_epoch
    inner_loop = config.svrg_inner_loop or steps_per_epoch
    total_steps = config.max_epochs * steps_per_epoch

    state = SolverState(x=x, alpha=config.step_schedule.alpha_at(0, base_alpha))
    trace = RunTrace(metadata=_metadata(config, problem, dataset_id, base_alpha))
    trace.metadata["svrg_inner_loop"] = inner_loop
    started = time.perf_counter() if record_timing else None
    trace.append(_record(0, state, problem, partition, config, started))

    stream = batch_stream(schedule)
    while state.k < total_steps:
        _, mu = problem.full_value_grad(state.x)
        state.svrg_anchor = SvrgAnchor(x=state.x.copy(), full_grad=mu)
        anchor = state.svrg_anchor.x

        for _ in range(inner_loop):
            if state.k >= total_steps:
                break
            epoch_index, _, batch = next(stream)
            state.epoch = epoch_index + 1
            state.alpha = config.step_schedule.alpha_at(epoch_index, base_alpha)

            grad = problem.batch_gradient(state.x, batch)
            grad_anchor = problem.batch_gradient(anchor, batch)
            v_x = grad.x - grad_anchor.x + mu.x
            trial = Parameters(state.x.x - state.alpha * v_x)
            proxed = prox_group_l2(trial, partition, state.alpha * config.lam)
            bias = None
            if state.x.bias is not None:
                v_b = (grad.bias or 0.0) - (grad_anchor.bias or 0.0) + (mu.bias or 0.0)
                bias = state.x.bias - state.alpha * v_b
            state.x = Parameters(proxed.x, bias)

            state.k += 1
            if on_step is not None:
                on_step(state)
            if state.k % steps_per_epoch == 0:
                trace.append(_record(state.k // steps_per_epoch, state, problem, partition, config, started))

    return state.x, trace


@dataclass(frozen=True)
class ProxGradientResult:
    x: Parameters
    iterations: int
    grad_map_norm: float
    converged: bool


def prox_gradient_descent(
    problem: Problem,
    partition: GroupPartition,
    lam: float,
    alpha: float,
    x0: Parameters | None = None,
    max_iter: int = 10_000,
    tol: float = 1e-8,
    on_step: Callable[[int, Parameters], None] | None = None,
) -> ProxGradientResult:
    """Deterministic full-batch proximal gradient descent.

    Iterates x <- prox(x - alpha * grad f(x), alpha * lam) until the gradient
    mapping norm at step alpha drops below `tol` or `max_iter` is reached.
    `on_step(i, x)` sees every new iterate.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    x = _check_inputs(problem, partition, x0)

    norm = math.inf
    for i in range(max_iter + 1):
        _, grad = problem.full_value_grad(x)
        norm = gradient_mapping(x, alpha, grad, partition, lam).norm()
        if norm < tol or i == max_iter:
            return ProxGradientResult(x=x, iterations=i, grad_map_norm=norm, converged=norm < tol)
        proxed = prox_group_l2(Parameters(x.x - alpha * grad.x), partition, alpha * lam)
        x = Parameters(proxed.x, _bias_step(x, grad, alpha))
        if on_step is not None:
            on_step(i + 1, x)
    return ProxGradientResult(x=x, iterations=max_iter, grad_map_norm=norm, converged=norm < tol)


# =====================================================================
# Tuning
# =====================================================================


def psi_value(problem: Problem, partition: GroupPartition, lam: float, x: Parameters) -> float:
    return problem.full_value(x) + lam * omega(x, partition)


def epsilon_candidates(step: float = EPSILON_TUNING_STEP, cap: float = EPSILON_TUNING_CAP) -> list[float]:
    """0, step, 2*step, ... up to the cap, rounded onto the exact decimal grid."""
    count = int(round(cap / step))
    return [round(i * step, 10) for i in range(count + 1)]


def tune_epsilon(
    problem: Problem,
    partition: GroupPartition,
    config: SolverConfig,
    warm_state: SolverState,
    batch=None,
    rho: float = EPSILON_TUNING_RHO,
    step: float = EPSILON_TUNING_STEP,
    cap: float = EPSILON_TUNING_CAP,
) -> float:
    """Epsilon from an increasing grid scan, kept while the first Half-Space
    step does not raise psi noticeably.

    From the warm state, each candidate takes one Half-Space step on the same
    batch. A candidate is accepted while its psi stays within
    psi_0 + rho * |psi_0|, psi_0 being the epsilon = 0 result. The scan
    raises epsilon by `step` and stops at the first rejection, returning the
    last accepted value; larger candidates past a rejection are never tried,
    even if one of them would pass.

    Parameters
    ----------
    problem, partition, config
        As for `run`; `config` must be an HSPG config.
    warm_state : SolverState
        State after the initialization stage.
    batch : array-like of int | None, optional
        Batch for the trial steps, by default the batch the run would use next.
    rho : float, optional
        Relative tolerance on the psi increase.

    Returns
    -------
    float
        The chosen epsilon.
    """
    if config.solver_kind is not SolverKind.HSPG:
        raise ConfigError("epsilon tuning needs an hspg config")
    if batch is None:
        schedule = BatchSchedule(problem.num_instances, config.batch_size, config.seed)
        spe = schedule.batches_per_epoch
        batch = next_batch(schedule, warm_state.k // spe, warm_state.k % spe)

    trial_state = dataclasses.replace(warm_state, stage=Stage.GROUP_SPARSITY)
    chosen = 0.0
    baseline = None
    for candidate in epsilon_candidates(step, cap):
        x_next = half_space_step(trial_state, problem, partition, config.replace(epsilon=candidate), batch)
        psi = psi_value(problem, partition, config.lam, x_next)
        if baseline is None:
            baseline = psi
            continue
        if psi > baseline + rho * abs(baseline):
            log.debug(f"epsilon={candidate:.2f} rejected: psi {psi:.6g} vs {baseline:.6g}")
            break
        chosen = candidate
    log.info(f"Tuned epsilon={chosen:.2f}")
    return chosen


def make_epsilon_tuner(
    problem: Problem, partition: GroupPartition, config: SolverConfig, rho: float = EPSILON_TUNING_RHO
) -> Callable[[SolverState], float]:
    """Adapts `tune_epsilon` to the `epsilon_tuner` hook of `run`."""

    def tuner(state: SolverState) -> float:
        return tune_epsilon(problem, partition, config, state, rho=rho)

    return tuner


def tune_rda_gamma(
    problem: Problem,
    partition: GroupPartition,
    config: SolverConfig,
    grid=RDA_GAMMA_GRID,
    x0: Parameters | None = None,
) -> tuple[float, dict[float, float]]:
    """Runs RDA for every gamma in `grid` and keeps the lowest final psi.

    Returns
    -------
    tuple[float, dict[float, float]]
        The best gamma and the final psi per gamma.
    """
    if config.solver_kind is not SolverKind.RDA:
        raise ConfigError("gamma tuning needs an rda config")
    if not grid:
        raise ConfigError("gamma grid is empty")

    results: dict[float, float] = {}
    for gamma in grid:
        _, trace = run(config.replace(rda_gamma=float(gamma)), problem, partition, x0, record_timing=False)
        results[float(gamma)] = trace.final.psi

    finite = {g: v for g, v in results.items() if math.isfinite(v)}
    if not finite:
        raise ConfigError("RDA diverged for every gamma in the grid")
    best = min(finite, key=finite.get)
    log.info(f"Tuned rda gamma={best:g} (psi={finite[best]:.6g})")
    return best, results
