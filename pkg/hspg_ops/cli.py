"""
cli.py
--------------------
Command-line entry point (``hspg``) for the benchmark protocols and the
property suites.

Usage:
------
hspg synth-recovery --N 10000 --n 1000 --groups 10 --ratio 0.5 --solver hspg
hspg logreg --dataset data/a9a --epsilon 0 0.05 --truncate 0.01
hspg sweep --experiment synth --ratios 0.1 0.3 0.5 --workers 4
hspg verify --suite sufficient_decrease

Exit codes:
-----------
0 success, 1 usage or configuration error, 2 data or I/O error (including
failed sweep cells), 3 verification failure.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import argparse
import sys
from pathlib import Path

from hspg_ops import __version__
from hspg_ops.checks.summary import SUITE_ALIASES, SUITES, all_passed, run_suites, summarize_results
from hspg_ops.config import (
    A9A_PATH,
    DB_PATH,
    LOGREG_EPSILONS,
    RESULTS_DIR,
    SYNTH_NUM_GROUPS,
    SYNTH_RATIOS,
)
from hspg_ops.errors import ConfigError, DataError, UsageError, VerificationError
from hspg_ops.experiments import ExperimentSpec, render_table, run_logreg, run_synth_recovery
from hspg_ops.logging import get_logger, set_verbosity
from hspg_ops.solvers import SCHEDULE_KINDS, SWITCH_RULES, SolverKind

log = get_logger(__name__)

SOLVER_CHOICES = [k.value for k in SolverKind]

# =====================================================================
# Parser
# =====================================================================


class _Parser(argparse.ArgumentParser):
    """Routes argparse errors through UsageError so they exit with 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _ratio(value: str) -> float:
    try:
        ratio = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratio {value!r}") from None
    if not 0.0 <= ratio <= 1.0:
        raise argparse.ArgumentTypeError(f"ratio must lie in [0, 1], got {value}")
    return ratio


def _epsilon(value: str) -> float:
    try:
        eps = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid epsilon {value!r}") from None
    if not 0.0 <= eps < 1.0:
        raise argparse.ArgumentTypeError(f"epsilon must lie in [0, 1), got {value}")
    return eps


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {value!r}") from None
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _nonnegative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {value!r}") from None
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return number


def _add_common(p: argparse.ArgumentParser, default_dir: str):
    p.add_argument("--output-dir", type=Path, default=RESULTS_DIR / default_dir, help="Where artifacts are written.")
    p.add_argument("--no-timing", action="store_true", help="Leave wall_seconds empty (byte-identical traces).")
    p.add_argument("--tune-epsilon", action="store_true", help="Tune epsilon at the HSPG stage switch.")
    p.add_argument("--theoretical-schedule", action="store_true", help="alpha/t and growing batches after the switch.")

    o = p.add_argument_group("solver overrides (unset fields take the protocol defaults)")
    o.add_argument("--lam", type=float, help="Regularization weight.")
    o.add_argument("--alpha", type=float, help="Initial step size (default 0.1 synthetic, 1/L logistic).")
    o.add_argument("--batch-size", type=_positive_int)
    o.add_argument("--max-epochs", type=_nonnegative_int)
    o.add_argument("--switch-epochs", type=_nonnegative_int, help="HSPG: Prox-SG epochs before the switch.")
    o.add_argument("--switch-rule", choices=SWITCH_RULES, help="HSPG: fixed step count or stationarity test.")
    o.add_argument("--schedule", choices=SCHEDULE_KINDS, help="Step size schedule.")
    o.add_argument("--decay", type=float, help="Piecewise schedule decay factor.")
    o.add_argument("--period", type=_positive_int, help="Piecewise schedule period in epochs.")
    o.add_argument("--rda-gamma", type=float)
    o.add_argument("--svrg-inner-loop", type=_positive_int)


def _add_verbosity(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("-v", "--verbose", action="store_true")
    g.add_argument("-q", "--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hspg", description="HSPG group-sparsity benchmarks.", allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-recovery", help="Synthetic group-lasso recovery.", allow_abbrev=False)
    p.add_argument("--N", type=_positive_int, default=10000, help="Number of instances.")
    p.add_argument("--n", type=_positive_int, default=1000, help="Number of features.")
    p.add_argument("--groups", type=_positive_int, default=SYNTH_NUM_GROUPS)
    p.add_argument("--ratio", type=_ratio, action="append", help="Zero-group ratio of x* (repeatable).")
    p.add_argument("--solver", choices=SOLVER_CHOICES, action="append", help="Solver (repeatable, default hspg).")
    p.add_argument("--epsilon", type=_epsilon, help="HSPG epsilon (default 0.05).")
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    _add_common(p, "synth-recovery")
    _add_verbosity(p)

    p = sub.add_parser("logreg", help="LIBSVM logistic regression.", allow_abbrev=False)
    p.add_argument("--dataset", type=Path, default=A9A_PATH, help="LIBSVM file.")
    p.add_argument("--solver", choices=SOLVER_CHOICES, action="append", help="Solver (repeatable, default all).")
    p.add_argument("--epsilon", type=_epsilon, nargs="+", default=list(LOGREG_EPSILONS), help="HSPG epsilons.")
    p.add_argument("--truncate", type=float, help="Add truncated prox_sg*/prox_svrg* rows at this threshold.")
    p.add_argument("--tune-gamma", action="store_true", help="Tune the RDA gamma over powers of ten.")
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    _add_common(p, "logreg")
    _add_verbosity(p)

    p = sub.add_parser("sweep", help="Run a grid of cells in parallel through Prefect.", allow_abbrev=False)
    p.add_argument("--experiment", choices=["synth", "logreg"], required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--solvers", choices=SOLVER_CHOICES, nargs="+", default=None)
    p.add_argument("--seeds", type=_nonnegative_int, nargs="+", default=[0])
    p.add_argument("--N", type=_positive_int, default=10000)
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--groups", type=_positive_int, default=SYNTH_NUM_GROUPS)
    p.add_argument("--ratios", type=_ratio, nargs="+", default=list(SYNTH_RATIOS))
    p.add_argument("--dataset", type=Path, default=A9A_PATH)
    p.add_argument(
        "--epsilons", type=_epsilon, nargs="+", help="HSPG epsilons (logreg, default 0 0.05; synth takes one value)."
    )
    p.add_argument("--db-path", type=Path, default=DB_PATH, help="Run registry database.")
    _add_common(p, "sweep")
    _add_verbosity(p)

    p = sub.add_parser("verify", help="Run the property suites.", allow_abbrev=False)
    p.add_argument("--suite", choices=[*SUITES, *SUITE_ALIASES], action="append", help="Suite to run (repeatable, default all).")
    p.add_argument("--dataset", type=Path, default=A9A_PATH, help="Logistic dataset for the decrease suite.")
    p.add_argument("--no-table", action="store_true", help="Only print the pass count.")
    _add_verbosity(p)

    return parser


def _overrides(args) -> dict:
    keys = (
        "lam", "alpha", "batch_size", "max_epochs", "switch_epochs", "switch_rule",
        "schedule", "decay", "period", "rda_gamma", "svrg_inner_loop",
    )
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "epsilon", None) is not None and args.command == "synth-recovery":
        overrides["epsilon"] = args.epsilon
    return overrides


def _require_dataset(path: Path):
    if not Path(path).is_file():
        raise DataError(f"dataset not found: {path}")


# =====================================================================
# Subcommands
# =====================================================================


def cmd_synth_recovery(args) -> int:
    spec = ExperimentSpec(
        experiment="synth",
        solvers=tuple(args.solver or ["hspg"]),
        seeds=(args.seed,),
        output_dir=args.output_dir,
        overrides=_overrides(args),
        record_timing=not args.no_timing,
        tune_epsilon=args.tune_epsilon,
        theoretical_schedule=args.theoretical_schedule,
        N=args.N,
        n=args.n,
        groups=args.groups,
        ratios=tuple(args.ratio or [0.5]),
    )
    df, _ = run_synth_recovery(spec)
    print(render_table(df))
    return 0


def cmd_logreg(args) -> int:
    _require_dataset(args.dataset)
    if args.truncate is not None and args.truncate < 0:
        raise UsageError(f"--truncate must be nonnegative, got {args.truncate}")
    spec = ExperimentSpec(
        experiment="logreg",
        solvers=tuple(args.solver or SOLVER_CHOICES),
        seeds=(args.seed,),
        output_dir=args.output_dir,
        overrides=_overrides(args),
        record_timing=not args.no_timing,
        tune_epsilon=args.tune_epsilon,
        theoretical_schedule=args.theoretical_schedule,
        dataset=args.dataset,
        epsilons=tuple(args.epsilon),
        truncate=args.truncate,
        tune_gamma=args.tune_gamma,
    )
    df, _ = run_logreg(spec)
    print(render_table(df))
    return 0


def cmd_sweep(args) -> int:
    overrides = _overrides(args)
    if args.experiment == "synth" and args.epsilons is not None:
        if len(args.epsilons) > 1:
            given = " ".join(f"{eps:g}" for eps in args.epsilons)
            raise UsageError(f"synth sweeps run a single HSPG epsilon, got --epsilons {given}")
        overrides["epsilon"] = args.epsilons[0]
    if args.experiment == "logreg":
        _require_dataset(args.dataset)

    # prefect is only imported when a sweep is requested
    from flows.sweep import run_sweep

    default_solvers = ["hspg", "prox_sg"] if args.experiment == "synth" else SOLVER_CHOICES
    spec = ExperimentSpec(
        experiment=args.experiment,
        solvers=tuple(args.solvers or default_solvers),
        seeds=tuple(args.seeds),
        output_dir=args.output_dir,
        overrides=overrides,
        record_timing=not args.no_timing,
        tune_epsilon=args.tune_epsilon,
        theoretical_schedule=args.theoretical_schedule,
        N=args.N if args.experiment == "synth" else None,
        n=args.n if args.experiment == "synth" else None,
        groups=args.groups if args.experiment == "synth" else None,
        ratios=tuple(args.ratios) if args.experiment == "synth" else (),
        dataset=args.dataset if args.experiment == "logreg" else None,
        epsilons=tuple(args.epsilons or LOGREG_EPSILONS),
    )
    summary = run_sweep(spec, workers=args.workers, db_path=args.db_path)
    if summary["table"]:
        print(summary["table"])
    if summary["failed"]:
        log.error(f"{len(summary['failed'])} cell(s) failed: {', '.join(summary['failed'])}")
        return 2
    return 0


def cmd_verify(args) -> int:
    records = run_suites(args.suite, dataset=args.dataset)
    print(summarize_results(records, show_table=not args.no_table))
    if not all_passed(records):
        raise VerificationError("one or more property suites failed")
    return 0


COMMANDS = {
    "synth-recovery": cmd_synth_recovery,
    "logreg": cmd_logreg,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


# =====================================================================
# CLI Entry
# =====================================================================


def main(argv: list[str] | None = None) -> int:
    """Parses `argv`, runs the subcommand and maps errors onto exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        set_verbosity(verbose=getattr(args, "verbose", False), quiet=getattr(args, "quiet", False))
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as e:
        log.error(str(e))
        return 1
    except (DataError, OSError) as e:
        log.error(str(e))
        return 2
    except VerificationError as e:
        log.error(str(e))
        return 3


if __name__ == "__main__":
    sys.exit(main())
