"""
check_runs.py
--------------------
Reports the state of the run registry: run counts per status and,
optionally, a per-run status table.

Usage:
    python scripts/check_runs.py
    python scripts/check_runs.py --show-table --status error
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------
import argparse
import sys
from pathlib import Path

from tabulate import tabulate

from hspg_ops.config import DB_PATH
from hspg_ops.db import RUN_STATUSES, count_runs_by_status, db_fetch_all, get_runs_by_status, open_registry
from hspg_ops.logging import get_logger

# ---------------------------------------------------------------------
# Logger
# ---------------------------------------------------------------------
log = get_logger("check_runs")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Summarize the run registry.")
    parser.add_argument("--db-path", type=Path, default=DB_PATH, help=f"Path to database (default: {DB_PATH})")
    parser.add_argument("--status", choices=RUN_STATUSES, help="Only list runs in this status")
    parser.add_argument("--show-table", action="store_true", help="Display per-run status table")
    args = parser.parse_args(argv)

    if not args.db_path.exists():
        log.error(f"No registry at {args.db_path}")
        return 2

    with open_registry(args.db_path) as conn:
        counts = count_runs_by_status(conn)
        if args.status:
            rows = get_runs_by_status(conn, args.status)
        else:
            rows = db_fetch_all(conn, "SELECT * FROM runs ORDER BY run_id")

    print(f"Runs in registry: {sum(counts.values())}")
    for status, n in counts.items():
        print(f"  {status:<12}{n}")

    if args.show_table and rows:
        table = [
            [r["run_id"], r["status"], r["final_psi"], r["group_sparsity"], r["error_message"] or ""]
            for r in rows
        ]
        print(tabulate(table, headers=["RUN", "STATUS", "PSI", "SPARSITY", "ERROR"], tablefmt="grid"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
