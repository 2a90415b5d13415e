"""
db.py
--------------------
Run registry: a SQLite table tracking every benchmark cell through the
pending -> in_progress -> complete / error states.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import json
import sqlite3
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

RUN_STATUSES = ("pending", "in_progress", "complete", "error")

RUNS_SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
    run_id          TEXT PRIMARY KEY,
    experiment      TEXT NOT NULL,
    solver          TEXT NOT NULL,
    dataset_id      TEXT,
    seed            INTEGER,
    status          TEXT NOT NULL DEFAULT 'pending',
    config_json     TEXT,
    final_psi       REAL,
    final_f         REAL,
    group_sparsity  REAL,
    iou             REAL,
    trace_path      TEXT,
    error_message   TEXT,
    updated_at      TEXT
)
"""

# =====================================================================
# Fetching and executing database operations
# =====================================================================


def get_db_connection(db_path: str | Path) -> sqlite3.Connection:
    """Establishes a connection to the registry database.

    Parameters
    ----------
    db_path : str | Path
        Path to the sqlite database.

    Returns
    -------
    sqlite3.Connection
        An open connection with `sqlite3.Row` rows.
    """
    conn = sqlite3.connect(str(db_path))
    conn.row_factory = sqlite3.Row
    return conn


@contextmanager
def open_registry(db_path: str | Path):
    """Connection that commits on success, rolls back on error and is always closed."""
    conn = get_db_connection(db_path)
    try:
        with conn:
            yield conn
    finally:
        conn.close()


@contextmanager
def db_transaction(conn: sqlite3.Connection):
    """Commits on success and rolls back on any exception."""
    try:
        yield
        conn.commit()
    except Exception:
        conn.rollback()
        raise


def db_fetch_one(conn: sqlite3.Connection, query: str, params: tuple = ()) -> sqlite3.Row | None:
    cur = conn.execute(query, params)
    return cur.fetchone()


def db_fetch_all(conn: sqlite3.Connection, query: str, params: tuple = ()) -> list[sqlite3.Row]:
    cur = conn.execute(query, params)
    return cur.fetchall()


def db_execute(conn: sqlite3.Connection, query: str, params: tuple = (), commit: bool = False):
    """Executes the SQL query, committing when asked to."""
    conn.execute(query, params)
    if commit:
        conn.commit()


def init_registry(db_path: str | Path) -> Path:
    """Creates the registry file and the runs table when missing."""
    db_path = Path(db_path)
    db_path.parent.mkdir(parents=True, exist_ok=True)
    with open_registry(db_path) as conn:
        db_execute(conn, RUNS_SCHEMA)
    return db_path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# =====================================================================
# Record Getters/Setters
# =====================================================================


def register_run(
    conn: sqlite3.Connection,
    run_id: str,
    experiment: str,
    solver: str,
    dataset_id: str,
    seed: int,
    config: dict,
) -> bool:
    """Inserts a pending run unless the run id is already registered.

    Returns
    -------
    bool
        True when a new row was inserted.
    """
    with db_transaction(conn):
        cur = conn.execute(
            "INSERT OR IGNORE INTO runs (run_id, experiment, solver, dataset_id, seed, status, config_json, updated_at) "
            "VALUES (?, ?, ?, ?, ?, 'pending', ?, ?)",
            (run_id, experiment, solver, dataset_id, seed, json.dumps(config, sort_keys=True), _now()),
        )
    return cur.rowcount == 1


def get_run_record(conn: sqlite3.Connection, run_id: str) -> sqlite3.Row | None:
    """Fetches the runs row for a given run_id, or None."""
    return db_fetch_one(conn, "SELECT * FROM runs WHERE run_id=?", (run_id,))


def update_run_record(conn: sqlite3.Connection, run_id: str, **fields):
    """Updates one or more fields of a run.
    Lists and dictionaries are JSON-serialised; `updated_at` is refreshed.

    Raises
    ------
    ValueError
        If a status outside the known run statuses is written.
    """
    if not fields:
        return
    if "status" in fields and fields["status"] not in RUN_STATUSES:
        raise ValueError(f"Unknown run status {fields['status']!r}, expected one of {RUN_STATUSES}")

    serialized_fields = {
        k: json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v for k, v in fields.items()
    }
    serialized_fields["updated_at"] = _now()

    cols = ", ".join(f"{k}=?" for k in serialized_fields)
    values = list(serialized_fields.values()) + [run_id]

    with db_transaction(conn):
        conn.execute(f"UPDATE runs SET {cols} WHERE run_id=?", values)


def get_runs_by_status(conn: sqlite3.Connection, status: str) -> list[sqlite3.Row]:
    """Fetches all runs currently in `status`."""
    return db_fetch_all(conn, "SELECT * FROM runs WHERE status=? ORDER BY run_id", (status,))


def count_runs_by_status(conn: sqlite3.Connection) -> dict[str, int]:
    """Number of runs per status, with zero for statuses not present."""
    counts = dict.fromkeys(RUN_STATUSES, 0)
    for row in db_fetch_all(conn, "SELECT status, COUNT(*) AS n FROM runs GROUP BY status"):
        counts[row["status"]] = row["n"]
    return counts
