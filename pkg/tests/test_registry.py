import json
import sqlite3

import pytest

from hspg_ops.db import (
    count_runs_by_status,
    get_db_connection,
    get_run_record,
    get_runs_by_status,
    init_registry,
    open_registry,
    register_run,
    update_run_record,
)


@pytest.fixture
def conn(tmp_path):
    db_path = init_registry(tmp_path / "registry" / "runs.db")
    connection = get_db_connection(db_path)
    yield connection
    connection.close()


def test_register_is_idempotent(conn):
    assert register_run(conn, "synth:d:hspg:seed0", "synth", "hspg", "d", 0, {"lam": 0.1})
    assert not register_run(conn, "synth:d:hspg:seed0", "synth", "hspg", "d", 0, {"lam": 0.2})
    row = get_run_record(conn, "synth:d:hspg:seed0")
    assert row["status"] == "pending"
    assert json.loads(row["config_json"]) == {"lam": 0.1}


def test_status_updates_and_counts(conn):
    for solver in ("hspg", "prox_sg", "rda"):
        register_run(conn, f"synth:d:{solver}:seed0", "synth", solver, "d", 0, {})
    update_run_record(conn, "synth:d:hspg:seed0", status="complete", final_psi=1.5, config_json={"lam": 1})
    update_run_record(conn, "synth:d:rda:seed0", status="error", error_message="RuntimeError: boom")

    row = get_run_record(conn, "synth:d:hspg:seed0")
    assert row["final_psi"] == 1.5
    assert json.loads(row["config_json"]) == {"lam": 1}
    assert row["updated_at"]
    assert count_runs_by_status(conn) == {"pending": 1, "in_progress": 0, "complete": 1, "error": 1}
    assert [r["run_id"] for r in get_runs_by_status(conn, "error")] == ["synth:d:rda:seed0"]


def test_unknown_status_is_rejected(conn):
    register_run(conn, "synth:d:hspg:seed0", "synth", "hspg", "d", 0, {})
    with pytest.raises(ValueError, match="Unknown run status"):
        update_run_record(conn, "synth:d:hspg:seed0", status="done")


def test_missing_run_returns_none(conn):
    assert get_run_record(conn, "nope") is None


def test_open_registry_commits_and_closes(tmp_path):
    db_path = init_registry(tmp_path / "runs.db")
    with open_registry(db_path) as conn:
        register_run(conn, "synth:d:hspg:seed0", "synth", "hspg", "d", 0, {})
        update_run_record(conn, "synth:d:hspg:seed0", status="in_progress")
    with pytest.raises(sqlite3.ProgrammingError):
        conn.execute("SELECT 1")

    with open_registry(db_path) as other:
        assert get_run_record(other, "synth:d:hspg:seed0")["status"] == "in_progress"


def test_open_registry_rolls_back_on_error(tmp_path):
    db_path = init_registry(tmp_path / "runs.db")
    with pytest.raises(RuntimeError):
        with open_registry(db_path) as conn:
            conn.execute(
                "INSERT INTO runs (run_id, experiment, solver, status) VALUES ('x', 'synth', 'hspg', 'pending')"
            )
            raise RuntimeError("boom")
    with open_registry(db_path) as conn:
        assert get_run_record(conn, "x") is None
