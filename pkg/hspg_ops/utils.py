"""
utils.py
--------------------
Identifier and digest helpers for benchmark runs.
"""

import hashlib
import json
import re

_UNSAFE = re.compile(r"[^A-Za-z0-9._=-]+")


def make_run_id(experiment: str, dataset_id: str, solver_label: str, seed: int) -> str:
    """Builds the registry form of a run id.

    Parameters
    ----------
    experiment : str
        Experiment name, e.g. ``synth`` or ``logreg``.
    dataset_id : str
        Dataset identifier.
    solver_label : str
        Solver display label, e.g. ``hspg(eps=0.05)``.
    seed : int
        Run seed.

    Returns
    -------
    str
        ``experiment:dataset_id:solver_label:seed<seed>``.

    Raises
    ------
    ValueError
        If any component is empty or contains ':'.
    """
    parts = [experiment, dataset_id, solver_label]
    for part in parts:
        if not part or ":" in part:
            raise ValueError(f"Invalid run id component: {part!r}")
    return ":".join(parts + [f"seed{seed}"])


def to_dir_run_id(run_id: str) -> str:
    """Converts a run id (or any label) to a filesystem-safe directory name.

    Examples
    --------
    >>> to_dir_run_id("synth:N2000:hspg(eps=0.05):seed0")
    'synth__N2000__hspg_eps=0.05___seed0'
    """
    run_id = run_id.strip().replace(":", "__")
    return _UNSAFE.sub("_", run_id).strip("_")


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), default=str)


def config_digest(doc: dict) -> str:
    """SHA-256 hex digest of the canonical JSON form of `doc`."""
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()
