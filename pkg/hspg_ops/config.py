"""
config.py
--------------------
Central configuration for the HSPG benchmark harness.

Paths resolve relative to the repository root unless overridden through the
environment. The experiment defaults below mirror the published convex
protocols (synthetic group-lasso recovery and LIBSVM logistic regression).
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import math
import os
from pathlib import Path

# Root directory of the repository (hspg-group-sparsity/)
PROJECT_ROOT = Path(__file__).resolve().parents[1]

# Where traces, summaries and manifests land
RESULTS_DIR = Path(os.environ.get("HSPG_RESULTS_DIR", PROJECT_ROOT / "results"))

# Where LIBSVM files are looked up (never downloaded)
DATA_DIR = Path(os.environ.get("HSPG_DATA_DIR", PROJECT_ROOT / "data"))
A9A_PATH = DATA_DIR / "a9a"

# Run registry location
DB_PATH = RESULTS_DIR / "runs.db"

# =============================================================================
# Shared solver defaults
# =============================================================================

# HSPG switches to the Half-Space Step after this many Prox-SG epochs
SWITCH_EPOCHS = 30
MAX_EPOCHS = 60

# used when 1/L is undefined (all-zero data)
FALLBACK_STEP_SIZE = 0.1

# stationarity-based switch test
STATIONARITY_WINDOW = 10
STATIONARITY_RTOL = 1e-3

# epsilon tuning: centesimal grid, capped, relative tolerance on the first-step psi
EPSILON_TUNING_STEP = 0.01
EPSILON_TUNING_CAP = 0.2
EPSILON_TUNING_RHO = 0.01

# =============================================================================
# Synthetic group-lasso recovery
# =============================================================================

SYNTH_NUM_GROUPS = 10
SYNTH_BATCH_SIZE = 64
SYNTH_STEP_SIZE = 0.1
SYNTH_EPSILON = 0.05
SYNTH_RATIOS = (0.1, 0.3, 0.5, 0.7, 0.9)

# =============================================================================
# LIBSVM logistic regression
# =============================================================================

LOGREG_NUM_GROUPS = 10
LOGREG_MAX_BATCH = 256
LOGREG_EPSILONS = (0.0, 0.05)
RDA_GAMMA = 1.0
RDA_GAMMA_GRID = tuple(10.0**p for p in range(-2, 4))


def paper_lambda(num_instances: int) -> float:
    """Regularization weight 100/N used by both convex protocols.

    Parameters
    ----------
    num_instances : int
        Number of instances N.

    Returns
    -------
    float
        100 / N.
    """
    if num_instances < 1:
        raise ValueError(f"num_instances must be positive, got {num_instances}")
    return 100.0 / num_instances


def logreg_batch_size(num_instances: int) -> int:
    """Mini-batch size min{256, ceil(0.01 N)} for the logistic protocol."""
    if num_instances < 1:
        raise ValueError(f"num_instances must be positive, got {num_instances}")
    return min(LOGREG_MAX_BATCH, math.ceil(0.01 * num_instances))


# =====================================================================
# CLI Entry
# =====================================================================

if __name__ == "__main__":
    print(f"PROJECT ROOT SET AS: {PROJECT_ROOT}")
    print(f"RESULTS DIR SET AS: {RESULTS_DIR}")
    print(f"DATA DIR SET AS: {DATA_DIR}")
    print(f"DB PATH SET AS: {DB_PATH}")
    print(f"A9A PATH SET AS: {A9A_PATH} (exists: {A9A_PATH.exists()})")
