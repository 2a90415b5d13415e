import json

import numpy as np
import pandas as pd
import pytest

from hspg_ops.config import A9A_PATH
from hspg_ops.errors import ConfigError
from hspg_ops.experiments import (
    ExperimentSpec,
    build_config,
    expand_cells,
    load_cell_problem,
    run_logreg,
    run_synth_recovery,
)
from hspg_ops.metrics import RunTrace


def _synth_spec(tmp_path, **changes) -> ExperimentSpec:
    fields = dict(
        experiment="synth",
        solvers=("hspg", "prox_sg"),
        seeds=(0,),
        output_dir=tmp_path,
        overrides={"max_epochs": 4, "switch_epochs": 2},
        record_timing=False,
        N=200,
        n=20,
        groups=4,
        ratios=(0.5,),
    )
    fields.update(changes)
    return ExperimentSpec(**fields)


def test_cells_expand_in_seed_data_solver_order(tmp_path):
    spec = _synth_spec(tmp_path, seeds=(0, 1), ratios=(0.1, 0.5))
    cells = expand_cells(spec)
    assert len(cells) == 8
    assert [(c.seed, c.ratio, c.solver) for c in cells[:4]] == [
        (0, 0.1, "hspg"), (0, 0.1, "prox_sg"), (0, 0.5, "hspg"), (0, 0.5, "prox_sg"),
    ]
    assert cells[0].run_id == "synth:synth-N200-n20-g4-r0.1-s0:hspg(eps=0.05):seed0"
    assert cells[1].epsilon is None


def test_logreg_cells_cover_every_epsilon(tmp_path):
    spec = ExperimentSpec(
        experiment="logreg", solvers=("hspg", "rda"), dataset=tmp_path / "a9a", output_dir=tmp_path
    )
    labels = [c.label() for c in expand_cells(spec)]
    assert labels == ["hspg(eps=0)", "hspg(eps=0.05)", "rda"]
    tuned = ExperimentSpec(
        experiment="logreg", solvers=("hspg",), dataset=tmp_path / "a9a", output_dir=tmp_path, tune_epsilon=True
    )
    assert [c.label() for c in expand_cells(tuned)] == ["hspg(eps=auto)"]


@pytest.mark.parametrize(
    "changes",
    [
        dict(ratios=(1.5,)),
        dict(solvers=("adam",)),
        dict(solvers=()),
        dict(groups=30),
        dict(experiment="deep"),
    ],
)
def test_invalid_specs_are_rejected(tmp_path, changes):
    with pytest.raises(ConfigError):
        _synth_spec(tmp_path, **changes)


def test_overrides_for_other_solvers_are_dropped(tmp_path):
    spec = _synth_spec(tmp_path, overrides={"rda_gamma": 10.0, "switch_epochs": 1, "max_epochs": 3})
    hspg_cell, prox_cell = expand_cells(spec)
    problem, _, _ = load_cell_problem(hspg_cell)
    hspg = build_config(hspg_cell, problem)
    prox = build_config(prox_cell, problem)
    # batch 64 over 200 instances gives 4 steps per epoch
    assert hspg.rda_gamma is None and hspg.n_p == 4
    assert prox.n_p is None and prox.max_epochs == 3


def test_synth_recovery_writes_artifacts(tmp_path):
    df, results = run_synth_recovery(_synth_spec(tmp_path))
    assert list(df["solver"]) == ["hspg(eps=0.05)", "prox_sg"]
    assert {"final_psi", "group_sparsity", "iou"} <= set(df.columns)
    assert all(0.0 <= r.iou <= 1.0 for r in results)

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [r["run_id"] for r in manifest["runs"]] == [r.run_id for r in results]
    assert len(manifest["config_digest"]) == 64

    trace = RunTrace.from_json(tmp_path / "traces" / "synth__synth-N200-n20-g4-r0.5-s0__hspg_eps=0.05___seed0.json")
    assert trace.metadata["switch_step"] == 2 * 4
    assert len(trace.records) == 5
    assert pd.read_csv(tmp_path / "summary.csv").shape[0] == 2


def test_runs_without_timing_are_byte_identical(tmp_path):
    run_synth_recovery(_synth_spec(tmp_path / "a"))
    run_synth_recovery(_synth_spec(tmp_path / "b"))
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
    for path in (tmp_path / "a" / "traces").glob("*.csv"):
        assert path.read_bytes() == (tmp_path / "b" / "traces" / path.name).read_bytes()


def test_logreg_with_truncation(tmp_path, libsvm_file):
    spec = ExperimentSpec(
        experiment="logreg",
        solvers=("hspg", "prox_sg", "rda", "prox_svrg"),
        dataset=libsvm_file,
        output_dir=tmp_path / "out",
        overrides={"max_epochs": 2},
        record_timing=False,
        truncate=0.01,
    )
    df, results = run_logreg(spec)
    assert list(df["solver"]) == [
        "hspg(eps=0)", "hspg(eps=0.05)", "prox_sg", "prox_sg*", "rda", "prox_svrg", "prox_svrg*",
    ]
    starred = {r.solver: r for r in results if r.solver.endswith("*")}
    plain = {r.solver: r for r in results}
    for name, r in starred.items():
        assert r.group_sparsity >= plain[name[:-1]].group_sparsity
        assert r.trace_path == ""
    assert np.isfinite(df["final_psi"]).all()


@pytest.mark.slow
@pytest.mark.skipif(not A9A_PATH.exists(), reason="a9a not found under HSPG_DATA_DIR")
def test_a9a_final_objectives_and_sparsity_ordering(tmp_path):
    spec = ExperimentSpec(
        experiment="logreg",
        solvers=("hspg", "prox_sg", "prox_svrg"),
        dataset=A9A_PATH,
        output_dir=tmp_path,
        record_timing=False,
    )
    df, _ = run_logreg(spec)
    rows = df.set_index("solver")
    assert list(rows.index) == ["hspg(eps=0)", "hspg(eps=0.05)", "prox_sg", "prox_svrg"]
    np.testing.assert_allclose(rows["final_psi"], 0.355, atol=0.005)
    assert rows.loc["hspg(eps=0.05)", "group_sparsity"] >= rows.loc["prox_sg", "group_sparsity"]
