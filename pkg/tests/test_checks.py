import numpy as np
import pytest

from hspg_ops import regularizer
from hspg_ops.checks import (
    all_passed,
    check_hspg_prox_sg_equivalence,
    check_identification,
    check_nonexpansive,
    check_problem_gradients,
    check_projection_idempotent,
    check_projection_region,
    check_prox_oracle,
    check_psi_gradient,
    check_sufficient_decrease,
    check_svrg_equivalence,
    resolve_suite_name,
    run_suites,
    summarize_results,
)
from hspg_ops.checks.half_space import decrease_step_size
from hspg_ops.checks.operators import ray_search_prox
from hspg_ops.config import paper_lambda
from hspg_ops.data import gen_synthetic_logistic
from hspg_ops.errors import VerificationError
from hspg_ops.groups import make_equal_partition
from hspg_ops.regularizer import Parameters


def _assert_ok(records):
    assert records
    for r in records:
        assert r["status"] == "ok", r


def test_ray_search_agrees_with_closed_form():
    partition = make_equal_partition(4, 2)
    x_hat = np.array([3.0, 4.0, 0.1, 0.0])
    np.testing.assert_allclose(ray_search_prox(x_hat, partition, 1.0, 1.0), [2.4, 3.2, 0.0, 0.0], atol=1e-6)


def test_prox_oracle_suite():
    _assert_ok(check_prox_oracle(num_trials=200))


def test_nonexpansive_suite():
    _assert_ok(check_nonexpansive())


def test_projection_idempotent_suite():
    _assert_ok(check_projection_idempotent())


def test_projection_region_suite():
    _assert_ok(check_projection_region(num_draws=2000))


def test_identification_suite():
    _assert_ok(check_identification())


def test_gradient_suites():
    _assert_ok(check_problem_gradients())
    _assert_ok(check_psi_gradient())


def test_sufficient_decrease_on_synthetic_logistic():
    problem = gen_synthetic_logistic(400, 30, 0.3, seed=11)
    partition = make_equal_partition(30, 10)
    records = check_sufficient_decrease(problem, partition, paper_lambda(400), num_steps=50)
    assert [r["suite"] for r in records] == [
        "sufficient_decrease(eps=0)",
        "descent_direction(eps=0)",
        "sufficient_decrease(eps=0.05)",
        "descent_direction(eps=0.05)",
    ]
    _assert_ok(records)


def test_decrease_step_size_keeps_projected_groups_uncapped():
    partition = make_equal_partition(4, 2)
    x = Parameters(np.array([1.0, 0.0, 0.2, 0.0]))
    # the second group's trial point crosses the origin and gets projected
    alpha, lipschitz = decrease_step_size(x, np.array([0.5, 0.0, 10.0, 0.0]), partition, 1.0, 1.0, 0.0)
    assert lipschitz == pytest.approx(11.0)
    assert alpha == pytest.approx(0.5 / 11.0)


def test_decrease_step_size_caps_kept_groups_at_half_their_norm():
    partition = make_equal_partition(4, 2)
    x = Parameters(np.array([1.0, 0.0, 0.2, 0.0]))
    grad = np.array([0.5, 0.0, 0.0, 3.0])
    alpha, lipschitz = decrease_step_size(x, grad, partition, 1.0, 1.0, 0.0)
    assert lipschitz == pytest.approx(11.0)
    assert alpha == pytest.approx(1.0 / 30.0)
    assert np.all(alpha * partition.group_norms(grad) <= partition.group_norms(x.x) / 2.0 + 1e-15)


def test_equivalence_suites():
    _assert_ok(check_svrg_equivalence())
    _assert_ok(check_hspg_prox_sg_equivalence())


def test_sign_error_in_omega_gradient_is_caught(monkeypatch):
    original = regularizer.grad_omega_on_support

    def flipped(x, partition):
        g = original(x, partition)
        return regularizer.Parameters(-g.x, g.bias)

    monkeypatch.setattr(regularizer, "grad_omega_on_support", flipped)
    records = check_psi_gradient(num_instances=10)
    assert records[0]["suite"] == "psi_gradient"
    assert records[0]["status"] == "fail"


def test_run_suites_reports_crashes_as_failures(monkeypatch):
    from hspg_ops.checks import summary

    def boom(_):
        raise RuntimeError("broken")

    monkeypatch.setitem(summary.SUITES, "nonexpansive", boom)
    records = run_suites(["nonexpansive", "projection_idempotent"])
    assert records[0] == {"suite": "nonexpansive", "status": "fail", "note": "raised RuntimeError: broken"}
    assert records[1]["status"] == "ok"
    assert not all_passed(records)
    with pytest.raises(VerificationError, match="nonexpansive"):
        run_suites(["nonexpansive"], strict=True)


def test_run_suites_rejects_unknown_names():
    with pytest.raises(ValueError, match="Unknown suite"):
        run_suites(["no_such_suite"])


def test_run_suites_resolves_short_names(monkeypatch):
    from hspg_ops.checks import summary

    def stub(_):
        return [{"suite": "sufficient_decrease", "status": "ok", "note": "stub"}]

    monkeypatch.setitem(summary.SUITES, "sufficient_decrease", stub)
    assert resolve_suite_name("lemma1") == "sufficient_decrease"
    assert resolve_suite_name("theorem33") == "identification"
    assert resolve_suite_name("gradients") == "gradients"
    # an alias and its target run the suite once
    assert run_suites(["lemma1", "sufficient_decrease"]) == stub(None)


def test_summary_table_marks_status():
    records = [
        {"suite": "a", "status": "ok", "note": "1/1 passed"},
        {"suite": "b", "status": "fail", "note": "0/1 passed"},
    ]
    text = summarize_results(records)
    assert "Suites passed: 1/2" in text
    assert "🟢" in text and "🔴" in text
    assert "🟢" not in summarize_results(records, show_table=False)
    assert not all_passed([])
