import numpy as np
import pytest

from hspg_ops.groups import make_equal_partition
from hspg_ops.regularizer import (
    Parameters,
    grad_omega_on_support,
    gradient_mapping,
    half_space_project,
    omega,
    prox_group_l2,
)


def test_omega_sums_group_norms_without_bias(partition_2x2):
    x = Parameters(np.array([3.0, 4.0, 0.0, -2.0]), bias=100.0)
    assert omega(x, partition_2x2) == pytest.approx(7.0)


def test_prox_shrinks_and_zeroes_groups(partition_2x2):
    x_hat = Parameters(np.array([3.0, 4.0, 0.1, 0.0]), bias=1.5)
    out = prox_group_l2(x_hat, partition_2x2, 1.0)
    np.testing.assert_allclose(out.x[:2], [2.4, 3.2])
    assert np.all(out.x[2:] == 0.0)
    assert out.bias == 1.5


def test_prox_at_threshold_gives_exact_zero(partition_2x2):
    out = prox_group_l2(Parameters(np.array([3.0, 4.0, 1.0, 0.0])), partition_2x2, 5.0)
    assert np.all(out.x == 0.0)


def test_prox_with_zero_threshold_is_identity(partition_2x2):
    x_hat = Parameters(np.array([0.3, -1.0, 0.0, 0.0]))
    np.testing.assert_array_equal(prox_group_l2(x_hat, partition_2x2, 0.0).x, x_hat.x)


def test_prox_rejects_negative_threshold(partition_2x2):
    with pytest.raises(ValueError, match="nonnegative"):
        prox_group_l2(Parameters(np.ones(4)), partition_2x2, -0.1)


def test_half_space_projection_keeps_and_drops_groups(partition_2x2):
    x_ref = Parameters(np.array([1.0, 0.0, 2.0, 0.0]))
    z = Parameters(np.array([0.5, 1.0, -1.0, 0.0]), bias=0.25)

    out = half_space_project(z, x_ref, partition_2x2, 0.0)
    np.testing.assert_array_equal(out.x, [0.5, 1.0, 0.0, 0.0])
    assert out.bias == 0.25

    # inner product 0.5 against 0.6 * ||x_ref||^2 = 0.6
    out = half_space_project(z, x_ref, partition_2x2, 0.6)
    np.testing.assert_array_equal(out.x, [0.0, 0.0, 0.0, 0.0])


def test_half_space_projection_keeps_ties(partition_2x2):
    x_ref = Parameters(np.array([1.0, 0.0, 1.0, 0.0]))
    z = Parameters(np.array([0.5, 3.0, 0.25, 0.0]))
    out = half_space_project(z, x_ref, partition_2x2, 0.5)
    np.testing.assert_array_equal(out.x, [0.5, 3.0, 0.0, 0.0])


def test_half_space_projection_is_idempotent(partition_2x2, rng):
    for _ in range(20):
        x_ref = Parameters(rng.normal(size=4))
        z = Parameters(rng.normal(size=4))
        once = half_space_project(z, x_ref, partition_2x2, 0.3)
        twice = half_space_project(once, x_ref, partition_2x2, 0.3)
        np.testing.assert_array_equal(once.x, twice.x)


@pytest.mark.parametrize("eps", [-0.1, 1.0, 1.5])
def test_half_space_projection_rejects_bad_epsilon(partition_2x2, eps):
    with pytest.raises(ValueError, match="epsilon"):
        half_space_project(Parameters(np.ones(4)), Parameters(np.ones(4)), partition_2x2, eps)


def test_grad_omega_is_unit_on_support_and_zero_elsewhere(partition_2x2):
    g = grad_omega_on_support(Parameters(np.array([3.0, 4.0, 0.0, 0.0]), bias=2.0), partition_2x2)
    np.testing.assert_allclose(g.x, [0.6, 0.8, 0.0, 0.0])
    assert g.bias == 0.0


def test_gradient_mapping_vanishes_at_composite_minimizer(partition_2x2):
    # f = 1/2 ||x - c||^2 is minimized with lam * Omega at prox(c, lam)
    c = np.array([3.0, 4.0, 0.1, 0.2])
    lam = 1.0
    x = prox_group_l2(Parameters(c), partition_2x2, lam)
    grad = Parameters(x.x - c)
    mapping = gradient_mapping(x, 1.0, grad, partition_2x2, lam)
    np.testing.assert_allclose(mapping.x, 0.0, atol=1e-12)


def test_gradient_mapping_rejects_nonpositive_eta(partition_2x2):
    x = Parameters(np.ones(4))
    with pytest.raises(ValueError, match="eta"):
        gradient_mapping(x, 0.0, x, partition_2x2, 1.0)


def test_parameters_distance_includes_bias():
    a = Parameters(np.array([0.0, 3.0]), bias=0.0)
    b = Parameters(np.array([0.0, 0.0]), bias=4.0)
    assert a.distance(b) == pytest.approx(5.0)


@pytest.mark.parametrize("scale", [-2.5, 0.0, 0.3, 4.0])
def test_omega_is_absolutely_homogeneous(partition_2x2, rng, scale):
    x = rng.normal(size=4)
    expected = abs(scale) * omega(Parameters(x), partition_2x2)
    assert omega(Parameters(scale * x), partition_2x2) == pytest.approx(expected)


def test_gradient_mapping_is_zero_exactly_at_prox_fixed_points(rng):
    partition = make_equal_partition(6, 3)
    for trial in range(50):
        lam = float(rng.uniform(0.1, 2.0))
        eta = float(rng.uniform(0.1, 2.0))
        if trial % 2:
            # fixed point: the minimizer of 1/2 ||x - c||^2 + lam * Omega is prox(c, lam)
            c = rng.normal(scale=2.0, size=6)
            x = prox_group_l2(Parameters(c), partition, lam)
            grad = Parameters(x.x - c)
        else:
            x = Parameters(rng.normal(size=6))
            grad = Parameters(rng.normal(size=6))

        mapping = gradient_mapping(x, eta, grad, partition, lam)
        step = prox_group_l2(Parameters(x.x - eta * grad.x), partition, eta * lam)
        is_zero = np.linalg.norm(mapping.x) <= 1e-12
        is_fixed = np.allclose(step.x, x.x, rtol=0.0, atol=1e-12)
        assert is_zero == is_fixed
        if trial % 2:
            assert is_zero
