"""Shared fixtures for the hspg_ops test suite."""

import numpy as np
import pytest

from hspg_ops.data import gen_synthetic, gen_synthetic_logistic, serialize_libsvm
from hspg_ops.groups import make_equal_partition


@pytest.fixture
def partition_2x2():
    return make_equal_partition(4, 2)


@pytest.fixture
def small_synthetic():
    """200 x 20 least-squares instance with half of its 4 groups zero."""
    return gen_synthetic(200, 20, 4, 0.5, seed=0)


@pytest.fixture
def small_logistic():
    return gen_synthetic_logistic(150, 12, 0.4, seed=3)


@pytest.fixture
def libsvm_file(tmp_path, small_logistic):
    path = tmp_path / "small.libsvm"
    path.write_text("".join(serialize_libsvm(small_logistic)), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))
