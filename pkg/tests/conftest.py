import math

import numpy as np
import pytest

from models.system_config import SystemConfig


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_psd(rng, dim, floor=1e-3):
    G = crandn(rng, dim, dim)
    return G @ G.conj().T + floor * np.eye(dim)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def cn():
    """Standard complex Gaussian sampler: cn(rng, *shape)"""
    return crandn


@pytest.fixture
def psd():
    return random_psd


@pytest.fixture
def desk_cfg():
    return SystemConfig(K=16)
