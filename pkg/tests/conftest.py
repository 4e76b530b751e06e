import numpy as np
import pytest

from hologate.model import ModelConfig, ParameterPoint


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def cfg2():
    return ModelConfig(d=2, W=10.0)


def random_point(rng, d, scale=2.0) -> ParameterPoint:
    return ParameterPoint.from_omegas(scale * (rng.normal(size=d) + 1j * rng.normal(size=d)))


def random_unitary(rng, n) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
