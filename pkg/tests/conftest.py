import numpy as np
import pytest

from zenodd import model, protocol
from zenodd.linalg import substream


@pytest.fixture(scope="session")
def ref_model():
    return model.reference_model()


@pytest.fixture(scope="session")
def pauli():
    return protocol.pauli_set()


@pytest.fixture()
def rng():
    return substream(20240817)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def proj0(d: int) -> np.ndarray:
    out = np.zeros((d, d), dtype=complex)
    out[0, 0] = 1.0
    return out
