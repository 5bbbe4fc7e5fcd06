import numpy as np
import pytest

from blindqc.simcore import PureState, apply_all, kron_all


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_product(n, rng):
    return [random_qubit(rng) for _ in range(n)]


def direct_output(circuit, inputs):
    psi = kron_all([np.asarray(v).reshape(2, 1) for v in inputs]).reshape(-1)
    return apply_all(PureState(circuit.num_wires, psi), circuit.instructions)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
