import numpy as np
import pytest

import pulseqnn as pq


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def paper_models():
    return [
        ("single_qubit", pq.build_single_qubit_model()),
        ("bivariate", pq.build_bivariate_model()),
        ("circular2", pq.build_circular_model(2)),
    ]


def z1_observable(n_qubits: int) -> pq.Observable:
    return pq.Observable.from_operator(pq.pauli_embed("z", 1, n_qubits))
