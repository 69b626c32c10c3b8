"""Backend parity and kernel-level invariants.

The compiled and numpy backends must implement the same contract; when the
extension is available every case is run against both and compared.
"""

import numpy as np
import pytest

import pulseqnn as pq
from pulseqnn._kernels import available_backends

from conftest import paper_models, z1_observable

BACKENDS = available_backends()


def _random_problem(rng, model, n_samples=5, n_segments=8):
    theta = rng.uniform(-1, 1, (n_segments, model.n_controls))
    xs = rng.uniform(-1, 1, (n_samples, model.n_inputs))
    ys = rng.uniform(-0.8, 0.8, n_samples)
    hdata = np.tensordot(xs, np.stack(model.encoders), axes=(1, 0))
    return hdata, np.stack(model.controls), theta, ys


def test_compiled_backend_is_available():
    # the build produces the extension in this environment; the numpy
    # fallback is still exercised through the parity tests below
    assert "numpy" in BACKENDS
    assert "cython" in BACKENDS, "compiled kernels missing; rebuild with Cython"


@pytest.mark.parametrize("model_name,model", paper_models())
def test_backend_parity(rng, model_name, model):
    hdata, hctrl, theta, ys = _random_problem(rng, model)
    mop = pq.pauli_embed("z", 1, model.n_qubits)
    results = {
        name: mod.grad_batch(hdata, hctrl, theta, 0.17, model.initial_state, mop, ys)
        for name, mod in BACKENDS.items()
    }
    finals = {
        name: mod.evolve_batch(hdata, hctrl, theta, 0.17, model.initial_state)
        for name, mod in BACKENDS.items()
    }
    ref_loss, ref_grad, ref_preds = results["numpy"]
    for name, (loss, grad, preds) in results.items():
        assert loss == pytest.approx(ref_loss, abs=1e-13)
        assert np.max(np.abs(grad - ref_grad)) < 1e-12
        assert np.max(np.abs(preds - ref_preds)) < 1e-13
        assert np.max(np.abs(finals[name] - finals["numpy"])) < 1e-13


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_norm_preserved(rng, backend):
    mod = BACKENDS[backend]
    for _, model in paper_models():
        hdata, hctrl, theta, _ = _random_problem(rng, model, n_samples=20)
        finals = mod.evolve_batch(hdata, hctrl, theta, 0.3, model.initial_state)
        assert np.max(np.abs(np.linalg.norm(finals, axis=1) - 1.0)) < 1e-10


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_segment_splitting_is_exact(rng, backend):
    # piecewise-constant exactness: halving every segment changes nothing
    mod = BACKENDS[backend]
    model = pq.build_single_qubit_model()
    hdata, hctrl, theta, _ = _random_problem(rng, model, n_samples=6, n_segments=5)
    split = np.repeat(theta, 2, axis=0)
    coarse = mod.evolve_batch(hdata, hctrl, theta, 0.2, model.initial_state)
    fine = mod.evolve_batch(hdata, hctrl, split, 0.1, model.initial_state)
    assert np.max(np.abs(coarse - fine)) < 1e-12


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_grad_matches_finite_difference_large_dim(rng, backend):
    # exercises the LAPACK path (d = 8) of the compiled backend
    mod = BACKENDS[backend]
    model = pq.build_circular_model(3)
    hdata, hctrl, theta, ys = _random_problem(rng, model, n_samples=2, n_segments=3)
    dt = 0.21
    loss, grad, _ = mod.grad_batch(hdata, hctrl, theta, dt, model.initial_state,
                                   pq.pauli_embed("z", 1, 3), ys)
    eps = 1e-6
    mop = pq.pauli_embed("z", 1, 3)

    def loss_at(vals):
        finals = mod.evolve_batch(hdata, hctrl, vals, dt, model.initial_state)
        preds = np.einsum("ni,ij,nj->n", finals.conj(), mop, finals).real
        err = preds - ys
        return float(err @ err) / len(ys)

    for j in range(theta.shape[0]):
        for c in range(theta.shape[1]):
            up = theta.copy()
            up[j, c] += eps
            dn = theta.copy()
            dn[j, c] -= eps
            fd = (loss_at(up) - loss_at(dn)) / (2 * eps)
            assert grad[j, c] == pytest.approx(fd, abs=2e-8, rel=1e-6)


def test_forced_numpy_backend_env(tmp_path):
    import subprocess
    import sys

    code = "import pulseqnn; print(pulseqnn.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "PULSEQNN_BACKEND": "numpy"},
        check=True,
    )
    assert out.stdout.strip() == "numpy"
