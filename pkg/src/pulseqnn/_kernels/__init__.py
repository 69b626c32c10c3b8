"""Hot propagation/gradient kernels with backend selection at import.

Two interchangeable backends implement the same contract:

``evolve_batch(hdata, hctrl, theta, dt, psi0) -> (N, d) final states``
    Propagates ``psi0`` through ``K`` piecewise-constant segments for every
    sample.  ``hdata[i]`` is the precomputed data Hamiltonian
    ``sum_j x_j D_j`` of sample ``i`` (shape ``(N, d, d)``), ``hctrl`` the
    stack of control Hamiltonians ``(p, d, d)``, ``theta`` the amplitude
    matrix ``(K, p)``.  Segment propagators are exact Hermitian
    exponentials, so norms are preserved to round-off.

``grad_batch(hdata, hctrl, theta, dt, psi0, mop, targets) -> (loss, grad, preds)``
    Mean-squared-error loss over the batch, its exact gradient with respect
    to every amplitude (shape ``(K, p)``), and the per-sample predictions.
    The gradient uses a forward/backward costate sweep with exact
    exponential directional derivatives (eigenbasis divided differences),
    mathematically identical to the block-exponential derivative of
    :func:`pulseqnn.qcore.expm_with_derivative`.

Both backends are deterministic: samples are reduced in a fixed order, so
repeated calls give bit-identical results.

The compiled Cython backend (``_core``) is preferred; the numpy fallback is
selected when the extension is unavailable or when the environment variable
``PULSEQNN_BACKEND=numpy`` forces it.
"""

import os

from . import _fallback

if os.environ.get("PULSEQNN_BACKEND", "").lower() == "numpy":
    _impl = _fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "cython" if _impl is not _fallback else "numpy"

evolve_batch = _impl.evolve_batch
grad_batch = _impl.grad_batch


def available_backends() -> dict:
    """Map backend name -> module, for tests and benchmarks."""
    backends = {"numpy": _fallback}
    try:
        from . import _core

        backends["cython"] = _core
    except ImportError:
        pass
    return backends
