"""Dense complex linear algebra for small driven-qubit systems.

States are plain complex numpy vectors and operators are dense ``(d, d)``
complex arrays.  Everything here targets desk scale (d <= 64), so matrix
exponentials go through exact Hermitian eigendecomposition instead of
series approximations, and no sparse or tensor-network structure is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "HERMITIAN_TOL",
    "UNITARY_TOL",
    "STATE_NORM_TOL",
    "Observable",
    "basis_state",
    "expectation",
    "expm_hermitian",
    "expm_with_derivative",
    "is_hermitian",
    "is_unitary",
    "pauli",
    "pauli_embed",
    "target_state",
    "zero_state",
]

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
STATE_NORM_TOL = 1e-10

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {'i', 'x', 'y', 'z'}."""
    try:
        return _PAULI[axis.lower()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def pauli_embed(axis: str, site: int, n_qubits: int) -> np.ndarray:
    """Single-site Pauli on an ``n_qubits`` register.

    Builds ``I (x) ... (x) sigma_axis (x) ... (x) I`` with the Pauli on the
    given site (1-based, site 1 is the leftmost tensor factor).
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if not 1 <= site <= n_qubits:
        raise ValueError(f"site {site} out of range 1..{n_qubits}")
    op = np.array([[1.0 + 0.0j]])
    for k in range(1, n_qubits + 1):
        op = np.kron(op, _PAULI[axis.lower()] if k == site else _PAULI["i"])
    return op


def basis_state(dim: int, index: int = 0) -> np.ndarray:
    """Computational basis vector ``|index>`` of dimension ``dim``."""
    if not 0 <= index < dim:
        raise ValueError(f"index {index} out of range for dimension {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def zero_state(n_qubits: int) -> np.ndarray:
    """The all-zero register state ``|0...0>`` on ``n_qubits``."""
    return basis_state(2**n_qubits, 0)


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.max(np.abs(op - op.conj().T)) <= tol


def is_unitary(op: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0]))) <= tol


def expm_hermitian(h: np.ndarray, s: float) -> np.ndarray:
    """Unitary propagator ``exp(-i * s * h)`` of a Hermitian matrix.

    Computed by eigendecomposition, which is exact (up to round-off) at the
    dimensions used here and keeps the result unitary to ~1e-15.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol=1e-10):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * s * w)
    return (v * phases) @ v.conj().T


def expm_with_derivative(
    h: np.ndarray, v: np.ndarray, s: float
) -> tuple[np.ndarray, np.ndarray]:
    """Propagator ``U = exp(-i*s*h)`` and its directional derivative along ``v``.

    The derivative ``dU = d/de exp(-i*s*(h + e*v)) | e=0`` is read off the
    top-right block of the exponential of the block-triangular matrix
    ``[[-i*s*h, -i*s*v], [0, -i*s*h]]``.  The block matrix is not Hermitian,
    so it goes through scaling-and-squaring (``scipy.linalg.expm``).
    """
    h = np.asarray(h, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if h.shape != v.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {v.shape}")
    d = h.shape[0]
    block = np.zeros((2 * d, 2 * d), dtype=complex)
    block[:d, :d] = -1j * s * h
    block[d:, d:] = -1j * s * h
    block[:d, d:] = -1j * s * v
    du = scipy.linalg.expm(block)[:d, d:]
    return expm_hermitian(h, s), du


@dataclass(frozen=True)
class Observable:
    """Hermitian measurement operator with its extreme eigenpairs.

    ``lambda_min``/``lambda_max`` bound every expectation value, and the
    corresponding eigenvectors span the states that realize any target value
    in between (see :func:`target_state`).
    """

    operator: np.ndarray
    lambda_min: float
    lambda_max: float
    eigvec_min: np.ndarray
    eigvec_max: np.ndarray

    @classmethod
    def from_operator(cls, op: np.ndarray) -> "Observable":
        op = np.asarray(op, dtype=complex)
        if not is_hermitian(op, tol=1e-10):
            raise ValueError("observable must be Hermitian")
        w, vecs = np.linalg.eigh(op)
        op.flags.writeable = False
        return cls(
            operator=op,
            lambda_min=float(w[0]),
            lambda_max=float(w[-1]),
            eigvec_min=vecs[:, 0].copy(),
            eigvec_max=vecs[:, -1].copy(),
        )

    @property
    def dim(self) -> int:
        return self.operator.shape[0]


def expectation(observable, psi: np.ndarray) -> float:
    """Expectation value ``<psi| M |psi>`` (real for Hermitian ``M``)."""
    m = observable.operator if isinstance(observable, Observable) else np.asarray(observable)
    psi = np.asarray(psi)
    if m.shape[0] != psi.shape[0]:
        raise ValueError(f"dimension mismatch: operator {m.shape[0]}, state {psi.shape[0]}")
    return float(np.vdot(psi, m @ psi).real)


def target_state(observable: Observable, y: float) -> np.ndarray:
    """State whose expectation under ``observable`` equals ``y`` exactly.

    Superposes the extreme eigenvectors with weights chosen so that
    ``expectation(observable, state) == y``; only defined for
    ``lambda_min <= y <= lambda_max``.
    """
    lo, hi = observable.lambda_min, observable.lambda_max
    if hi - lo <= 1e-14:
        raise ValueError("observable has a degenerate spectrum range")
    if not lo <= y <= hi:
        raise ValueError(f"target {y} outside the observable range [{lo}, {hi}]")
    c_min = np.sqrt((y - hi) / (lo - hi))
    c_max = np.sqrt((y - lo) / (hi - lo))
    return c_min * observable.eigvec_min + c_max * observable.eigvec_max
