"""Declarative pulse-based and gate-based model descriptions.

A :class:`PulseModel` pairs data-encoding Hamiltonians (one per input
component) with trainable control Hamiltonians; a :class:`PulseSchedule`
holds the piecewise-constant control amplitudes.  The three concrete systems
used throughout, the domain rescaling, and the single-qubit re-uploading
gate circuit all live here.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .qcore import expm_hermitian, is_hermitian, pauli, pauli_embed, zero_state

__all__ = [
    "DomainSpec",
    "GateCircuit",
    "PulseModel",
    "PulseSchedule",
    "build_bivariate_model",
    "build_circular_model",
    "build_single_qubit_model",
    "gate_propagator",
    "load_model",
    "model_from_dict",
    "parse_pauli_sum",
    "rescale_schedule",
    "resolve_model",
    "rotation",
    "total_hamiltonian",
    "trotter_gap",
]


def _frozen_array(a, dtype=complex) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class PulseModel:
    """Controlled quantum system with data-dependent drift.

    The total Hamiltonian is ``sum_j x_j * encoders[j] + sum_k theta_k *
    controls[k]``: the input vector enters only through the encoding
    operators, the trainable amplitudes only through the control operators.
    """

    n_qubits: int
    encoders: tuple
    controls: tuple
    initial_state: np.ndarray = None
    encoder_labels: tuple = ()
    control_labels: tuple = ()

    def __post_init__(self):
        d = 2**self.n_qubits
        encoders = tuple(_frozen_array(e) for e in self.encoders)
        controls = tuple(_frozen_array(c) for c in self.controls)
        for op in (*encoders, *controls):
            if op.shape != (d, d):
                raise ValueError(f"operator shape {op.shape} != ({d}, {d})")
            if not is_hermitian(op):
                raise ValueError("encoders and controls must be Hermitian")
        psi0 = self.initial_state
        psi0 = zero_state(self.n_qubits) if psi0 is None else np.array(psi0, dtype=complex)
        if psi0.shape != (d,):
            raise ValueError(f"initial state has dimension {psi0.shape}, expected ({d},)")
        nrm = np.linalg.norm(psi0)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"initial state norm {nrm} != 1")
        psi0.flags.writeable = False
        object.__setattr__(self, "encoders", encoders)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "initial_state", psi0)
        if not self.encoder_labels:
            object.__setattr__(
                self, "encoder_labels", tuple(f"D{j+1}" for j in range(len(encoders)))
            )
        if not self.control_labels:
            object.__setattr__(
                self, "control_labels", tuple(f"H{k+1}" for k in range(len(controls)))
            )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def n_inputs(self) -> int:
        return len(self.encoders)

    @property
    def n_controls(self) -> int:
        return len(self.controls)


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    """Piecewise-constant control amplitudes over a fixed duration.

    ``values[j, k]`` is the amplitude of control channel ``k`` during segment
    ``j``; all segments share the length ``dt = duration / n_segments``.
    """

    duration: float
    values: np.ndarray
    amplitude_cap: float = None

    def __post_init__(self):
        values = np.atleast_2d(np.array(self.values, dtype=float))
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if values.shape[0] < 1:
            raise ValueError("schedule needs at least one segment")
        if self.amplitude_cap is not None:
            cap = float(self.amplitude_cap)
            if cap <= 0:
                raise ValueError("amplitude_cap must be positive")
            if np.max(np.abs(values)) > cap + 1e-12:
                raise ValueError("schedule values exceed the amplitude cap")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "duration", float(self.duration))

    @property
    def n_segments(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    @property
    def dt(self) -> float:
        return self.duration / self.n_segments

    def with_values(self, values) -> "PulseSchedule":
        return PulseSchedule(self.duration, values, self.amplitude_cap)


@dataclass(frozen=True, eq=False)
class GateCircuit:
    """Single-qubit re-uploading circuit: blocks of Ry(t2) Rx(t1) Rz(x).

    ``angles[k] = (theta_1k, theta_2k)`` are the trainable x/y rotation
    angles of block ``k``; the data enters through the z rotation.
    """

    angles: np.ndarray

    def __post_init__(self):
        angles = np.array(self.angles, dtype=float).reshape(-1, 2)
        angles.flags.writeable = False
        object.__setattr__(self, "angles", angles)

    @property
    def n_blocks(self) -> int:
        return self.angles.shape[0]

    @property
    def blocks(self) -> list:
        return [tuple(row) for row in self.angles]


@dataclass(frozen=True)
class DomainSpec:
    """Input domain: the hypercube ``[-radius, radius]^m``."""

    m: int
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def build_single_qubit_model() -> PulseModel:
    """Single qubit driven on x/y with the data on the z axis."""
    return PulseModel(
        n_qubits=1,
        encoders=(pauli("z"),),
        controls=(pauli("x"), pauli("y")),
        encoder_labels=("Z1",),
        control_labels=("X1", "Y1"),
    )


def build_bivariate_model() -> PulseModel:
    """Single qubit encoding two inputs (x on sigma_x, y on sigma_y)."""
    return PulseModel(
        n_qubits=1,
        encoders=(pauli("x"), pauli("y")),
        controls=(pauli("x"), pauli("z")),
        encoder_labels=("X1", "Y1"),
        control_labels=("X1", "Z1"),
    )


def build_circular_model(n: int) -> PulseModel:
    """Circularly coupled ``n``-qubit register encoding a scalar input.

    The single input multiplies the collective ``sum_k Z_k``; controls are
    local x/y drives on every qubit plus the tunable ring couplings
    ``Z_k Z_{k+1}``.  For ``n = 1`` the ring is empty and the model reduces
    to the plain single-qubit system; for ``n = 2`` the two ring couplings
    coincide, so the coupling appears once.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    encoder = sum(pauli_embed("z", k, n) for k in range(1, n + 1))
    controls = []
    labels = []
    for k in range(1, n + 1):
        controls.append(pauli_embed("x", k, n))
        labels.append(f"X{k}")
        controls.append(pauli_embed("y", k, n))
        labels.append(f"Y{k}")
    if n >= 2:
        n_couplings = 1 if n == 2 else n
        for k in range(1, n_couplings + 1):
            nxt = k % n + 1
            controls.append(pauli_embed("z", k, n) @ pauli_embed("z", nxt, n))
            labels.append(f"Z{k}Z{nxt}")
    return PulseModel(
        n_qubits=n,
        encoders=(encoder,),
        controls=tuple(controls),
        encoder_labels=("+".join(f"Z{k}" for k in range(1, n + 1)),),
        control_labels=tuple(labels),
    )


def total_hamiltonian(model: PulseModel, x, theta) -> np.ndarray:
    """Instantaneous Hamiltonian ``sum_j x_j D_j + sum_k theta_k H_k``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if x.shape[0] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} input components, got {x.shape[0]}")
    if theta.shape[0] != model.n_controls:
        raise ValueError(f"expected {model.n_controls} amplitudes, got {theta.shape[0]}")
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for xj, dj in zip(x, model.encoders):
        h += xj * dj
    for tk, hk in zip(theta, model.controls):
        h += tk * hk
    return h


def rescale_schedule(schedule: PulseSchedule, radius: float) -> PulseSchedule:
    """Rescale a schedule from the unit hypercube to radius ``radius``.

    Stretches time by ``radius`` and shrinks amplitudes by ``1/radius``, the
    transformation under which the controlled Schroedinger equation is
    invariant; evolving the result at input ``x / radius`` reproduces the
    original evolution at ``x``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    cap = schedule.amplitude_cap
    return PulseSchedule(
        duration=radius * schedule.duration,
        values=schedule.values / radius,
        amplitude_cap=None if cap is None else cap / radius,
    )


def rotation(axis: str, angle: float) -> np.ndarray:
    """Rotation ``exp(-i * angle * sigma_axis)`` (note: no factor 1/2)."""
    return expm_hermitian(pauli(axis), angle)


def gate_propagator(circuit: GateCircuit, x: float) -> np.ndarray:
    """Unitary of the re-uploading circuit at input ``x``.

    Within a block the data rotation acts first: ``Ry(t2) Rx(t1) Rz(x)``;
    blocks are applied in order, so the full propagator is
    ``B_n ... B_2 B_1``.
    """
    u = np.eye(2, dtype=complex)
    for t1, t2 in circuit.blocks:
        block = rotation("y", t2) @ rotation("x", t1) @ rotation("z", float(x))
        u = block @ u
    return u


def trotter_gap(theta1: float, theta2: float, x: float, dt: float) -> float:
    """Operator-norm distance between one gate block and one pulse segment.

    Compares ``exp(-i t2 dt Y) exp(-i t1 dt X) exp(-i x dt Z)`` against
    ``exp(-i (x Z + t1 X + t2 Y) dt)``; the gap shrinks as O(dt^2), which is
    the sense in which the gate model converges to the pulse model.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    split = rotation("y", theta2 * dt) @ rotation("x", theta1 * dt) @ rotation("z", x * dt)
    joint = expm_hermitian(x * pauli("z") + theta1 * pauli("x") + theta2 * pauli("y"), dt)
    return float(np.linalg.norm(split - joint, 2))


# --- model files -----------------------------------------------------------

_ATOM_RE = re.compile(r"([XYZxyz]+)(\d+)")
_TERM_RE = re.compile(
    r"\s*([+-]?)\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)\s*\*\s*)?"
    r"((?:[XYZxyz]+\d+\s*)+)"
)


def parse_pauli_sum(expr: str, n_qubits: int) -> np.ndarray:
    """Parse a Pauli-sum string like ``"0.5*ZZ1 + X2"`` into a matrix.

    Each atom is a run of Pauli letters followed by a 1-based site index;
    the letters occupy consecutive sites starting there, so ``ZZ1`` is
    ``Z_1 Z_2`` and ``X2`` is ``X`` on site 2.  A term may carry a real
    coefficient (``0.5*...``); terms are joined with ``+``/``-``.
    """
    op = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    pos = 0
    matched = False
    for m in _TERM_RE.finditer(expr):
        if expr[pos : m.start()].strip():
            raise ValueError(f"could not parse {expr!r} near {expr[pos:m.start()]!r}")
        matched = True
        sign, coef, atoms = m.groups()
        value = float(coef) if coef else 1.0
        if sign == "-":
            value = -value
        axes = {}
        for letters, start in _ATOM_RE.findall(atoms):
            site = int(start)
            for offset, letter in enumerate(letters):
                k = site + offset
                if not 1 <= k <= n_qubits:
                    raise ValueError(f"site {k} out of range in {expr!r}")
                if k in axes:
                    raise ValueError(f"site {k} assigned twice in {expr!r}")
                axes[k] = letter.lower()
        term = np.eye(1, dtype=complex)
        for k in range(1, n_qubits + 1):
            term = np.kron(term, pauli(axes.get(k, "i")))
        op += value * term
        pos = m.end()
    if not matched or expr[pos:].strip():
        raise ValueError(f"could not parse operator spec {expr!r}")
    return op


def model_from_dict(spec: dict) -> PulseModel:
    """Build a model from a JSON-style dict.

    Expected fields: ``n_qubits``, ``encoders`` and ``controls`` (lists of
    Pauli-sum strings), and optionally ``initial_state`` as a list of
    ``[re, im]`` pairs (defaults to ``|0...0>``).
    """
    n = int(spec["n_qubits"])
    encoders = [parse_pauli_sum(s, n) for s in spec["encoders"]]
    controls = [parse_pauli_sum(s, n) for s in spec["controls"]]
    psi0 = None
    if spec.get("initial_state") is not None:
        psi0 = np.array([complex(re_, im_) for re_, im_ in spec["initial_state"]])
    return PulseModel(
        n_qubits=n,
        encoders=tuple(encoders),
        controls=tuple(controls),
        initial_state=psi0,
        encoder_labels=tuple(spec["encoders"]),
        control_labels=tuple(spec["controls"]),
    )


def load_model(path: str) -> PulseModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def resolve_model(spec) -> PulseModel:
    """Resolve a model spec: preset name, ``circular:n``, JSON path, or dict."""
    if isinstance(spec, PulseModel):
        return spec
    if isinstance(spec, dict):
        return model_from_dict(spec)
    name = str(spec)
    if name == "single_qubit":
        return build_single_qubit_model()
    if name == "bivariate":
        return build_bivariate_model()
    if name.startswith("circular:"):
        return build_circular_model(int(name.split(":", 1)[1]))
    if name.endswith(".json") or os.path.exists(name):
        return load_model(name)
    raise ValueError(f"unknown model spec {spec!r}")
