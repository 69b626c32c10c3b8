"""Pulse-based quantum neural networks.

Simulation of piecewise-constant controlled qubit dynamics, exact-gradient
training of pulse schedules and gate-circuit baselines, and numeric
Lie-closure controllability analysis.
"""

from ._kernels import BACKEND
from .controllability import ClosureReport, check_model, ensemble_closure, lie_closure, su_basis
from .data import Dataset, dataset_from_arrays, normalize_targets, sample_grid, target_function
from .model import (
    DomainSpec,
    GateCircuit,
    PulseModel,
    PulseSchedule,
    build_bivariate_model,
    build_circular_model,
    build_single_qubit_model,
    gate_propagator,
    rescale_schedule,
    resolve_model,
    total_hamiltonian,
    trotter_gap,
)
from .qcore import (
    Observable,
    expectation,
    expm_hermitian,
    expm_with_derivative,
    pauli,
    pauli_embed,
    target_state,
)
from .simulator import (
    GradientRecord,
    Prediction,
    evolve,
    finite_difference_gradient,
    loss_and_gradient,
    predict,
    predict_batch,
)
from .trainer import (
    TrainConfig,
    TrainResult,
    adam_step,
    gate_time_lower_bound,
    mse,
    train_gate,
    train_pulse,
)

__version__ = "0.1.0"
