"""Schroedinger propagation of pulse models and exact loss gradients.

Segment propagators are exact Hermitian exponentials (the dynamics are
piecewise-constant by construction, so there is no integration error), and
the mean-squared-error gradient comes from a forward/backward costate sweep
with exact exponential derivatives.  The heavy loops are delegated to
:mod:`pulseqnn._kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import PulseModel, PulseSchedule
from .qcore import Observable

__all__ = [
    "GradientRecord",
    "Prediction",
    "evolve",
    "finite_difference_gradient",
    "loss_and_gradient",
    "loss_only",
    "predict",
    "predict_batch",
]


@dataclass(frozen=True)
class Prediction:
    """Model output at one input: expectation value plus the final state."""

    x: np.ndarray
    value: float
    final_state: np.ndarray


@dataclass(frozen=True)
class GradientRecord:
    """MSE loss and its gradient with respect to every pulse amplitude."""

    loss: float
    grad: np.ndarray


def _as_batch(model: PulseModel, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 0:
        xs = xs.reshape(1, 1)
    elif xs.ndim == 1:
        # ambiguous only for m == 1, where a 1-D array is a batch of scalars
        xs = xs.reshape(-1, 1) if model.n_inputs == 1 else xs.reshape(1, -1)
    if xs.shape[1] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} input components, got {xs.shape[1]}")
    return xs


def _data_hamiltonians(model: PulseModel, xs: np.ndarray) -> np.ndarray:
    return np.tensordot(xs, np.stack(model.encoders), axes=(1, 0))


def _check_arity(model: PulseModel, schedule: PulseSchedule):
    if schedule.n_channels != model.n_controls:
        raise ValueError(
            f"schedule has {schedule.n_channels} channels, model has "
            f"{model.n_controls} controls"
        )


def evolve(model: PulseModel, schedule: PulseSchedule, x) -> np.ndarray:
    """Final state after the full pulse sequence at input ``x``."""
    _check_arity(model, schedule)
    xs = _as_batch(model, np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1))
    final = _kernels.evolve_batch(
        _data_hamiltonians(model, xs),
        np.stack(model.controls),
        schedule.values,
        schedule.dt,
        model.initial_state,
    )
    return final[0]


def predict(model: PulseModel, schedule: PulseSchedule, x, observable: Observable) -> Prediction:
    """Expectation of ``observable`` on the evolved state."""
    psi = evolve(model, schedule, x)
    value = float(np.vdot(psi, observable.operator @ psi).real)
    return Prediction(x=np.atleast_1d(np.asarray(x, dtype=float)), value=value, final_state=psi)


def predict_batch(model, schedule, xs, observable: Observable) -> list:
    """Elementwise :func:`predict`, order preserved."""
    _check_arity(model, schedule)
    xs = _as_batch(model, xs)
    if xs.shape[0] == 0:
        raise ValueError("empty batch")
    finals = _kernels.evolve_batch(
        _data_hamiltonians(model, xs),
        np.stack(model.controls),
        schedule.values,
        schedule.dt,
        model.initial_state,
    )
    values = np.einsum("ni,ij,nj->n", finals.conj(), observable.operator, finals).real
    return [
        Prediction(x=xs[i].copy(), value=float(values[i]), final_state=finals[i])
        for i in range(xs.shape[0])
    ]


def _dataset_arrays(model: PulseModel, dataset, observable: Observable):
    xs = _as_batch(model, dataset.inputs)
    ys = np.asarray(dataset.normalized_targets, dtype=float)
    if xs.shape[0] == 0:
        raise ValueError("empty dataset")
    lo, hi = observable.lambda_min, observable.lambda_max
    if np.min(ys) < lo - 1e-9 or np.max(ys) > hi + 1e-9:
        raise ValueError(
            f"targets outside the observable range [{lo}, {hi}]; "
            "run normalize_targets on the dataset first"
        )
    return xs, ys


def loss_and_gradient(
    model: PulseModel, schedule: PulseSchedule, dataset, observable: Observable
) -> GradientRecord:
    """MSE over the dataset and its exact gradient, one costate sweep."""
    _check_arity(model, schedule)
    xs, ys = _dataset_arrays(model, dataset, observable)
    loss, grad, _ = _kernels.grad_batch(
        _data_hamiltonians(model, xs),
        np.stack(model.controls),
        schedule.values,
        schedule.dt,
        model.initial_state,
        observable.operator,
        ys,
    )
    return GradientRecord(loss=float(loss), grad=grad)


def loss_only(model, schedule, dataset, observable: Observable) -> float:
    """MSE over the dataset without the gradient sweep."""
    _check_arity(model, schedule)
    xs, ys = _dataset_arrays(model, dataset, observable)
    finals = _kernels.evolve_batch(
        _data_hamiltonians(model, xs),
        np.stack(model.controls),
        schedule.values,
        schedule.dt,
        model.initial_state,
    )
    preds = np.einsum("ni,ij,nj->n", finals.conj(), observable.operator, finals).real
    err = preds - ys
    return float(err @ err) / len(ys)


def finite_difference_gradient(
    model, schedule, dataset, observable: Observable, step: float = 1e-6
) -> GradientRecord:
    """Central-difference gradient; testing oracle, not for production use."""
    if step <= 0:
        raise ValueError("step must be positive")
    base = np.array(schedule.values)
    grad = np.zeros_like(base)
    for j in range(base.shape[0]):
        for c in range(base.shape[1]):
            plus = base.copy()
            plus[j, c] += step
            minus = base.copy()
            minus[j, c] -= step
            # bypass the cap check: probing may transiently exceed it
            sched_p = PulseSchedule(schedule.duration, plus)
            sched_m = PulseSchedule(schedule.duration, minus)
            grad[j, c] = (
                loss_only(model, sched_p, dataset, observable)
                - loss_only(model, sched_m, dataset, observable)
            ) / (2 * step)
    return GradientRecord(loss=loss_only(model, schedule, dataset, observable), grad=grad)
