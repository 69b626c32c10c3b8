"""Target functions, grid sampling, and target normalization.

Inputs are always rescaled to the unit hypercube ``[-1, 1]^m`` (the
simulator works there; radii are absorbed by the schedule rescaling), and
targets are mapped into the observable's eigenvalue range by an affine
min-max map so that a perfect fit is representable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "dataset_from_arrays",
    "evaluate_target",
    "make_poly8_coeffs",
    "normalize_targets",
    "sample_grid",
    "target_function",
]

TARGET_FUNCTIONS = ("sigmoid10", "poly8_fixed", "himmelblau_like")


@dataclass(frozen=True)
class Dataset:
    """Training samples plus the affine map used to normalize the targets.

    ``normalized_targets = a * raw_targets + b`` with ``(a, b) = norm_map``;
    inputs live in the unit hypercube.
    """

    inputs: np.ndarray
    raw_targets: np.ndarray
    normalized_targets: np.ndarray
    norm_map: tuple = (1.0, 0.0)

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        if inputs.shape[0] == 1 and inputs.shape[1] > 1 and np.asarray(self.raw_targets).size > 1:
            inputs = inputs.T
        raw = np.asarray(self.raw_targets, dtype=float).ravel()
        normed = np.asarray(self.normalized_targets, dtype=float).ravel()
        if inputs.shape[0] != raw.size or raw.size != normed.size:
            raise ValueError("inputs and targets must have matching lengths")
        a, b = self.norm_map
        if raw.size and np.max(np.abs(a * raw + b - normed)) > 1e-9:
            raise ValueError("normalized targets do not match the affine map")
        for arr in (inputs, raw, normed):
            arr.flags.writeable = False
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "raw_targets", raw)
        object.__setattr__(self, "normalized_targets", normed)
        object.__setattr__(self, "norm_map", (float(a), float(b)))

    def __len__(self) -> int:
        return self.raw_targets.size

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    def denormalize(self, values) -> np.ndarray:
        """Map model-scale values back to the raw target scale."""
        a, b = self.norm_map
        return (np.asarray(values, dtype=float) - b) / a


def dataset_from_arrays(inputs, targets) -> Dataset:
    """Dataset with identity normalization (targets used as-is)."""
    targets = np.asarray(targets, dtype=float)
    return Dataset(inputs=inputs, raw_targets=targets, normalized_targets=targets)


def make_poly8_coeffs(seed: int) -> np.ndarray:
    """Coefficients a_1..a_8, i.i.d. uniform in [-30, 30] from the seed."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.uniform(-30.0, 30.0, 8)


def _poly8(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    powers = np.stack([x**j for j in range(1, 9)], axis=-1)
    return powers @ coeffs


def target_function(name: str, x) -> float:
    """Evaluate a named target function at a single point."""
    return float(evaluate_target(name, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def evaluate_target(name: str, xs: np.ndarray) -> np.ndarray:
    """Vectorized target evaluation on a batch of input vectors."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if name == "sigmoid10":
        x = xs[:, 0]
        e = np.exp(-10.0 * x)
        return (1.0 - e) / (1.0 + e)
    if name == "poly8_fixed":
        x = xs[:, 0]
        return 10 * x**2 - 14 * x**4 - 3 * x**6 + 7 * x**8 - np.cos(x)
    if name == "himmelblau_like":
        x1, x2 = xs[:, 0], xs[:, 1]
        return (x1**2 + x2 - 1.5 * np.pi) ** 2 + (x1 + x2**2 - np.pi) ** 2
    if name.startswith("poly8_random:"):
        seed = int(name.split(":", 1)[1])
        return _poly8(make_poly8_coeffs(seed), xs[:, 0])
    raise ValueError(f"unknown target function {name!r}")


def function_arity(name: str) -> int:
    return 2 if name == "himmelblau_like" else 1


def sample_grid(name: str, counts, radius: float = 1.0) -> Dataset:
    """Evenly sampled grid on ``[-radius, radius]^m``, endpoints included.

    Targets are evaluated at the physical points; stored inputs are rescaled
    to ``[-1, 1]^m``.  Normalization is not applied yet (the map is the
    identity until :func:`normalize_targets` is called).
    """
    m = function_arity(name)
    if np.isscalar(counts):
        counts = [int(counts)] * m
    counts = [int(c) for c in counts]
    if len(counts) != m:
        raise ValueError(f"{name} takes {m} inputs, got {len(counts)} axis counts")
    if any(c < 2 for c in counts):
        raise ValueError("need at least two points per axis")
    axes = [np.linspace(-radius, radius, c) for c in counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=1)
    raw = evaluate_target(name, points)
    return Dataset(inputs=points / radius, raw_targets=raw, normalized_targets=raw)


def normalize_targets(dataset: Dataset, lam_min: float = -1.0, lam_max: float = 1.0) -> Dataset:
    """Affine min-max map of raw targets onto ``[lam_min, lam_max]``.

    If the raw targets already fit in the range the identity map is kept, so
    functions like the sigmoid are fitted on their natural scale.
    """
    raw = dataset.raw_targets
    lo, hi = float(np.min(raw)), float(np.max(raw))
    if lo >= lam_min and hi <= lam_max:
        a, b = 1.0, 0.0
    else:
        if hi - lo < 1e-15:
            raise ValueError("constant targets cannot be normalized")
        a = (lam_max - lam_min) / (hi - lo)
        b = lam_min - a * lo
    return Dataset(
        inputs=dataset.inputs,
        raw_targets=raw,
        normalized_targets=a * raw + b,
        norm_map=(a, b),
    )
