"""Numeric Lie-closure engine for controllability checks.

Two checks are provided.  The plain closure asks whether the control
Hamiltonians alone generate all of su(d) (full controllability, sufficient
for expressivity regardless of observable or initial state).  The ensemble
closure runs the same algorithm in the degree-truncated polynomial algebra
span{x1^r1 ... xm^rm} (x) su(d): commutators multiply the monomial
coefficients, and monomials above the cutoff are discarded, which is a
valid quotient because high-degree terms form an ideal.  A "full" ensemble
verdict therefore certifies spanning up to the cutoff degree only.

Deficiency of either closure does not prove the model inexpressive:
the closure conditions are sufficient, not necessary, and a deficient
model may still be expressive for a particular observable and initial
state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ClosureReport",
    "ModelControllability",
    "check_model",
    "ensemble_closure",
    "lie_closure",
    "monomial_exponents",
    "su_basis",
    "su_basis_labeled",
]

DEFAULT_TOL = 1e-9
DEFAULT_DEGREE_CUTOFF = 4
# residual above which a projected direction counts as unreached
_REACH_TOL = 1e-6


@dataclass
class ClosureReport:
    """Result of a Lie-closure run.

    ``basis`` is orthonormal under the Hilbert-Schmidt inner product
    Re tr(A^dag B); for ensemble runs its elements carry one matrix per
    monomial (shape ``(n_monomials, d, d)``).  ``missing`` lists the
    monomial/direction pairs not contained in the closure span.
    """

    dimension: int
    ambient_dimension: int
    verdict: str
    missing: list
    generations: int
    basis: list = field(repr=False, default_factory=list)
    degree_cutoff: int = None
    coverage_by_degree: dict = None
    reached: list = field(repr=False, default_factory=list)

    @property
    def is_full(self) -> bool:
        return self.verdict == "full"

    def to_dict(self) -> dict:
        out = {
            "dimension": self.dimension,
            "ambient_dimension": self.ambient_dimension,
            "verdict": self.verdict,
            "missing": list(self.missing),
            "generations": self.generations,
        }
        if self.degree_cutoff is not None:
            out["degree_cutoff"] = self.degree_cutoff
            out["coverage_by_degree"] = {
                str(deg): {"reached": r, "total": t}
                for deg, (r, t) in sorted(self.coverage_by_degree.items())
            }
        return out


def su_basis(d: int) -> list:
    """Orthogonal basis of su(d): i(|a><b| + |b><a|), |a><b| - |b><a|, and
    i-times the diagonal (Gell-Mann style) traceless operators.

    All elements are skew-Hermitian, traceless, Hilbert-Schmidt orthogonal,
    and have squared norm 2.
    """
    return [op for op, _ in su_basis_labeled(d)]


def su_basis_labeled(d: int) -> list:
    if d < 2:
        raise ValueError("su(d) needs d >= 2")
    out = []
    for a in range(d):
        for b in range(a + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[a, b] = 1j
            x[b, a] = 1j
            out.append((x, f"X({a + 1},{b + 1})"))
            y = np.zeros((d, d), dtype=complex)
            y[a, b] = 1.0
            y[b, a] = -1.0
            out.append((y, f"Y({a + 1},{b + 1})"))
    for a in range(1, d):
        z = np.zeros((d, d), dtype=complex)
        z[np.diag_indices(a)] = 1j
        z[a, a] = -1j * a
        out.append((z * np.sqrt(2.0 / (a * (a + 1))), f"Z({a})"))
    return out


def _validate_skew(mat: np.ndarray, tol: float = 1e-10):
    if np.max(np.abs(mat + mat.conj().T)) > tol:
        raise ValueError("generators must be skew-Hermitian")


def _project_traceless(mat: np.ndarray) -> np.ndarray:
    d = mat.shape[0]
    return mat - (np.trace(mat) / d) * np.eye(d)


class _Closure:
    """Orthonormal-basis Gram-Schmidt closure over vectorized elements."""

    def __init__(self, vec_len: int, ambient: int, tol: float):
        self.vecs = np.zeros((ambient, vec_len))
        self.count = 0
        self.tol = tol
        self.elements = []

    @staticmethod
    def vec(element: np.ndarray) -> np.ndarray:
        return np.concatenate([element.real.ravel(), element.imag.ravel()])

    def residual(self, v: np.ndarray) -> np.ndarray:
        # two projection passes keep orthogonality at machine precision
        for _ in range(2):
            if self.count:
                basis = self.vecs[: self.count]
                v = v - basis.T @ (basis @ v)
        return v

    def admit(self, element: np.ndarray):
        """Orthogonalize against the basis; returns the new index or None."""
        v = self.residual(self.vec(element))
        norm = np.linalg.norm(v)
        if norm <= self.tol:
            return None
        v /= norm
        self.vecs[self.count] = v
        shape = element.shape
        self.elements.append((v[: v.size // 2] + 1j * v[v.size // 2 :]).reshape(shape))
        self.count += 1
        return self.count - 1

    def run(self, seeds: list, commutator) -> int:
        """Breadth-first closure; returns the number of commutator passes."""
        frontier = [idx for s in seeds if (idx := self.admit(s)) is not None]
        ambient = self.vecs.shape[0]
        generations = 0
        while frontier and self.count < ambient:
            new = []
            for ia in frontier:
                ib = 0
                while ib < self.count and self.count < ambient:
                    c = commutator(self.elements[ia], self.elements[ib])
                    idx = self.admit(c)
                    if idx is not None:
                        new.append(idx)
                    ib += 1
            frontier = new
            generations += 1
        return generations


def _matrix_commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def lie_closure(generators: list, tol: float = DEFAULT_TOL) -> ClosureReport:
    """Close a set of skew-Hermitian generators under commutators.

    Returns the orthonormal closure basis and the verdict: ``full`` iff the
    dimension reaches d^2 - 1, i.e. the generators generate all of su(d).
    Trace components (physically a global phase) are projected out.
    """
    if not generators:
        raise ValueError("need at least one generator")
    gens = [np.asarray(g, dtype=complex) for g in generators]
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise ValueError("generators must share one dimension")
        _validate_skew(g)
    gens = [_project_traceless(g) for g in gens]

    ambient = d * d - 1
    closure = _Closure(vec_len=2 * d * d, ambient=ambient, tol=tol)
    generations = closure.run(gens, _matrix_commutator)

    full = closure.count == ambient
    missing = []
    if not full:
        for op, label in su_basis_labeled(d):
            resid = np.linalg.norm(closure.residual(closure.vec(op / np.sqrt(2.0))))
            if resid > _REACH_TOL:
                missing.append(f"{label} (residual {resid:.3f})")
    return ClosureReport(
        dimension=closure.count,
        ambient_dimension=ambient,
        verdict="full" if full else "deficient",
        missing=missing,
        generations=generations,
        basis=closure.elements,
    )


def monomial_exponents(m: int, degree_cutoff: int) -> list:
    """All exponent tuples of total degree <= cutoff, ordered by (degree, lex)."""
    out = []
    for deg in range(degree_cutoff + 1):
        for combo in itertools.combinations_with_replacement(range(m), deg):
            expo = [0] * m
            for j in combo:
                expo[j] += 1
            out.append(tuple(expo))
    return sorted(set(out), key=lambda e: (sum(e), e))


def _monomial_label(expo) -> str:
    if sum(expo) == 0:
        return "1"
    parts = []
    for j, r in enumerate(expo):
        if r == 1:
            parts.append(f"x{j + 1}")
        elif r > 1:
            parts.append(f"x{j + 1}^{r}")
    return "*".join(parts)


def ensemble_closure(
    encoders: list,
    controls: list,
    degree_cutoff: int = DEFAULT_DEGREE_CUTOFF,
    tol: float = DEFAULT_TOL,
) -> ClosureReport:
    """Lie closure in the degree-truncated polynomial algebra.

    ``encoders`` is a list of ``(D_j, variable_index)`` pairs (0-based
    variable index); generators are ``x_j (x) iD_j`` and ``1 (x) iH_k``.
    The verdict is ``full`` iff every monomial of degree <= cutoff carries
    the whole su(d), i.e. the dimension is  n_monomials * (d^2 - 1).
    """
    if degree_cutoff < 1:
        raise ValueError("degree cutoff must be >= 1")
    if not encoders or controls is None:
        raise ValueError("need encoders and controls")
    m = max(idx for _, idx in encoders) + 1
    d = np.asarray(encoders[0][0]).shape[0]
    monos = monomial_exponents(m, degree_cutoff)
    index = {e: i for i, e in enumerate(monos)}
    nm = len(monos)

    # product table: index of mono_i * mono_j, or -1 past the cutoff
    table = np.full((nm, nm), -1, dtype=int)
    for i, ei in enumerate(monos):
        for j, ej in enumerate(monos):
            prod = tuple(a + b for a, b in zip(ei, ej))
            table[i, j] = index.get(prod, -1)

    def poly_commutator(a, b):
        out = np.zeros_like(a)
        nz_a = [i for i in range(nm) if np.any(a[i])]
        nz_b = [j for j in range(nm) if np.any(b[j])]
        for i in nz_a:
            for j in nz_b:
                k = table[i, j]
                if k >= 0:
                    out[k] += a[i] @ b[j] - b[j] @ a[i]
        return out

    seeds = []
    for dj, idx in encoders:
        dj = _project_traceless(np.asarray(dj, dtype=complex))
        el = np.zeros((nm, d, d), dtype=complex)
        expo = tuple(1 if t == idx else 0 for t in range(m))
        el[index[expo]] = 1j * dj
        seeds.append(el)
    for hk in controls:
        hk = _project_traceless(np.asarray(hk, dtype=complex))
        el = np.zeros((nm, d, d), dtype=complex)
        el[0] = 1j * hk
        seeds.append(el)
    for el in seeds:
        for comp in el:
            if np.any(comp):
                _validate_skew(comp)

    ambient = nm * (d * d - 1)
    closure = _Closure(vec_len=2 * nm * d * d, ambient=ambient, tol=tol)
    generations = closure.run(seeds, poly_commutator)

    su = su_basis_labeled(d)
    missing, reached = [], []
    coverage = {deg: [0, 0] for deg in range(degree_cutoff + 1)}
    for i, expo in enumerate(monos):
        deg = sum(expo)
        for op, label in su:
            vec_el = np.zeros((nm, d, d), dtype=complex)
            vec_el[i] = op / np.sqrt(2.0)
            resid = np.linalg.norm(closure.residual(closure.vec(vec_el)))
            name = f"{_monomial_label(expo)}*{label}"
            coverage[deg][1] += 1
            if resid > _REACH_TOL:
                missing.append(name)
            else:
                coverage[deg][0] += 1
                reached.append(name)

    full = closure.count == ambient
    return ClosureReport(
        dimension=closure.count,
        ambient_dimension=ambient,
        verdict="full" if full else "deficient",
        missing=missing,
        generations=generations,
        basis=closure.elements,
        degree_cutoff=degree_cutoff,
        coverage_by_degree={k: tuple(v) for k, v in coverage.items()},
        reached=reached,
    )


@dataclass
class ModelControllability:
    """Plain (controls-only) and ensemble closure reports for one model."""

    plain: ClosureReport
    ensemble: ClosureReport
    note: str

    def to_dict(self) -> dict:
        return {
            "verdict": self.ensemble.verdict,
            "plain": self.plain.to_dict(),
            "ensemble": self.ensemble.to_dict(),
            "note": self.note,
        }


def check_model(model, degree_cutoff: int = DEFAULT_DEGREE_CUTOFF) -> ModelControllability:
    """Run both controllability checks on a pulse model.

    The plain closure tests the controls alone against su(d); the ensemble
    closure tests encoders + controls in the truncated polynomial algebra.
    """
    plain = lie_closure([1j * h for h in model.controls])
    ensemble = ensemble_closure(
        [(d, j) for j, d in enumerate(model.encoders)],
        list(model.controls),
        degree_cutoff=degree_cutoff,
    )
    if ensemble.is_full:
        headline = f"ensemble controllable up to degree {degree_cutoff}"
    else:
        headline = f"ensemble closure deficient at degree cutoff {degree_cutoff}"
    note = (
        f"{headline}; plain control closure {plain.verdict} "
        f"({plain.dimension}/{plain.ambient_dimension}). A full verdict "
        f"certifies spanning up to the cutoff degree only; a deficient "
        f"closure does not prove the model inexpressive (the condition is "
        f"sufficient, not necessary, and depends on neither observable nor "
        f"initial state)."
    )
    return ModelControllability(plain=plain, ensemble=ensemble, note=note)
