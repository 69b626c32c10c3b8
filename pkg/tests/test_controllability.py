import numpy as np
import pytest

import pulseqnn as pq
from pulseqnn.controllability import (
    check_model,
    ensemble_closure,
    lie_closure,
    monomial_exponents,
    su_basis,
    su_basis_labeled,
)


class TestSuBasis:
    @pytest.mark.parametrize("d,count", [(2, 3), (3, 8), (4, 15)])
    def test_element_count(self, d, count):
        assert len(su_basis(d)) == count

    def test_d2_matches_paulis(self):
        ops = {label: op for op, label in su_basis_labeled(2)}
        assert np.allclose(ops["X(1,2)"], 1j * pq.pauli("x"))
        assert np.allclose(ops["Y(1,2)"], 1j * pq.pauli("y"))
        assert np.allclose(ops["Z(1)"], 1j * pq.pauli("z"))

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_orthogonality_and_structure(self, d):
        basis = su_basis(d)
        for i, a in enumerate(basis):
            assert np.max(np.abs(a + a.conj().T)) < 1e-14
            assert abs(np.trace(a)) < 1e-13
            for b in basis[i + 1 :]:
                assert abs(np.trace(a.conj().T @ b).real) < 1e-12

    def test_rejects_small_dimension(self):
        with pytest.raises(ValueError):
            su_basis(1)


class TestLieClosure:
    def test_xy_generates_su2(self):
        report = lie_closure([1j * pq.pauli("x"), 1j * pq.pauli("y")])
        assert report.dimension == 3
        assert report.verdict == "full"
        assert report.missing == []

    def test_single_z_is_abelian(self):
        report = lie_closure([1j * pq.pauli("z")])
        assert report.dimension == 1
        assert report.verdict == "deficient"
        assert len(report.missing) == 2  # X and Y directions unreachable

    def test_circular_two_controls_fill_su4(self):
        m = pq.build_circular_model(2)
        report = lie_closure([1j * h for h in m.controls])
        assert report.dimension == 15
        assert report.verdict == "full"

    def test_basis_is_orthonormal(self):
        m = pq.build_circular_model(2)
        report = lie_closure([1j * h for h in m.controls])
        for i, a in enumerate(report.basis):
            for j, b in enumerate(report.basis):
                ip = np.trace(a.conj().T @ b).real
                assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-9)

    def test_dimension_bounded_by_ambient(self, rng):
        gens = []
        for _ in range(6):
            a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            h = (a + a.conj().T) / 2
            gens.append(1j * (h - np.trace(h) / 3 * np.eye(3)))
        report = lie_closure(gens)
        assert report.dimension <= report.ambient_dimension == 8

    def test_order_and_mixing_invariance(self, rng):
        m = pq.build_circular_model(2)
        gens = [1j * h for h in m.controls]
        base = lie_closure(gens)
        for _ in range(10):
            shuffled = [gens[i] for i in rng.permutation(len(gens))]
            mix = rng.normal(size=(len(gens), len(gens)))
            while abs(np.linalg.det(mix)) < 1e-3:
                mix = rng.normal(size=(len(gens), len(gens)))
            mixed = [sum(mix[i, j] * shuffled[j] for j in range(len(gens))) for i in range(len(gens))]
            report = lie_closure(mixed)
            assert report.dimension == base.dimension
            assert report.verdict == base.verdict

    def test_rejects_non_skew(self):
        with pytest.raises(ValueError):
            lie_closure([pq.pauli("x")])  # Hermitian, not skew-Hermitian


class TestEnsembleClosure:
    def test_full_single_qubit(self):
        report = ensemble_closure([(pq.pauli("z"), 0)], [pq.pauli("x"), pq.pauli("y")], 3)
        assert report.verdict == "full"
        assert report.dimension == report.ambient_dimension == 4 * 3

    def test_parity_obstruction_pattern(self):
        # dropping the y control leaves exactly even-X / odd-Y / odd-Z
        report = ensemble_closure([(pq.pauli("z"), 0)], [pq.pauli("x")], 4)
        assert report.verdict == "deficient"
        expected_reached = {
            "1*X(1,2)",
            "x1*Y(1,2)",
            "x1*Z(1)",
            "x1^2*X(1,2)",
            "x1^3*Y(1,2)",
            "x1^3*Z(1)",
            "x1^4*X(1,2)",
        }
        assert set(report.reached) == expected_reached
        assert report.dimension == len(expected_reached)
        all_pairs = {
            f"{mono}*{direction}"
            for mono in ("1", "x1", "x1^2", "x1^3", "x1^4")
            for direction in ("X(1,2)", "Y(1,2)", "Z(1)")
        }
        assert set(report.missing) == all_pairs - expected_reached

    def test_bivariate_model_full_at_degree_two(self):
        m = pq.build_bivariate_model()
        report = ensemble_closure(
            [(d, j) for j, d in enumerate(m.encoders)], list(m.controls), 2
        )
        assert report.verdict == "full"
        assert report.ambient_dimension == 6 * 3  # 6 monomials of degree <= 2

    def test_degenerate_encoder_circular_two(self):
        # encoder Z1 + Z2 has the degenerate eigenvalue 0
        m = pq.build_circular_model(2)
        report = ensemble_closure([(m.encoders[0], 0)], list(m.controls), 2)
        assert report.verdict == "full"
        assert report.dimension == 3 * 15

    def test_coverage_by_degree(self):
        report = ensemble_closure([(pq.pauli("z"), 0)], [pq.pauli("x")], 3)
        assert report.coverage_by_degree == {0: (1, 3), 1: (2, 3), 2: (1, 3), 3: (2, 3)}

    def test_rejects_bad_cutoff(self):
        with pytest.raises(ValueError):
            ensemble_closure([(pq.pauli("z"), 0)], [pq.pauli("x")], 0)

    def test_monomial_enumeration(self):
        monos = monomial_exponents(2, 2)
        assert monos == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


class TestCheckModel:
    def test_single_qubit_both_full(self):
        mc = check_model(pq.build_single_qubit_model(), 4)
        assert mc.plain.verdict == "full"
        assert mc.ensemble.verdict == "full"
        assert "up to degree 4" in mc.note

    def test_x_only_control_deficient(self):
        m = pq.PulseModel(
            n_qubits=1, encoders=(pq.pauli("z"),), controls=(pq.pauli("x"),)
        )
        mc = check_model(m, 3)
        assert mc.plain.verdict == "deficient"
        assert mc.plain.dimension == 1
        assert mc.ensemble.verdict == "deficient"
        assert "does not prove the model inexpressive" in mc.note

    def test_circular_two(self):
        mc = check_model(pq.build_circular_model(2), 2)
        assert mc.plain.verdict == "full"
        assert mc.plain.dimension == 15

    def test_report_serialization(self):
        mc = check_model(pq.build_single_qubit_model(), 2)
        payload = mc.to_dict()
        assert payload["verdict"] == "full"
        assert payload["ensemble"]["degree_cutoff"] == 2
        assert set(payload["plain"]) >= {
            "dimension",
            "ambient_dimension",
            "verdict",
            "missing",
            "generations",
        }
