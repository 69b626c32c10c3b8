import numpy as np
import pytest

import pulseqnn as pq
from pulseqnn.data import dataset_from_arrays

from conftest import paper_models, z1_observable


class TestEvolve:
    def test_zero_schedule_is_identity(self):
        m = pq.build_single_qubit_model()
        sched = pq.PulseSchedule(5.0, np.zeros((10, 2)))
        psi = pq.evolve(m, sched, 0.0)
        assert np.allclose(psi, m.initial_state, atol=1e-14)

    def test_half_pi_rabi(self):
        # constant theta1 with theta1 * T = pi/2 flips |0> to -i|1>
        m = pq.build_single_qubit_model()
        k = 40
        sched = pq.PulseSchedule(2.0, np.column_stack([np.full(k, np.pi / 4), np.zeros(k)]))
        psi = pq.evolve(m, sched, 0.0)
        assert np.allclose(psi, [0.0, -1.0j], atol=1e-12)
        assert pq.expectation(pq.pauli("z"), psi) == pytest.approx(-1.0)

    def test_rescaling_invariance(self, rng):
        m = pq.build_bivariate_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(2.5, rng.uniform(-1, 1, (8, 2)))
        x = rng.uniform(-1, 1, 2)
        for radius in (0.25, 3.0):
            a = pq.evolve(m, sched, x)
            b = pq.evolve(m, pq.rescale_schedule(sched, radius), x / radius)
            assert np.max(np.abs(a - b)) < 1e-9

    def test_norm_preserved(self, rng):
        for _, m in paper_models():
            sched = pq.PulseSchedule(1.5, rng.uniform(-2, 2, (12, m.n_controls)))
            psi = pq.evolve(m, sched, rng.uniform(-1, 1, m.n_inputs))
            assert abs(np.linalg.norm(psi) - 1.0) < 1e-10

    def test_arity_mismatch(self):
        m = pq.build_single_qubit_model()
        sched = pq.PulseSchedule(1.0, np.zeros((2, 3)))
        with pytest.raises(ValueError):
            pq.evolve(m, sched, 0.0)


class TestPredict:
    def test_zero_schedule_measures_initial_state(self):
        m = pq.build_single_qubit_model()
        sched = pq.PulseSchedule(1.0, np.zeros((5, 2)))
        obs = z1_observable(1)
        assert pq.predict(m, sched, 0.0, obs).value == pytest.approx(1.0)

    def test_rabi_flip(self):
        m = pq.build_single_qubit_model()
        sched = pq.PulseSchedule(np.pi / 2, np.array([[1.0, 0.0]]))
        obs = z1_observable(1)
        assert pq.predict(m, sched, 0.0, obs).value == pytest.approx(-1.0)

    def test_values_within_spectral_range(self, rng):
        obs = z1_observable(1)
        m = pq.build_single_qubit_model()
        for _ in range(20):
            sched = pq.PulseSchedule(rng.uniform(0.5, 4), rng.uniform(-2, 2, (7, 2)))
            val = pq.predict(m, sched, rng.uniform(-1, 1), obs).value
            assert -1.0 - 1e-12 <= val <= 1.0 + 1e-12


class TestPredictBatch:
    def test_singleton_matches_predict(self, rng):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, rng.uniform(-1, 1, (4, 2)))
        single = pq.predict(m, sched, 0.3, obs)
        batch = pq.predict_batch(m, sched, [0.3], obs)
        assert len(batch) == 1
        assert batch[0].value == pytest.approx(single.value, abs=1e-15)

    def test_order_preserved_and_pure(self, rng):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, rng.uniform(-1, 1, (4, 2)))
        xs = np.linspace(-1, 1, 9)
        values = [p.value for p in pq.predict_batch(m, sched, xs, obs)]
        perm = rng.permutation(9)
        permuted = [p.value for p in pq.predict_batch(m, sched, xs[perm], obs)]
        assert np.allclose(np.array(values)[perm], permuted, atol=1e-15)

    def test_empty_batch_rejected(self):
        m = pq.build_single_qubit_model()
        sched = pq.PulseSchedule(1.0, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            pq.predict_batch(m, sched, np.zeros((0, 1)), z1_observable(1))

    def test_paper_sized_batch(self):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, np.full((10, 2), 0.1))
        preds = pq.predict_batch(m, sched, np.linspace(-1, 1, 200), obs)
        assert len(preds) == 200


class TestLossAndGradient:
    def test_zero_at_exact_fit(self, rng):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, rng.uniform(-1, 1, (5, 2)))
        xs = np.linspace(-1, 1, 7)
        ys = [pq.predict(m, sched, x, obs).value for x in xs]
        rec = pq.loss_and_gradient(m, sched, dataset_from_arrays(xs, ys), obs)
        assert rec.loss < 1e-12
        assert np.max(np.abs(rec.grad)) < 1e-12

    def test_single_segment_matches_finite_difference(self, rng):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(0.7, rng.uniform(-1, 1, (1, 2)))
        ds = dataset_from_arrays([0.4], [0.2])
        rec = pq.loss_and_gradient(m, sched, ds, obs)
        fd = pq.finite_difference_gradient(m, sched, ds, obs, step=1e-6)
        assert np.max(np.abs(rec.grad - fd.grad)) / max(1.0, np.max(np.abs(fd.grad))) < 1e-6

    @pytest.mark.parametrize("model_name,model", paper_models())
    def test_random_instances_match_finite_difference(self, rng, model_name, model):
        obs = z1_observable(model.n_qubits)
        for _ in range(5):
            k = int(rng.integers(1, 10))
            sched = pq.PulseSchedule(rng.uniform(0.3, 2.0), rng.uniform(-1, 1, (k, model.n_controls)))
            n = int(rng.integers(1, 6))
            xs = rng.uniform(-1, 1, (n, model.n_inputs))
            ys = rng.uniform(-0.9, 0.9, n)
            ds = dataset_from_arrays(xs, ys)
            rec = pq.loss_and_gradient(model, sched, ds, obs)
            fd = pq.finite_difference_gradient(model, sched, ds, obs, step=1e-6)
            rel = np.max(np.abs(rec.grad - fd.grad)) / max(1.0, np.max(np.abs(fd.grad)))
            assert rel < 1e-6

    def test_target_out_of_range_rejected(self):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, np.zeros((3, 2)))
        ds = dataset_from_arrays([0.0], [3.0])
        with pytest.raises(ValueError, match="normalize_targets"):
            pq.loss_and_gradient(m, sched, ds, obs)

    def test_empty_dataset_rejected(self):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, np.zeros((3, 2)))
        ds = dataset_from_arrays(np.zeros((0, 1)), np.zeros(0))
        with pytest.raises(ValueError):
            pq.loss_and_gradient(m, sched, ds, obs)


class TestFiniteDifferenceOracle:
    def test_zero_gradient_fixture(self, rng):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, rng.uniform(-0.5, 0.5, (3, 2)))
        xs = np.linspace(-1, 1, 5)
        ys = [pq.predict(m, sched, x, obs).value for x in xs]
        fd = pq.finite_difference_gradient(m, sched, dataset_from_arrays(xs, ys), obs, step=1e-5)
        assert np.max(np.abs(fd.grad)) < 1e-8

    def test_step_sensitivity(self, rng):
        m = pq.build_single_qubit_model()
        obs = z1_observable(1)
        sched = pq.PulseSchedule(1.0, rng.uniform(-1, 1, (3, 2)))
        ds = dataset_from_arrays([0.2, -0.5], [0.1, -0.3])
        g5 = pq.finite_difference_gradient(m, sched, ds, obs, step=1e-5).grad
        g6 = pq.finite_difference_gradient(m, sched, ds, obs, step=1e-6).grad
        assert np.max(np.abs(g5 - g6)) < 1e-5

    def test_rejects_bad_step(self):
        m = pq.build_single_qubit_model()
        sched = pq.PulseSchedule(1.0, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            pq.finite_difference_gradient(
                m, sched, dataset_from_arrays([0.0], [0.0]), z1_observable(1), step=0.0
            )
