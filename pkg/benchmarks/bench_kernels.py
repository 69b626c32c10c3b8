"""Benchmark the compiled kernels against the numpy fallback.

Runs the forward propagation and the gradient sweep on workloads shaped
like the shipped experiments and prints per-call timings plus speedups.

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

import pulseqnn as pq
from pulseqnn._kernels import available_backends


def _workloads():
    rng = np.random.default_rng(0)
    out = []
    for label, model, k, n in [
        ("univariate fit   (d=2,  K=1000, N=200)", pq.build_single_qubit_model(), 1000, 200),
        ("bivariate fit    (d=2,  K=1000, N=625)", pq.build_bivariate_model(), 1000, 625),
        ("circular n=2     (d=4,  K=200,  N=100)", pq.build_circular_model(2), 200, 100),
        ("circular n=3     (d=8,  K=120,  N=40)", pq.build_circular_model(3), 120, 40),
    ]:
        theta = rng.uniform(-0.5, 0.5, (k, model.n_controls))
        xs = rng.uniform(-1, 1, (n, model.n_inputs))
        ys = rng.uniform(-0.8, 0.8, n)
        hdata = np.tensordot(xs, np.stack(model.encoders), axes=(1, 0))
        mop = pq.pauli_embed("z", 1, model.n_qubits)
        out.append((label, model, hdata, np.stack(model.controls), theta, mop, ys))
    return out


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("note: compiled backend not built; only timing the numpy fallback")

    for label, model, hdata, hctrl, theta, mop, ys in _workloads():
        print(f"\n{label}")
        times = {}
        for name, mod in sorted(backends.items()):
            t_fwd = _time(
                lambda: mod.evolve_batch(hdata, hctrl, theta, 0.01, model.initial_state),
                args.repeats,
            )
            t_grad = _time(
                lambda: mod.grad_batch(
                    hdata, hctrl, theta, 0.01, model.initial_state, mop, ys
                ),
                args.repeats,
            )
            times[name] = (t_fwd, t_grad)
            print(f"  {name:7s}  evolve {t_fwd * 1e3:8.1f} ms   grad {t_grad * 1e3:8.1f} ms")
        if {"numpy", "cython"} <= times.keys():
            f = times["numpy"][0] / times["cython"][0]
            g = times["numpy"][1] / times["cython"][1]
            print(f"  speedup  evolve {f:7.1f} x     grad {g:7.1f} x")


if __name__ == "__main__":
    main()
