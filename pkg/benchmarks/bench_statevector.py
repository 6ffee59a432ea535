#!/usr/bin/env python3
"""Benchmark the two statevector kernel backends.

Times the three workloads that dominate training:

* single-circuit application (acting),
* batched circuit evaluation with observables,
* the parameter-shift Jacobian sweep (the gradient hot path),

plus one end-to-end policy gradient step per backend. Run from the repo root:

    python benchmarks/bench_statevector.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from spectrumrl import qsim
from spectrumrl.env import EnvConfig, Environment, Transition
from spectrumrl.qpolicy import (PqcParams, default_observables, encode_state,
                                get_template, policy_gradient)


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def policy_circuit_arrays(n_layers=3, n_qubits=5, seed=0):
    params = PqcParams.init(n_layers, n_qubits, 3, np.random.default_rng(seed))
    template = get_template(n_layers, n_qubits)
    feats = np.random.default_rng(seed + 1).uniform(size=(1, n_qubits))
    angles = template.angles_batch(feats, params)
    masks = np.array([o.mask() for o in default_observables(n_qubits, 3)],
                     dtype=np.uint64)
    return template, angles, masks


def make_batch(n_episodes=1, horizon=100, seed=3):
    config = EnvConfig()
    env = Environment(config, np.random.default_rng(seed))
    arng = np.random.default_rng(seed + 1)
    batch = []
    for _ in range(n_episodes):
        state = env.reset()
        traj = []
        for _ in range(horizon):
            action = int(arng.integers(0, 3))
            nxt, reward = env.step(action)
            traj.append(Transition(state, action, reward, nxt))
            state = nxt
        batch.append(traj)
    return config, batch


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = ["python"]
    try:
        qsim.get_kernels("cython")
        backends.append("cython")
    except ValueError:
        print("compiled backend not built; benchmarking the fallback only")

    template, angles, masks = policy_circuit_arrays()
    rot = template.rot_positions
    batch_angles = np.repeat(angles, 100, axis=0)
    config, batch = make_batch()
    params = PqcParams.init(3, 5, 3, np.random.default_rng(7))

    print(f"policy circuit: {template.n_gates} gates, 5 qubits, "
          f"{len(rot)} shift positions, 3 observables")
    print(f"{'workload':<38}" + "".join(f"{b:>14}" for b in backends)
          + f"{'speedup':>10}")
    rows = [
        ("apply one circuit (us)", 1e6, lambda k: lambda: k.run_batch_expect(
            5, template.kinds, template.targets, template.controls, angles,
            masks)),
        ("evaluate 100-circuit batch (ms)", 1e3, lambda k: lambda:
            k.run_batch_expect(5, template.kinds, template.targets,
                               template.controls, batch_angles, masks)),
        ("parameter-shift Jacobian x10 (ms)", 1e3, lambda k: lambda:
            k.shift_jacobian_batch(5, template.kinds, template.targets,
                                   template.controls,
                                   batch_angles[:10], rot, masks)),
        ("policy gradient, 1 episode (ms)", 1e3, lambda k: lambda:
            policy_gradient(batch, params, 0.9, config, kernels=k)),
    ]
    for name, scale, make in rows:
        results = []
        for backend in backends:
            kernels = qsim.get_kernels(backend)
            results.append(best_of(make(kernels), args.repeats) * scale)
        speedup = results[0] / results[-1] if len(results) > 1 else 1.0
        print(f"{name:<38}" + "".join(f"{r:>14.3f}" for r in results)
              + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
