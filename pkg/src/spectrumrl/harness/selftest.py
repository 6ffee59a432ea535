"""Quick self-contained verification suite behind ``spectrumrl selftest``.

Each check prints one PASS/FAIL line; the command exits non-zero if any check
fails. The checks mirror the heavier pytest suite but run in seconds:
brute-force dense-matrix circuit comparison, finite-difference gradient
probes, closed-form baseline expectations, and CSV byte-determinism.
"""

from __future__ import annotations

import math

import numpy as np

from .. import qsim
from ..channel import backscatter_rate, d2d_rate
from ..env import EnvConfig, Environment, Transition
from ..nn import dnn_param_count
from ..qpolicy import (PqcParams, param_count, policy_gradient,
                       reinforce_loss)
from .config import AgentSpec, ExperimentConfig
from .runner import run_single

_I = np.eye(2, dtype=complex)


def _dense_gate(gate: qsim.Gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one gate, built with Kronecker products."""
    half = gate.angle / 2.0
    if gate.kind == "rx":
        u = np.array([[math.cos(half), -1j * math.sin(half)],
                      [-1j * math.sin(half), math.cos(half)]])
    elif gate.kind == "ry":
        u = np.array([[math.cos(half), -math.sin(half)],
                      [math.sin(half), math.cos(half)]], dtype=complex)
    elif gate.kind == "rz":
        u = np.diag([np.exp(-1j * half), np.exp(1j * half)])
    else:  # cz
        dim = 1 << n
        mat = np.eye(dim, dtype=complex)
        for i in range(dim):
            if (i >> gate.target) & 1 and (i >> gate.control) & 1:
                mat[i, i] = -1.0
        return mat
    mat = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):  # qubit k is bit k: highest qubit first
        mat = np.kron(mat, u if q == gate.target else _I)
    return mat


def _dense_run(gates, n: int) -> np.ndarray:
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1.0
    for gate in gates:
        state = _dense_gate(gate, n) @ state
    return state


def check_param_counts() -> bool:
    return (dnn_param_count([5, 16, 16, 3]) == 419
            and dnn_param_count([5, 32, 32, 3]) == 1347
            and param_count(1, 5) == 38
            and param_count(3, 5) == 78
            and param_count(5, 5) == 118)


def check_statevector_oracle(n_circuits: int = 20, seed: int = 7) -> bool:
    rng = np.random.default_rng(seed)
    for _ in range(n_circuits):
        n = int(rng.integers(1, 6))
        gates = []
        for _ in range(int(rng.integers(1, 21))):
            kind = rng.choice(["rx", "ry", "rz", "cz"] if n > 1 else
                              ["rx", "ry", "rz"])
            target = int(rng.integers(0, n))
            if kind == "cz":
                control = int(rng.choice([q for q in range(n) if q != target]))
                gates.append(qsim.Gate("cz", target, control=control))
            else:
                gates.append(qsim.Gate(kind, target,
                                       angle=float(rng.uniform(0, 2 * np.pi))))
        fast = qsim.apply_circuit(qsim.init_zero(n), gates).amplitudes
        slow = _dense_run(gates, n)
        if np.max(np.abs(fast - slow)) > 1e-10:
            return False
    return True


def _tiny_batch(config: EnvConfig, params: PqcParams, n_steps: int = 4):
    env = Environment(config, np.random.default_rng(3))
    rng = np.random.default_rng(4)
    state = env.reset()
    traj = []
    for _ in range(n_steps):
        action = int(rng.integers(0, 3))
        nxt, reward = env.step(action)
        traj.append(Transition(state, action, reward, nxt))
        state = nxt
    return [traj]


def check_parameter_shift(seed: int = 11) -> bool:
    rng = np.random.default_rng(seed)
    config = EnvConfig(horizon=4)
    params = PqcParams.init(1, 5, 3, rng)
    batch = _tiny_batch(config, params)
    grads = policy_gradient(batch, params, 0.9, config)
    h = 1e-4
    for group in ("phi", "lam", "w"):
        arr = getattr(params, group)
        flat_grad = grads[group].ravel()
        for idx in range(0, arr.size, max(1, arr.size // 4)):
            orig = arr.ravel()[idx]
            arr.ravel()[idx] = orig + h
            up = reinforce_loss(batch, params, 0.9, config)
            arr.ravel()[idx] = orig - h
            down = reinforce_loss(batch, params, 0.9, config)
            arr.ravel()[idx] = orig
            fd = (up - down) / (2 * h)
            if not math.isclose(flat_grad[idx], fd, rel_tol=1e-4, abs_tol=1e-7):
                return False
    return True


def check_baseline_closed_form(slots: int = 20000, seed: int = 5) -> bool:
    config = EnvConfig()
    env = Environment(config, np.random.default_rng(seed))
    rng = np.random.default_rng(seed + 1)
    sim_sum = 0.0
    exp_sum = 0.0
    var_sum = 0.0
    p_keep = 1.0 - config.p_access + config.p_access * config.p_protected
    steps = 0
    while steps < slots:
        state = env.reset()
        geom = config.geometry(state.d_dt, state.d_tr)
        c_d, c_b = d2d_rate(geom), backscatter_rate(geom)
        # uniform action: throughput moments by enumerating the slot outcomes
        mean = (p_keep * c_d + config.p_access * c_b) / 3.0
        second = (p_keep * c_d**2 + config.p_access * c_b**2) / 3.0
        for _ in range(min(config.horizon, slots - steps)):
            action = int(rng.integers(0, 3))
            state, reward = env.step(action)
            sim_sum += max(reward, 0.0)
            exp_sum += mean
            var_sum += second - mean**2
            steps += 1
    sigma = math.sqrt(var_sum) / slots
    return abs(sim_sum / slots - exp_sum / slots) <= 3.0 * sigma


def check_csv_determinism() -> bool:
    cfg = ExperimentConfig(agent=AgentSpec(kind="random"), total_steps=500,
                           seeds=(1,), record_every=50, eval_window=100)
    a = run_single(cfg, 1).csv_text
    b = run_single(cfg, 1).csv_text
    return a == b


def check_policy_is_distribution(seed: int = 13) -> bool:
    rng = np.random.default_rng(seed)
    config = EnvConfig()
    params = PqcParams.init(3, 5, 3, rng)
    env = Environment(config, rng)
    state = env.reset()
    from ..qpolicy import policy

    probs = policy(state, params, config)
    return (abs(probs.sum() - 1.0) < 1e-12 and np.all(probs > 0)
            and np.all(probs < 1))


CHECKS = (
    ("parameter counts", check_param_counts),
    ("statevector vs dense oracle", check_statevector_oracle),
    ("parameter-shift vs finite differences", check_parameter_shift),
    ("baseline closed form", check_baseline_closed_form),
    ("csv determinism", check_csv_determinism),
    ("policy distribution", check_policy_is_distribution),
)


def run_selftest(print_fn=print) -> bool:
    ok = True
    print_fn(f"statevector backend: {qsim.backend_name()}")
    for name, check in CHECKS:
        passed = bool(check())
        ok = ok and passed
        print_fn(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
