"""Independent brute-force reference implementations used only by the tests.

Deliberately avoids every fast path in the package: circuits are evaluated by
building full 2^n x 2^n matrices with Kronecker products and multiplying them
out, and channel values are frozen numbers from a separate hand-evaluation
script.
"""

import math

import numpy as np

IDENTITY = np.eye(2, dtype=complex)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """2x2 rotation exp(-i angle/2 P) computed via the matrix exponential."""
    paulis = {
        "rx": np.array([[0, 1], [1, 0]], dtype=complex),
        "ry": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "rz": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    pauli = paulis[kind]
    # exp(-i a/2 P) = cos(a/2) I - i sin(a/2) P for involutory P
    return math.cos(angle / 2) * IDENTITY - 1j * math.sin(angle / 2) * pauli


def embed_single(u: np.ndarray, target: int, n: int) -> np.ndarray:
    """Lift a 2x2 matrix acting on qubit ``target`` to the full register.

    Qubit k is bit k of the basis index, so the Kronecker chain runs from the
    highest qubit down to qubit 0.
    """
    mat = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):
        mat = np.kron(mat, u if q == target else IDENTITY)
    return mat


def cz_matrix(control: int, target: int, n: int) -> np.ndarray:
    dim = 1 << n
    mat = np.eye(dim, dtype=complex)
    for i in range(dim):
        if (i >> control) & 1 and (i >> target) & 1:
            mat[i, i] = -1.0
    return mat


def dense_circuit_matrix(gates, n: int) -> np.ndarray:
    """Full unitary of a gate sequence (gates given as qsim.Gate objects)."""
    mat = np.eye(1 << n, dtype=complex)
    for gate in gates:
        if gate.kind == "cz":
            full = cz_matrix(gate.control, gate.target, n)
        else:
            full = embed_single(rotation_matrix(gate.kind, gate.angle),
                                gate.target, n)
        mat = full @ mat
    return mat


def dense_run(gates, n: int) -> np.ndarray:
    """Statevector after applying ``gates`` to |0...0>."""
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1.0
    return dense_circuit_matrix(gates, n) @ state


def pauli_product_matrix(paulis, n: int) -> np.ndarray:
    """Dense matrix of a Pauli product given (qubit, axis) pairs."""
    singles = {
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    mat = np.eye(1 << n, dtype=complex)
    for qubit, axis in paulis:
        mat = embed_single(singles[axis], qubit, n) @ mat
    return mat


def dense_expectation(state: np.ndarray, paulis, n: int) -> float:
    op = pauli_product_matrix(paulis, n)
    val = np.vdot(state, op @ state)
    assert abs(val.imag) < 1e-10
    return float(val.real)


# Values frozen from an independent straight-line evaluation of the link
# formulas (see the derivations in the test docstrings).
CHANNEL_ORACLE = {
    "los_10_2": 55.72059991327962,
    "los_100_2": 72.62059991327962,
    "nlos_10_2": 128.03089986991944,
    "nlos_100_2": 168.03089986991944,
    "plos_7": 0.36787944117144233,
    "plos_60": 7.81933232345508e-09,
    "sigma2_dbm114": 3.9810717055349695e-15,
    "cd_10": 124988857.09794432,
    "cd_100": 22748.006337530052,
    "cb_100_10": 189306267.58197424,
    "cb_1000_100": 1968056.9977786853,
}


def throughput_moments(config, d_dt, d_tr, policy):
    """Exact per-slot mean/variance of clamped throughput under a fixed action
    distribution, by enumerating (action, cu_active, protected)."""
    from spectrumrl.channel import backscatter_rate, d2d_rate

    geom = config.geometry(d_dt, d_tr)
    c_d, c_b = d2d_rate(geom), backscatter_rate(geom)
    pa, pp = config.p_access, config.p_protected
    outcomes = []
    for action, p_action in enumerate(policy):
        if p_action == 0.0:
            continue
        for cu, p_cu in ((False, 1.0 - pa), (True, pa)):
            branches = [(False, 1.0)] if not cu else [(False, 1.0 - pp),
                                                      (True, pp)]
            for prot, p_prot in branches:
                if action == 0:
                    value = 0.0
                elif action == 1:
                    value = config.penalty if (cu and not prot) else c_d
                else:
                    value = c_b if (cu or not config.backscatter_requires_cu) else 0.0
                outcomes.append((p_action * p_cu * p_prot, max(value, 0.0)))
    mean = sum(p * v for p, v in outcomes)
    second = sum(p * v * v for p, v in outcomes)
    return mean, second - mean**2


def random_circuit(rng: np.random.Generator, n: int, max_gates: int = 20):
    """Random gate sequence over the supported gate set, as spec dicts."""
    gates = []
    for _ in range(int(rng.integers(1, max_gates + 1))):
        kinds = ["rx", "ry", "rz"] + (["cz"] if n > 1 else [])
        kind = str(rng.choice(kinds))
        target = int(rng.integers(0, n))
        if kind == "cz":
            control = int(rng.choice([q for q in range(n) if q != target]))
            gates.append({"kind": "cz", "target": target, "control": control})
        else:
            gates.append({"kind": kind, "target": target,
                          "angle": float(rng.uniform(0, 2 * math.pi))})
    return gates
