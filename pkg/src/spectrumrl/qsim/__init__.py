"""Dense statevector simulator for small registers (up to 12 qubits).

Supports exactly the gate set the policy circuit needs (RX, RY, RZ, CZ) plus
exact expectation values of Pauli-product observables. Two interchangeable
kernel backends implement the heavy lifting:

* ``cython`` -- compiled extension, used automatically when built;
* ``python`` -- vectorized numpy fallback.

Set ``SPECTRUMRL_BACKEND=python`` (or ``cython``) to force a choice; see
``benchmarks/bench_statevector.py`` for a speed comparison.

Convention: qubit ``k`` corresponds to bit ``k`` of the basis-state index, so
|q_{n-1} ... q_1 q_0> lives at index sum(q_k * 2**k).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _statevector_py

MAX_QUBITS = 12

GATE_KINDS = ("rx", "ry", "rz", "cz")
_KIND_CODE = {"rx": 0, "ry": 1, "rz": 2, "cz": 3}

try:
    from . import _statevector_cy
except ImportError:  # extension not built
    _statevector_cy = None

_FORCED = os.environ.get("SPECTRUMRL_BACKEND", "").strip().lower()
if _FORCED == "python":
    _KERNELS = _statevector_py
elif _FORCED == "cython":
    if _statevector_cy is None:
        raise ImportError(
            "SPECTRUMRL_BACKEND=cython requested but the compiled kernels are "
            "not available; reinstall with a C compiler or unset the variable"
        )
    _KERNELS = _statevector_cy
elif _FORCED:
    raise ImportError(f"unknown SPECTRUMRL_BACKEND {_FORCED!r}")
else:
    _KERNELS = _statevector_cy if _statevector_cy is not None else _statevector_py


def backend_name() -> str:
    return _KERNELS.NAME


def get_kernels(name: str | None = None):
    """Kernel module for ``name`` ('cython' | 'python'), default the active one."""
    if name is None:
        return _KERNELS
    if name == "python":
        return _statevector_py
    if name == "cython":
        if _statevector_cy is None:
            raise ValueError("compiled kernels are not available")
        return _statevector_cy
    raise ValueError(f"unknown backend {name!r}")


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class Gate:
    """One circuit element: kind in {'rx','ry','rz','cz'}; rotations carry an
    angle in radians, cz carries a control index."""

    kind: str
    target: int
    angle: float = 0.0
    control: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cz" and self.control is None:
            raise ValueError("cz gate needs a control qubit")
        if self.kind == "cz" and self.control == self.target:
            raise ValueError("cz control and target must differ")


@dataclass(frozen=True)
class PauliProduct:
    """Tensor product of single-qubit Paulis, e.g. ((0,'Z'), (1,'Z'))."""

    paulis: tuple[tuple[int, str], ...]

    def __post_init__(self):
        seen = set()
        for qubit, axis in self.paulis:
            if axis not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli axis {axis!r}")
            if qubit in seen:
                raise ValueError(f"qubit {qubit} repeated in observable")
            seen.add(qubit)
        if not self.paulis:
            raise ValueError("observable must act on at least one qubit")

    @classmethod
    def z(cls, qubits) -> "PauliProduct":
        return cls(tuple((int(q), "Z") for q in qubits))


def init_zero(n_qubits: int) -> Statevector:
    """The all-zeros register |0...0>."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must lie in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def compile_gates(gates, n_qubits: int):
    """Flatten a gate sequence into the (kinds, targets, controls, angles)
    arrays the kernel backends consume."""
    n = len(gates)
    kinds = np.empty(n, dtype=np.intc)
    targets = np.empty(n, dtype=np.intc)
    controls = np.empty(n, dtype=np.intc)
    angles = np.empty(n, dtype=np.float64)
    for i, gate in enumerate(gates):
        if not 0 <= gate.target < n_qubits:
            raise ValueError(f"gate target {gate.target} out of range")
        if gate.kind == "cz" and not 0 <= gate.control < n_qubits:
            raise ValueError(f"gate control {gate.control} out of range")
        kinds[i] = _KIND_CODE[gate.kind]
        targets[i] = gate.target
        controls[i] = -1 if gate.control is None else gate.control
        angles[i] = gate.angle
    return kinds, targets, controls, angles


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate in place and return the same statevector."""
    return apply_circuit(state, [gate])


def apply_circuit(state: Statevector, gates) -> Statevector:
    """Apply a gate sequence in place and return the same statevector."""
    kinds, targets, controls, angles = compile_gates(gates, state.n_qubits)
    _KERNELS.apply_ops(state.amplitudes, state.n_qubits, kinds, targets,
                       controls, angles)
    return state


def zprod_mask(qubits) -> int:
    mask = 0
    for q in qubits:
        mask |= 1 << int(q)
    return mask


def expectation(state: Statevector, observable: PauliProduct) -> float:
    """Exact expectation <psi|O|psi> of a Pauli-product observable.

    X and Y factors are reduced to Z by rotating a copy of the state into the
    measurement basis (RY(-pi/2) for X, RX(pi/2) for Y).
    """
    basis_change = []
    mask = 0
    for qubit, axis in observable.paulis:
        if not 0 <= qubit < state.n_qubits:
            raise ValueError(f"observable qubit {qubit} out of range")
        mask |= 1 << qubit
        if axis == "X":
            basis_change.append(Gate("ry", qubit, angle=-np.pi / 2))
        elif axis == "Y":
            basis_change.append(Gate("rx", qubit, angle=np.pi / 2))
    if basis_change:
        state = apply_circuit(state.copy(), basis_change)
    masks = np.array([mask], dtype=np.uint64)
    return float(_KERNELS.zprod_expectations(state.amplitudes, state.n_qubits,
                                             masks)[0])


__all__ = [
    "MAX_QUBITS",
    "Statevector",
    "Gate",
    "PauliProduct",
    "init_zero",
    "apply_gate",
    "apply_circuit",
    "expectation",
    "compile_gates",
    "zprod_mask",
    "backend_name",
    "get_kernels",
]
