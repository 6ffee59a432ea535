"""Pure-numpy statevector kernels (fallback backend).

Same contract as the compiled backend in ``_statevector_cy``: dense
complex128 statevectors, qubit ``k`` mapped to bit ``k`` of the basis index.
Batch entry points vectorize across circuits, which keeps this backend usable
(if slower) for training workloads.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

KIND_RX, KIND_RY, KIND_RZ, KIND_CZ = 0, 1, 2, 3

_PAIR_MASK_CACHE: dict[tuple[int, int, int], np.ndarray] = {}
_PARITY_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _cz_indices(n_qubits: int, target: int, control: int) -> np.ndarray:
    key = (n_qubits, min(target, control), max(target, control))
    got = _PAIR_MASK_CACHE.get(key)
    if got is None:
        idx = np.arange(1 << n_qubits)
        got = np.nonzero(((idx >> target) & 1) & ((idx >> control) & 1))[0]
        _PAIR_MASK_CACHE[key] = got
    return got


def _parity_signs(n_qubits: int, mask: int) -> np.ndarray:
    key = (n_qubits, mask)
    got = _PARITY_CACHE.get(key)
    if got is None:
        idx = np.arange(1 << n_qubits)
        bits = idx & mask
        parity = np.zeros(idx.shape, dtype=np.int64)
        while bits.any():
            parity ^= bits & 1
            bits >>= 1
        got = (1.0 - 2.0 * parity).astype(np.float64)
        _PARITY_CACHE[key] = got
    return got


def _apply_ops_batch(amps: np.ndarray, n_qubits: int, kinds, targets, controls,
                     angles: np.ndarray) -> None:
    """In-place gate sequence on a (batch, 2**n) array.

    ``angles`` is (batch, n_gates); rotation gate g on row b uses
    ``angles[b, g]``.
    """
    batch = amps.shape[0]
    for g in range(len(kinds)):
        kind = kinds[g]
        t = targets[g]
        if kind == KIND_CZ:
            amps[:, _cz_indices(n_qubits, t, controls[g])] *= -1.0
            continue
        half = 0.5 * angles[:, g]
        c = np.cos(half)[:, None, None]
        s = np.sin(half)[:, None, None]
        view = amps.reshape(batch, 1 << (n_qubits - t - 1), 2, 1 << t)
        a = view[:, :, 0, :].copy()
        b = view[:, :, 1, :]
        if kind == KIND_RX:
            view[:, :, 0, :] = c * a - 1j * s * b
            view[:, :, 1, :] = c * b - 1j * s * a
        elif kind == KIND_RY:
            view[:, :, 0, :] = c * a - s * b
            view[:, :, 1, :] = c * b + s * a
        elif kind == KIND_RZ:
            phase = (c - 1j * s)
            view[:, :, 0, :] = phase * a
            view[:, :, 1, :] = np.conj(phase) * b
        else:
            raise ValueError(f"unknown gate kind code {kind}")


def apply_ops(amps: np.ndarray, n_qubits: int, kinds, targets, controls,
              angles) -> None:
    """In-place gate sequence on a single (2**n,) statevector."""
    angles = np.asarray(angles, dtype=np.float64)
    _apply_ops_batch(amps[None, :], n_qubits, kinds, targets, controls,
                     angles[None, :])


def zprod_expectations(amps: np.ndarray, n_qubits: int, masks) -> np.ndarray:
    """Expectation of each Z-product observable (bitmask of measured qubits)."""
    probs = np.abs(amps) ** 2
    out = np.empty(len(masks), dtype=np.float64)
    for m, mask in enumerate(masks):
        out[m] = probs @ _parity_signs(n_qubits, int(mask))
    return out


def run_batch_expect(n_qubits: int, kinds, targets, controls,
                     angles_mat: np.ndarray, masks) -> np.ndarray:
    """Run one circuit per row of ``angles_mat`` from |0...0> and return the
    (batch, n_masks) matrix of Z-product expectations."""
    angles_mat = np.atleast_2d(np.asarray(angles_mat, dtype=np.float64))
    batch = angles_mat.shape[0]
    dim = 1 << n_qubits
    amps = np.zeros((batch, dim), dtype=np.complex128)
    amps[:, 0] = 1.0
    _apply_ops_batch(amps, n_qubits, kinds, targets, controls, angles_mat)
    probs = np.abs(amps) ** 2
    out = np.empty((batch, len(masks)), dtype=np.float64)
    for m, mask in enumerate(masks):
        out[:, m] = probs @ _parity_signs(n_qubits, int(mask))
    return out


def shift_jacobian_batch(n_qubits: int, kinds, targets, controls,
                         angles_mat: np.ndarray, rot_positions,
                         masks) -> np.ndarray:
    """Parameter-shift derivatives of every Z-product expectation with respect
    to the angle of every rotation gate listed in ``rot_positions``.

    Returns (n_states, n_rot, n_masks) with entries (E(+pi/2) - E(-pi/2)) / 2,
    evaluating each shifted circuit in full.
    """
    angles_mat = np.atleast_2d(np.asarray(angles_mat, dtype=np.float64))
    rot_positions = np.asarray(rot_positions, dtype=np.int64)
    n_states = angles_mat.shape[0]
    n_rot = rot_positions.shape[0]
    out = np.empty((n_states, n_rot, len(masks)), dtype=np.float64)
    half_pi = 0.5 * np.pi
    for s in range(n_states):
        shifted = np.repeat(angles_mat[s][None, :], 2 * n_rot, axis=0)
        rows = np.arange(2 * n_rot)
        cols = np.repeat(rot_positions, 2)
        shifted[rows, cols] += np.tile([half_pi, -half_pi], n_rot)
        expect = run_batch_expect(n_qubits, kinds, targets, controls, shifted,
                                  masks)
        expect = expect.reshape(n_rot, 2, len(masks))
        out[s] = 0.5 * (expect[:, 0, :] - expect[:, 1, :])
    return out
