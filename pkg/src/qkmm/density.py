"""Dense density-matrix engine for noisy simulation.

A density matrix over n qubits is stored as a ``2^n x 2^n`` array and viewed
as a ``(2,) * 2n`` tensor: axes ``0..n-1`` index rows, ``n..2n-1`` columns.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate
from .errors import ConfigurationError, QubitIndexError, ValidationError
from .statevector import (StateVector, _check_qubits, apply_gate_tensor, apply_matrix,
                          clamp_probabilities, make_elementary)

#: hard width limit of the engine; 12 qubits is 16.7M complex entries
MAX_QUBITS = 12


@dataclass
class DensityMatrix:
    num_qubits: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.num_qubits > MAX_QUBITS:
            raise ConfigurationError(
                f"density matrices are capped at {MAX_QUBITS} qubits, got {self.num_qubits}")
        d = 2 ** self.num_qubits
        self.entries = np.asarray(self.entries, dtype=complex).reshape(d, d)

    @classmethod
    def zero(cls, num_qubits: int) -> "DensityMatrix":
        return cls.from_statevector(StateVector.zero(num_qubits))

    @classmethod
    def from_statevector(cls, state: StateVector) -> "DensityMatrix":
        if state.num_qubits > MAX_QUBITS:
            raise ConfigurationError(f"density matrices are capped at {MAX_QUBITS} qubits")
        psi = state.amplitudes
        return cls(state.num_qubits, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2 ** num_qubits
        return cls(num_qubits, np.eye(d, dtype=complex) / d)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.num_qubits, self.entries.copy())

    def tensor(self) -> np.ndarray:
        return self.entries.reshape((2,) * (2 * self.num_qubits))

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_valid(self, tol: float = 1e-9) -> bool:
        e = self.entries
        if not np.allclose(e, e.conj().T, atol=tol):
            return False
        if abs(np.trace(e) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(e).min() >= -tol)


def _check_targets(targets: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    ts = tuple(int(t) for t in targets)
    if len(set(ts)) != len(ts):
        raise QubitIndexError(f"duplicate qubit indices {ts}")
    for t in ts:
        if not 0 <= t < num_qubits:
            raise QubitIndexError(f"qubit {t} out of range for {num_qubits} qubits")
    return ts


def _compact(tensor: np.ndarray, axes) -> tuple[np.ndarray, dict[int, int]]:
    """Reshape a contiguous ``(2,) * m`` tensor so untouched axes merge.

    Returns the view and the new position of every axis in ``axes``.  Kernels
    on the merged view stride over a handful of long dimensions instead of
    2m short ones, which is several times faster at 10+ qubits.
    """
    if not tensor.flags.c_contiguous:
        raise ValueError("in-place kernels need a C-contiguous tensor")
    axes = set(axes)
    shape: list[int] = []
    pos: dict[int, int] = {}
    run = 1
    for ax in range(tensor.ndim):
        if ax in axes:
            if run > 1:
                shape.append(run)
                run = 1
            pos[ax] = len(shape)
            shape.append(2)
        else:
            run *= 2
    if run > 1:
        shape.append(run)
    return tensor.reshape(shape), pos


def _remap(gate: Gate, pos: dict[int, int], offset: int) -> Gate:
    return replace(gate, targets=tuple(pos[q + offset] for q in gate.targets),
                   controls=tuple(pos[q + offset] for q in gate.controls))


def apply_gate_inplace(tensor: np.ndarray, gate: Gate, num_qubits: int) -> None:
    """rho -> G rho G^dagger on the ``(2,) * 2n`` tensor, in place."""
    qs = gate.qubits
    view, pos = _compact(tensor, qs + tuple(q + num_qubits for q in qs))
    apply_gate_tensor(view, _remap(gate, pos, 0))
    apply_gate_tensor(view, _remap(gate, pos, num_qubits), conjugate=True)


def dm_apply_gate(dm: DensityMatrix, gate, targets=None, angle: float | None = None
                  ) -> DensityMatrix:
    """Conjugate ``dm`` by a gate.

    ``gate`` is either a :class:`Gate` or an elementary kind name, in which
    case ``targets`` lists the qubits controls first (as in
    :func:`qkmm.statevector.apply_elementary_gate`).
    """
    if not isinstance(gate, Gate):
        gate = make_elementary(gate, targets, angle)
    _check_qubits(gate, dm.num_qubits)
    out = dm.copy()
    apply_gate_inplace(out.tensor(), gate, dm.num_qubits)
    return out


def dm_apply_unitary(dm: DensityMatrix, matrix: np.ndarray, targets) -> DensityMatrix:
    ts = _check_targets(targets, dm.num_qubits)
    out = dm.copy()
    t = out.tensor()
    m = np.asarray(matrix, dtype=complex)
    apply_matrix(t, m, ts)
    apply_matrix(t, m.conj(), tuple(q + dm.num_qubits for q in ts))
    return out


def check_kraus(kraus_ops: Sequence[np.ndarray], tol: float = 1e-8) -> list[np.ndarray]:
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    if not ops:
        raise ValidationError("empty Kraus set")
    d = ops[0].shape[0]
    if any(k.shape != (d, d) for k in ops) or d & (d - 1):
        raise ValidationError("Kraus operators must be square with power-of-two size")
    total = sum(k.conj().T @ k for k in ops)
    if not np.allclose(total, np.eye(d), atol=tol):
        raise ValidationError("Kraus set is not trace preserving within 1e-8")
    return ops


def kraus_inplace(tensor: np.ndarray, ops: Sequence[np.ndarray], targets: tuple[int, ...],
                  num_qubits: int) -> np.ndarray:
    """Return sum_k K rho K^dagger for a validated Kraus set (new array)."""
    acc = np.zeros_like(tensor)
    cols = tuple(q + num_qubits for q in targets)
    for k in ops:
        term = tensor.copy()
        apply_matrix(term, k, targets)
        apply_matrix(term, k.conj(), cols)
        acc += term
    return acc


def dm_apply_kraus(dm: DensityMatrix, kraus_ops: Sequence[np.ndarray], targets) -> DensityMatrix:
    ops = check_kraus(kraus_ops)
    ts = _check_targets(targets, dm.num_qubits)
    if ops[0].shape[0] != 2 ** len(ts):
        raise ValidationError("Kraus operator size does not match the number of targets")
    new = kraus_inplace(dm.tensor(), ops, ts, dm.num_qubits)
    return DensityMatrix(dm.num_qubits, new.reshape(dm.entries.shape))


def dm_probabilities(dm: DensityMatrix) -> np.ndarray:
    return clamp_probabilities(np.real(np.diagonal(dm.entries)))


def dm_apply_circuit(dm: DensityMatrix, circuit: Circuit) -> DensityMatrix:
    """Noiseless evolution of ``dm`` through ``circuit``."""
    if circuit.num_qubits != dm.num_qubits:
        raise ConfigurationError("circuit and density matrix widths differ")
    out = dm.copy()
    t = out.tensor()
    for g in circuit.gates:
        _check_qubits(g, dm.num_qubits)
        apply_gate_inplace(t, g, dm.num_qubits)
    return out


# structured channels ------------------------------------------------------
# Closed-form updates equal to the Kraus sums of the corresponding channels;
# the noise layer uses them to avoid materialising 4^k Pauli operators.

def _pair_view(tensor: np.ndarray, row_axis: int, col_axis: int):
    """Return rho restricted to row bit a / column bit b of one qubit, as views."""

    def block(a: int, b: int) -> np.ndarray:
        idx = [slice(None)] * tensor.ndim
        idx[row_axis] = a
        idx[col_axis] = b
        return tensor[tuple(idx) + (Ellipsis,)]

    return block


def relax_inplace(tensor: np.ndarray, q: int, num_qubits: int, gamma: float,
                  dephase: float) -> None:
    """Amplitude damping ``gamma`` followed by phase flip of strength ``dephase``.

    Off-diagonal blocks shrink by ``sqrt(1-gamma) * (1-dephase)``; population
    moves from |1> to |0> at rate ``gamma``.
    """
    view, pos = _compact(tensor, (q, q + num_qubits))
    block = _pair_view(view, pos[q], pos[q + num_qubits])
    if gamma:
        b00, b11 = block(0, 0), block(1, 1)
        b00 += gamma * b11
        b11 *= 1.0 - gamma
    scale = np.sqrt(1.0 - gamma) * (1.0 - dephase)
    if scale != 1.0:
        block(0, 1)[...] *= scale
        block(1, 0)[...] *= scale


def depolarize_inplace(tensor: np.ndarray, qubits: Sequence[int], num_qubits: int,
                       p: float) -> None:
    """rho -> (1-p) rho + p * Tr_q(rho) (x) I/d on ``qubits``."""
    if not p:
        return
    n = num_qubits
    k = len(qubits)
    d = 2 ** k
    view, pos = _compact(tensor, list(qubits) + [q + n for q in qubits])
    rows = [pos[q] for q in qubits]
    cols = [pos[q + n] for q in qubits]
    moved = np.moveaxis(view, rows + cols, range(2 * k))
    shape = moved.shape
    flat = moved.reshape((d, d) + shape[2 * k:])
    reduced = np.trace(flat, axis1=0, axis2=1) / d
    moved *= 1.0 - p
    for i in range(d):
        bits = tuple(int(b) for b in format(i, f"0{k}b"))
        moved[bits + bits] += p * reduced
