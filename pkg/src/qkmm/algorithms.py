"""Circuit builders for the kernel-based products and the two baselines.

All registers are laid out most-significant first, so for M2M an outcome
index decomposes as ``j * N**2 + i * N + d`` with ``j`` the column index of
B, ``i`` the row index of A and ``d`` the data register value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .circuit import Circuit, Gate, h, mc_unitary_block, unitary_block, x
from .encoding import _bits, as_unit_vector, compute_angles, encoder_gates, num_qubits_for
from .errors import ValidationError

#: inputs further than this from unit norm are rejected, not renormalised
INPUT_NORM_TOL = 1e-6
UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class QkmmCircuitBundle:
    """A built circuit plus what is needed to read products back out of it."""

    task: str
    circuit: Circuit
    register_map: dict[str, tuple[int, int]]
    normalization_factor: float
    readout_rule: str
    dimension: int
    num_blocks: int = 1
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return num_qubits_for(self.dimension)

    @property
    def width(self) -> int:
        """Qubits used by the algorithm (excludes any decomposition ancilla)."""
        return self.circuit.num_qubits


# input validation ---------------------------------------------------------

def unit_vector(v, tol: float = INPUT_NORM_TOL) -> np.ndarray:
    """Validate at ``tol`` and return the vector rescaled to exact unit norm."""
    v = as_unit_vector(v, tol=tol)
    return v / np.linalg.norm(v)


def normalized_matrix(M, axis: str = "rows", tol: float = INPUT_NORM_TOL) -> np.ndarray:
    """Square matrix whose rows (or columns) are unit vectors, padded to 2^n."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    vecs = M if axis == "rows" else M.T
    norms = np.linalg.norm(vecs, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
    if bad.size:
        raise ValidationError(
            f"{axis[:-1]} {int(bad[0])} has norm {norms[bad[0]]!r}; "
            f"{axis} must be unit vectors within {tol}")
    vecs = vecs / norms[:, None]
    N = pad_dimension(M.shape[0])
    if N != M.shape[0]:
        padded = np.zeros((N, N))
        padded[: M.shape[0], : M.shape[0]] = vecs
        # padding rows/columns become basis vectors so they stay encodable
        for r in range(M.shape[0], N):
            padded[r, r] = 1.0
        vecs = padded
    return vecs if axis == "rows" else vecs.T


def pad_dimension(size: int) -> int:
    return 2 ** num_qubits_for(size)


def auto_normalize(M, axis: str = "rows") -> tuple[np.ndarray, np.ndarray]:
    """Rescale rows/columns to unit norm; returns (matrix, scale factors).

    Multiplying entry (i, j) of the quantum estimate by ``scale[i]`` (rows of
    A) or ``scale[j]`` (columns of B) undoes the scaling.
    """
    M = np.asarray(M, dtype=float)
    vecs = M if axis == "rows" else M.T
    scales = np.linalg.norm(vecs, axis=1)
    if np.any(scales == 0):
        raise ValidationError(f"cannot normalise a zero {axis[:-1]}")
    out = vecs / scales[:, None]
    return (out if axis == "rows" else out.T), scales


# builders -----------------------------------------------------------------

def _hadamards(qubits) -> list[Gate]:
    return [h(q) for q in qubits]


def build_v2v(a, b, explicit_x: bool = True) -> QkmmCircuitBundle:
    """encoder(a) then inverse encoder(b); P(0...0) = (a.b)^2."""
    a, b = unit_vector(a), unit_vector(b)
    if a.size != b.size:
        raise ValidationError(f"dimension mismatch: {a.size} vs {b.size}")
    n = num_qubits_for(a.size)
    data = range(n)
    gates = (encoder_gates(compute_angles(a), data, explicit_x=explicit_x)
             + encoder_gates(compute_angles(b), data, inverse=True, explicit_x=explicit_x))
    regs = {"data": (0, n)}
    circuit = Circuit(n, gates, regs)
    return QkmmCircuitBundle("v2v", circuit, regs, 1.0,
                             "P(data=0) = (a.b)^2", a.size)


def build_v2m(A, x_vec, explicit_x: bool = True) -> QkmmCircuitBundle:
    """Row encoders of A selected by an index register, then inverse encoder of x."""
    A = normalized_matrix(A, "rows")
    x_vec = unit_vector(x_vec)
    N = A.shape[0]
    if x_vec.size != N:
        raise ValidationError(f"dimension mismatch: A is {N}x{N}, x has {x_vec.size}")
    n = num_qubits_for(N)
    index, data = range(0, n), range(n, 2 * n)
    gates = _hadamards(index)
    for i in range(N):
        gates += encoder_gates(compute_angles(A[i]), data, index, _bits(i, n),
                               explicit_x=explicit_x)
    gates += encoder_gates(compute_angles(x_vec), data, inverse=True, explicit_x=explicit_x)
    regs = {"index_i": (0, n), "data": (n, n)}
    return QkmmCircuitBundle("v2m", Circuit(2 * n, gates, regs), regs, 1.0 / N,
                             "P(i, data=0) = (A_i . x)^2 / N", N)


def _m2m_chunks(A: np.ndarray, B: np.ndarray, explicit_x: bool) -> Iterator[list[Gate]]:
    N = A.shape[0]
    n = num_qubits_for(N)
    index_j, index_i, data = range(0, n), range(n, 2 * n), range(2 * n, 3 * n)
    yield _hadamards(range(2 * n))
    for i in range(N):
        yield encoder_gates(compute_angles(A[i]), data, index_i, _bits(i, n),
                            explicit_x=explicit_x)
    for j in range(N):
        yield encoder_gates(compute_angles(B[:, j]), data, index_j, _bits(j, n),
                            inverse=True, explicit_x=explicit_x)


def m2m_gate_stream(A, B, explicit_x: bool = True) -> Iterator[Gate]:
    """The gates of :func:`build_m2m` one encoder at a time.

    For counting at sizes where holding the whole gate list is wasteful
    (about two million gates at N = 1024).
    """
    A = normalized_matrix(A, "rows")
    B = normalized_matrix(B, "columns")
    if A.shape != B.shape:
        raise ValidationError(f"shape mismatch: {A.shape} vs {B.shape}")
    for chunk in _m2m_chunks(A, B, explicit_x):
        yield from chunk


def build_m2m(A, B, explicit_x: bool = True) -> QkmmCircuitBundle:
    """Both index registers in superposition; P(j, i, 0) = (A.B)_ij^2 / N^2."""
    A = normalized_matrix(A, "rows")
    B = normalized_matrix(B, "columns")
    if A.shape != B.shape:
        raise ValidationError(f"shape mismatch: {A.shape} vs {B.shape}")
    N = A.shape[0]
    n = num_qubits_for(N)
    gates = [g for chunk in _m2m_chunks(A, B, explicit_x) for g in chunk]
    regs = {"index_j": (0, n), "index_i": (n, n), "data": (2 * n, n)}
    return QkmmCircuitBundle("m2m", Circuit(3 * n, gates, regs), regs, 1.0 / N ** 2,
                             "P(j, i, data=0) = (A.B)_ij^2 / N^2", N)


def _check_unitary(B: np.ndarray, k: int) -> np.ndarray:
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError(f"B_{k} must be square")
    if not np.allclose(B.conj().T @ B, np.eye(B.shape[0]), atol=UNITARY_TOL):
        raise ValidationError(f"B_{k} is not unitary within {UNITARY_TOL}")
    return B


def build_mmm(A, B_list: Sequence, as_product: bool = False, labels: Sequence[str] | None = None,
              explicit_x: bool = True) -> QkmmCircuitBundle:
    """One row-normalised A against K unitaries B_k in a single circuit.

    The data register after the block reads ``B_k |A_j>``, so outcome
    ``(k, j, i)`` has probability ``|row_i(B_k) . A_j|^2 / (N K)``.  With
    ``as_product`` each block is transposed first so the outcome gives
    ``|(A B_k)_ji|`` instead.  K is padded to a power of two with identity
    blocks.
    """
    A = normalized_matrix(A, "rows")
    N = A.shape[0]
    if not len(B_list):
        raise ValidationError("need at least one B matrix")
    blocks = [_check_unitary(B, k) for k, B in enumerate(B_list)]
    for k, B in enumerate(blocks):
        if B.shape != (N, N):
            raise ValidationError(f"B_{k} has shape {B.shape}, expected {(N, N)}")
    names = list(labels) if labels is not None else [f"B{k}" for k in range(len(blocks))]
    K_real = len(blocks)
    K = 1 if K_real == 1 else 2 ** num_qubits_for(K_real)
    for _ in range(K - K_real):
        blocks.append(np.eye(N))
        names.append("identity")
    n = num_qubits_for(N)
    m = 0 if K == 1 else num_qubits_for(K)
    index_k, index_j, data = range(0, m), range(m, m + n), range(m + n, m + 2 * n)
    gates = _hadamards(range(m + n))
    for j in range(N):
        gates += encoder_gates(compute_angles(A[j]), data, index_j, _bits(j, n),
                               explicit_x=explicit_x)
    for k, (B, name) in enumerate(zip(blocks, names)):
        mat = B.T if as_product else B
        if m == 0:
            gates.append(unitary_block(mat, data, label=name))
            continue
        pol = _bits(k, m)
        if explicit_x:
            flips = [x(q) for q, bit in zip(index_k, pol) if not bit]
            gates += flips + [mc_unitary_block(mat, index_k, data, label=name)] + flips
        else:
            gates.append(mc_unitary_block(mat, index_k, data, pol, label=name))
    regs = {"index_k": (0, m), "index_j": (m, n), "data": (m + n, n)}
    if m == 0:
        del regs["index_k"]
    rule = ("P(k, j, i) = |(A B_k)_ji|^2 / (N K)" if as_product
            else "P(k, j, i) = |row_i(B_k) . A_j|^2 / (N K)")
    return QkmmCircuitBundle("mmm", Circuit(m + 2 * n, gates, regs), regs, 1.0 / (N * K),
                             rule, N, K, {"blocks_used": K_real, "as_product": as_product})


def build_swap_test(a, b, explicit_x: bool = True) -> QkmmCircuitBundle:
    """Ancilla, H, controlled swaps, H; P(ancilla=0) = (1 + (a.b)^2) / 2."""
    a, b = unit_vector(a), unit_vector(b)
    if a.size != b.size:
        raise ValidationError(f"dimension mismatch: {a.size} vs {b.size}")
    n = num_qubits_for(a.size)
    reg_a, reg_b = range(1, n + 1), range(n + 1, 2 * n + 1)
    gates = [h(0)]
    gates += encoder_gates(compute_angles(a), reg_a, explicit_x=explicit_x)
    gates += encoder_gates(compute_angles(b), reg_b, explicit_x=explicit_x)
    for qa, qb in zip(reg_a, reg_b):
        gates += [Gate("CNOT", (qa,), (qb,)), Gate("TOFFOLI", (qb,), (0, qa)),
                  Gate("CNOT", (qa,), (qb,))]
    gates.append(h(0))
    regs = {"ancilla": (0, 1), "a": (1, n), "b": (n + 1, n)}
    return QkmmCircuitBundle("swap", Circuit(2 * n + 1, gates, regs), regs, 1.0,
                             "P(ancilla=0) = (1 + (a.b)^2) / 2", a.size)


def build_hadamard_test(a, b, explicit_x: bool = True) -> QkmmCircuitBundle:
    """Ancilla selects encoder(a) (on |0>) or encoder(b) (on |1>).

    P(ancilla=0) = (1 + a.b) / 2, so the sign of the product survives.
    """
    a, b = unit_vector(a), unit_vector(b)
    if a.size != b.size:
        raise ValidationError(f"dimension mismatch: {a.size} vs {b.size}")
    n = num_qubits_for(a.size)
    data = range(1, n + 1)
    gates = [h(0)]
    gates += encoder_gates(compute_angles(a), data, (0,), (0,), explicit_x=explicit_x)
    gates += encoder_gates(compute_angles(b), data, (0,), (1,), explicit_x=explicit_x)
    gates.append(h(0))
    regs = {"ancilla": (0, 1), "data": (1, n)}
    return QkmmCircuitBundle("hadamard", Circuit(n + 1, gates, regs), regs, 1.0,
                             "P(ancilla=0) = (1 + a.b) / 2", a.size)
