"""Dense statevector engine.

Amplitudes live in a complex array viewed as an ``(2,) * n`` tensor, axis 0
being qubit 0 (the most significant bit).  The kernels here also accept
tensors with extra trailing axes, which the density-matrix engine and the
dense-unitary helper rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import (CNOT, MCRY, RY, CRY, TOFFOLI, X, Circuit, Gate, ELEMENTARY_KINDS,
                      H, ry_matrix)
from .errors import ConfigurationError, NumericError, QubitIndexError, ValidationError

NORM_TOL = 1e-9
NEGATIVE_CLAMP = 1e-9

_PERMUTATION_KINDS = frozenset({X, CNOT, TOFFOLI})


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != 2 ** self.num_qubits:
            raise ValidationError(
                f"{self.num_qubits} qubits need {2 ** self.num_qubits} amplitudes, "
                f"got {self.amplitudes.size}")

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


@dataclass
class ShotHistogram:
    counts: dict[int, int]
    total_shots: int
    num_qubits: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.total_shots:
            raise ValidationError("counts do not add up to total_shots")
        if any(k < 0 or k >= 2 ** self.num_qubits for k in self.counts):
            raise ValidationError("histogram key outside the outcome space")

    def frequencies(self) -> np.ndarray:
        freq = np.zeros(2 ** self.num_qubits)
        for k, v in self.counts.items():
            freq[k] = v
        return freq / self.total_shots


# kernels ------------------------------------------------------------------

def _check_qubits(gate: Gate, num_qubits: int) -> None:
    qs = gate.qubits
    if len(set(qs)) != len(qs):
        raise QubitIndexError(f"{gate.kind} has repeated qubits {qs}")
    for q in qs:
        if not 0 <= q < num_qubits:
            raise QubitIndexError(f"qubit {q} out of range for {num_qubits} qubits")


def _control_view(tensor: np.ndarray, controls, polarity, targets):
    """View of ``tensor`` where the controls hold their firing values."""
    if not controls:
        return tensor, list(targets)
    idx = [slice(None)] * tensor.ndim
    for c, p in zip(controls, polarity):
        idx[c] = p
    shifted = [t - sum(1 for c in controls if c < t) for t in targets]
    return tensor[tuple(idx)], shifted


def apply_matrix(tensor: np.ndarray, matrix: np.ndarray, targets, controls=(), polarity=()
                 ) -> None:
    """In place: apply ``matrix`` to the target axes of ``tensor``."""
    sub, tpos = _control_view(tensor, controls, polarity, targets)
    k = len(tpos)
    if k == 1:
        t = tpos[0]
        lead = (slice(None),) * t
        s0, s1 = sub[lead + (0, ...)], sub[lead + (1, ...)]
        m = matrix
        new0 = m[0, 0] * s0 + m[0, 1] * s1
        new1 = m[1, 0] * s0 + m[1, 1] * s1
        s0[...] = new0
        s1[...] = new1
        return
    moved = np.moveaxis(sub, tpos, range(k))
    res = np.tensordot(np.asarray(matrix).reshape((2,) * (2 * k)), moved,
                       axes=(range(k, 2 * k), range(k)))
    moved[...] = res


def _apply_flip(tensor: np.ndarray, target: int, controls=(), polarity=()) -> None:
    sub, (t,) = _control_view(tensor, controls, polarity, (target,))
    lead = (slice(None),) * t
    s0, s1 = sub[lead + (0, ...)], sub[lead + (1, ...)]
    tmp = s0.copy()
    s0[...] = s1
    s1[...] = tmp


def apply_gate_tensor(tensor: np.ndarray, gate: Gate, conjugate: bool = False,
                      offset: int = 0) -> None:
    """Apply one gate in place to ``tensor``.

    ``offset`` shifts every qubit index (column axes of a density matrix);
    ``conjugate`` applies the complex-conjugated matrix.
    """
    controls = tuple(c + offset for c in gate.controls)
    targets = tuple(t + offset for t in gate.targets)
    if gate.kind in _PERMUTATION_KINDS:
        _apply_flip(tensor, targets[0], controls, gate.polarity)
        return
    m = gate.base_matrix()
    if conjugate:
        m = m.conj()
    if not np.iscomplexobj(tensor):
        if np.any(m.imag):
            raise ValidationError(f"complex {gate.kind} cannot act on a real tensor")
        m = m.real
    apply_matrix(tensor, m, targets, controls, gate.polarity)


def _apply_uniform_ry(tensor: np.ndarray, run: list[Gate], offset: int = 0) -> None:
    """Apply a run of RY-type gates sharing target and control set in one pass.

    Gates in such a run act on disjoint (or identical) control patterns of the
    same control qubits, so they commute and their angles add per pattern.
    """
    first = run[0]
    controls = tuple(c + offset for c in first.controls)
    target = first.targets[0] + offset
    k = len(controls)
    angles = np.zeros((2,) * k)
    for g in run:
        angles[g.polarity] += g.angle
    view = np.moveaxis(tensor, controls + (target,), range(k + 1))
    extra = (1,) * (view.ndim - k - 1)
    c = np.cos(angles / 2).reshape(angles.shape + extra)
    s = np.sin(angles / 2).reshape(angles.shape + extra)
    lead = (slice(None),) * k
    a0, a1 = view[lead + (0, ...)], view[lead + (1, ...)]
    new0 = c * a0 - s * a1
    new1 = s * a0 + c * a1
    a0[...] = new0
    a1[...] = new1


def _same_rotation_slot(a: Gate, b: Gate) -> bool:
    return (b.kind in (RY, CRY, MCRY) and a.kind in (RY, CRY, MCRY)
            and a.targets == b.targets and a.controls == b.controls)


def run_gates(tensor: np.ndarray, gates, num_qubits: int) -> None:
    """Apply ``gates`` in order to ``tensor`` in place, fusing rotation runs."""
    gates = list(gates)
    i, n = 0, len(gates)
    while i < n:
        g = gates[i]
        _check_qubits(g, num_qubits)
        if g.kind in (RY, CRY, MCRY):
            j = i + 1
            while j < n and _same_rotation_slot(g, gates[j]):
                j += 1
            if j - i > 1:
                _apply_uniform_ry(tensor, gates[i:j])
                i = j
                continue
        apply_gate_tensor(tensor, g)
        i += 1


# public operations -------------------------------------------------------

_ELEMENTARY_ARITY = {H: 1, X: 1, RY: 1, CNOT: 2, CRY: 2, TOFFOLI: 3}


def make_elementary(kind: str, targets, angle: float | None = None) -> Gate:
    """Build an elementary gate from a flat qubit list (controls first)."""
    kind = kind.upper()
    if kind not in ELEMENTARY_KINDS:
        raise ValidationError(f"{kind!r} is not an elementary gate")
    qs = tuple(int(q) for q in targets)
    if len(qs) != _ELEMENTARY_ARITY[kind]:
        raise ValidationError(f"{kind} acts on {_ELEMENTARY_ARITY[kind]} qubits, got {len(qs)}")
    if len(set(qs)) != len(qs):
        raise QubitIndexError(f"duplicate qubit indices {qs}")
    return Gate(kind, qs[-1:], qs[:-1], angle=None if angle is None else float(angle))


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    out = state.copy()
    _check_qubits(gate, state.num_qubits)
    apply_gate_tensor(out.tensor(), gate)
    return out


def apply_elementary_gate(state: StateVector, gate: str, targets, angle: float | None = None
                          ) -> StateVector:
    """Apply H, X, RY, CNOT, CRY or TOFFOLI; ``targets`` lists controls first."""
    return apply_gate(state, make_elementary(gate, targets, angle))


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.num_qubits != state.num_qubits:
        raise ConfigurationError(
            f"circuit has {circuit.num_qubits} qubits, state has {state.num_qubits}")
    out = state.copy()
    run_gates(out.tensor(), circuit.gates, state.num_qubits)
    return out


def simulate(circuit: Circuit) -> StateVector:
    """Run ``circuit`` on |0...0>."""
    return apply_circuit(StateVector.zero(circuit.num_qubits), circuit)


def clamp_probabilities(p: np.ndarray, tol: float = NEGATIVE_CLAMP) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise NumericError("non-finite probabilities")
    if np.any(p < -tol):
        raise NumericError(f"probability {p.min():.3e} below the clamping tolerance")
    return np.clip(p, 0.0, 1.0)


def probabilities(state: StateVector) -> np.ndarray:
    return clamp_probabilities(np.abs(state.amplitudes) ** 2)


def sample_shots(probs, shots: int, seed: int | None = None) -> ShotHistogram:
    """Multinomial sample of ``shots`` outcomes, reproducible for a fixed seed."""
    p = np.asarray(probs, dtype=float)
    if not np.all(np.isfinite(p)):
        raise NumericError("non-finite probabilities")
    if shots <= 0:
        raise ValidationError("shots must be positive")
    if p.size == 0 or p.size & (p.size - 1):
        raise ValidationError("distribution length must be a power of two")
    total = p.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValidationError(f"probabilities sum to {total}, not 1 within 1e-6")
    p = clamp_probabilities(p) / total
    p = p / p.sum()
    draws = np.random.default_rng(seed).multinomial(shots, p)
    counts = {int(i): int(c) for i, c in enumerate(draws) if c}
    return ShotHistogram(counts, int(shots), int(p.size).bit_length() - 1)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of ``circuit`` (column i = image of basis state i)."""
    n = circuit.num_qubits
    if n > 12:
        raise ConfigurationError("dense unitaries are limited to 12 qubits")
    dim = 2 ** n
    mat = np.eye(dim, dtype=complex)
    run_gates(mat.reshape((2,) * n + (dim,)), circuit.gates, n)
    return mat
