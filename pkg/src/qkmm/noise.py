"""Hardware-style noise compiled to channels and injected after every gate.

Times: ``t1``/``t2`` in microseconds, gate durations in nanoseconds.
Fidelity convention: a gate of average fidelity F on d = 2^k levels is
followed by depolarizing noise of strength p = (1 - F) d / (d - 1), which
has average state fidelity exactly F.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field, fields
from functools import reduce
from pathlib import Path
from typing import Iterable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .circuit import Circuit
from .density import (DensityMatrix, MAX_QUBITS, apply_gate_inplace, check_kraus,
                      depolarize_inplace, kraus_inplace, relax_inplace)
from .errors import ConfigurationError, ValidationError
from .statevector import _check_qubits

T1, T2, GATE = "T1", "T2", "GATE"
ALL_SOURCES = frozenset({T1, T2, GATE})
FIDELITY_CONVENTION = "average state fidelity: p = (1 - F) d / (d - 1)"

_PAULIS = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]),
           np.diag([1.0, -1.0])]


@dataclass(frozen=True)
class NoiseParams:
    t1: float = 50.0
    t2: float = 30.0
    single_qubit_fidelity: float = 0.998
    two_qubit_fidelity: float = 0.975
    single_qubit_duration: float = 30.0
    two_qubit_duration: float = 200.0
    enabled_sources: frozenset = ALL_SOURCES
    idle_decoherence: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "enabled_sources", frozenset(self.enabled_sources))
        unknown = self.enabled_sources - ALL_SOURCES
        if unknown:
            raise ValidationError(f"unknown noise sources {sorted(unknown)}")
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValidationError("t1 and t2 must be positive")
        if self.t2 > 2 * self.t1:
            raise ValidationError(f"unphysical t2={self.t2} > 2*t1={2 * self.t1}")
        if self.single_qubit_duration <= 0 or self.two_qubit_duration <= 0:
            raise ValidationError("gate durations must be positive")
        for f in (self.single_qubit_fidelity, self.two_qubit_fidelity):
            if not 0 < f <= 1:
                raise ValidationError(f"fidelity {f} outside (0, 1]")

    def with_sources(self, sources: Iterable[str]) -> "NoiseParams":
        return NoiseParams(**{**self._kwargs(), "enabled_sources": frozenset(sources)})

    def _kwargs(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["enabled_sources"] = sorted(self.enabled_sources)
        d["fidelity_convention"] = FIDELITY_CONVENTION
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseParams":
        data = dict(data.get("noise", data))
        data.pop("fidelity_convention", None)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown noise keys {sorted(extra)}")
        if "enabled_sources" in data:
            data["enabled_sources"] = frozenset(s.upper() for s in data["enabled_sources"])
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "NoiseParams":
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".toml":
            return cls.from_dict(tomllib.loads(text))
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class NoiseChannel:
    """A CPTP map on ``arity`` qubits.

    ``kind`` and ``params`` name a closed form the density engine can apply
    without the Kraus sum; ``kraus_ops`` is always available.
    """

    kraus_ops: tuple[np.ndarray, ...]
    arity: int
    kind: str = "kraus"
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        check_kraus(self.kraus_ops)
        if self.kraus_ops[0].shape[0] != 2 ** self.arity:
            raise ValidationError("Kraus size does not match arity")

    def superoperator(self) -> np.ndarray:
        """Matrix S with vec(E(rho)) = S vec(rho), row-major vec."""
        return sum(np.kron(k, k.conj()) for k in self.kraus_ops)

    def choi(self) -> np.ndarray:
        d = 2 ** self.arity
        out = np.zeros((d * d, d * d), dtype=complex)
        for k in self.kraus_ops:
            v = k.reshape(-1)  # vec of K in row-major = sum_ij K_ij |i>|j>
            out += np.outer(v, v.conj())
        return out


def amplitude_damping(duration: float, t1: float) -> NoiseChannel:
    """Energy relaxation over ``duration`` (same unit as ``t1``)."""
    if duration < 0 or t1 <= 0:
        raise ValidationError("duration must be non-negative and t1 positive")
    gamma = 1.0 - np.exp(-duration / t1)
    return damping_channel(gamma)


def damping_channel(gamma: float) -> NoiseChannel:
    if not 0 <= gamma <= 1:
        raise ValidationError("gamma must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return NoiseChannel((k0, k1), 1, "amplitude_damping", {"gamma": float(gamma)})


def dephasing_rate(t1: float, t2: float) -> float:
    """Pure dephasing rate 1/T_phi = 1/t2 - 1/(2 t1)."""
    if t1 <= 0 or t2 <= 0:
        raise ValidationError("t1 and t2 must be positive")
    if t2 > 2 * t1 * (1 + 1e-12):
        raise ValidationError(f"unphysical t2={t2} > 2*t1={2 * t1}")
    return max(0.0, 1.0 / t2 - 1.0 / (2.0 * t1))


def phase_damping(duration: float, t1: float, t2: float) -> NoiseChannel:
    """Pure dephasing with lambda = 1 - exp(-duration / T_phi).

    Kraus form sqrt(1 - lambda/2) I, sqrt(lambda/2) Z: coherences shrink by
    (1 - lambda), so together with amplitude damping they decay as exp(-t/t2).
    """
    if duration < 0:
        raise ValidationError("duration must be non-negative")
    rate = dephasing_rate(t1, t2)
    lam = 1.0 - np.exp(-duration * rate) if np.isfinite(duration) else 1.0
    return dephasing_channel(lam)


def dephasing_channel(lam: float) -> NoiseChannel:
    if not 0 <= lam <= 1:
        raise ValidationError("lambda must lie in [0, 1]")
    k0 = np.sqrt(1 - lam / 2) * np.eye(2, dtype=complex)
    k1 = np.sqrt(lam / 2) * _PAULIS[3].astype(complex)
    return NoiseChannel((k0, k1), 1, "phase_damping", {"lambda": float(lam)})


def depolarizing_probability(avg_fidelity: float, arity: int) -> float:
    if not 0 < avg_fidelity <= 1:
        raise ValidationError(f"fidelity {avg_fidelity} outside (0, 1]")
    d = 2 ** arity
    p = (1.0 - avg_fidelity) * d / (d - 1)
    if p > d * d / (d * d - 1) + 1e-12:
        raise ValidationError(f"fidelity {avg_fidelity} is below what a CPTP map can reach")
    return p


def depolarizing_from_fidelity(avg_fidelity: float, arity: int) -> NoiseChannel:
    p = depolarizing_probability(avg_fidelity, arity)
    d = 2 ** arity
    ops = []
    for combo in itertools.product(range(4), repeat=arity):
        pauli = reduce(np.kron, (_PAULIS[i] for i in combo)).astype(complex)
        weight = 1 - p + p / d ** 2 if not any(combo) else p / d ** 2
        ops.append(np.sqrt(weight) * pauli)
    return NoiseChannel(tuple(ops), arity, "depolarizing", {"p": float(p)})


def apply_channel_inplace(tensor: np.ndarray, channel: NoiseChannel, targets, num_qubits: int
                          ) -> np.ndarray:
    """Apply ``channel`` to the ``(2,)*2n`` tensor; returns the (possibly new) tensor."""
    targets = tuple(targets)
    if channel.kind == "depolarizing":
        depolarize_inplace(tensor, targets, num_qubits, channel.params["p"])
        return tensor
    if channel.kind == "amplitude_damping":
        relax_inplace(tensor, targets[0], num_qubits, channel.params["gamma"], 0.0)
        return tensor
    if channel.kind == "phase_damping":
        relax_inplace(tensor, targets[0], num_qubits, 0.0, channel.params["lambda"])
        return tensor
    return kraus_inplace(tensor, channel.kraus_ops, targets, num_qubits)


# circuit-level injection --------------------------------------------------

def gate_duration(num_gate_qubits: int, params: NoiseParams) -> float:
    return params.single_qubit_duration if num_gate_qubits == 1 else params.two_qubit_duration


def gate_fidelity(num_gate_qubits: int, params: NoiseParams) -> float:
    return params.single_qubit_fidelity if num_gate_qubits == 1 else params.two_qubit_fidelity


class _RelaxationCache:
    def __init__(self, params: NoiseParams) -> None:
        self.params = params
        self._memo: dict[float, tuple[float, float]] = {}

    def __call__(self, duration_ns: float) -> tuple[float, float]:
        if duration_ns not in self._memo:
            p = self.params
            t_us = duration_ns * 1e-3
            gamma = 1.0 - np.exp(-t_us / p.t1) if T1 in p.enabled_sources else 0.0
            lam = (1.0 - np.exp(-t_us * dephasing_rate(p.t1, p.t2))
                   if T2 in p.enabled_sources else 0.0)
            self._memo[duration_ns] = (gamma, lam)
        return self._memo[duration_ns]


def _layers(circuit: Circuit) -> list[list]:
    """Greedy as-soon-as-possible layering of the gate list."""
    layers: list[list] = []
    depth_of_qubit = [0] * circuit.num_qubits
    for g in circuit.gates:
        level = max(depth_of_qubit[q] for q in g.qubits)
        if level == len(layers):
            layers.append([])
        layers[level].append(g)
        for q in g.qubits:
            depth_of_qubit[q] = level + 1
    return layers


def apply_noise_model(circuit: Circuit, params: NoiseParams, dm: DensityMatrix | None = None
                      ) -> DensityMatrix:
    """Evolve ``dm`` (default |0..0>) through ``circuit`` with noise after each gate.

    For each gate: its unitary, then depolarizing noise on its qubits (GATE),
    then relaxation/dephasing for the gate's duration on the qubits it touches
    (T1/T2).  With ``params.idle_decoherence`` the relaxation is instead
    applied once per ASAP layer to every qubit, for the layer's longest gate.
    """
    if not circuit.is_elementary:
        raise ConfigurationError("noise injection needs an elementary circuit; decompose first")
    if circuit.num_qubits > MAX_QUBITS:
        raise ConfigurationError(f"density simulation is capped at {MAX_QUBITS} qubits")
    n = circuit.num_qubits
    if dm is None:
        dm = DensityMatrix.zero(n)
    if dm.num_qubits != n:
        raise ConfigurationError("circuit and density matrix widths differ")
    # every elementary gate and every channel here is real, so a real start
    # state stays real: run in float64 and halve the memory traffic
    real = not np.any(dm.entries.imag) and all(
        not np.any(g.base_matrix().imag) for g in _distinct_kinds(circuit))
    entries = dm.entries.real.copy() if real else dm.entries.copy()
    t = entries.reshape((2,) * (2 * n))
    relax = _RelaxationCache(params)
    use_gate = GATE in params.enabled_sources
    use_relax = bool({T1, T2} & params.enabled_sources)
    depol_p = {k: depolarizing_probability(gate_fidelity(k, params), k) for k in (1, 2, 3)}

    def gate_step(g) -> None:
        _check_qubits(g, n)
        apply_gate_inplace(t, g, n)
        if use_gate and depol_p[len(g.qubits)]:
            depolarize_inplace(t, g.qubits, n, depol_p[len(g.qubits)])

    if not params.idle_decoherence:
        for g in circuit.gates:
            gate_step(g)
            if use_relax:
                gamma, lam = relax(gate_duration(len(g.qubits), params))
                for q in g.qubits:
                    relax_inplace(t, q, n, gamma, lam)
    else:
        for layer in _layers(circuit):
            for g in layer:
                gate_step(g)
            if use_relax:
                longest = max(gate_duration(len(g.qubits), params) for g in layer)
                gamma, lam = relax(longest)
                for q in range(n):
                    relax_inplace(t, q, n, gamma, lam)
    return DensityMatrix(n, entries)


def _distinct_kinds(circuit: Circuit) -> list:
    """One representative per (kind, angle, matrix) so the realness scan is cheap."""
    seen: dict = {}
    for g in circuit.gates:
        key = (g.kind, g.angle) if g.matrix is None else id(g)
        seen.setdefault(key, g)
    return list(seen.values())
