"""Lowering of high-level gates to {H, X, RY, CNOT, CRY, TOFFOLI}.

A k-controlled RY (k >= 2) becomes

    MCX(controls -> ancilla) . CRY(ancilla -> target) . MCX(controls -> ancilla)

with one clean ancilla shared by the whole circuit.  Each MCX is broken into
Toffolis recursively, borrowing an idle qubit in an unknown state: with
controls split into halves C1, C2 and a borrowed qubit b,

    MCX(C1 -> b) MCX(C2+b -> t) MCX(C1 -> b) MCX(C2+b -> t)

flips t by AND(C1) AND(C2) and leaves b unchanged.  Everything on the
MCX path is a permutation, so the ancilla returns to |0> exactly.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .circuit import (CNOT, CRY, MC_UNITARY_BLOCK, MCRY, TOFFOLI, UNITARY_BLOCK, Circuit,
                      Gate, cnot, cry, ry, toffoli, x)
from .errors import DecompositionError

ANCILLA = "ancilla"


def mcx_gates(controls: Sequence[int], target: int, borrowable: Sequence[int] = ()
              ) -> list[Gate]:
    """Multi-controlled X (all controls on |1>) as X/CNOT/TOFFOLI gates.

    ``borrowable`` lists qubits outside ``controls`` and ``target`` whose
    state may be anything; three or more controls need at least one.
    """
    controls = list(controls)
    k = len(controls)
    if k == 0:
        return [x(target)]
    if k == 1:
        return [cnot(controls[0], target)]
    if k == 2:
        return [toffoli(controls[0], controls[1], target)]
    spare = [q for q in borrowable if q not in controls and q != target]
    if not spare:
        raise DecompositionError(f"a {k}-controlled X needs a borrowable qubit")
    b = spare[0]
    split = (k + 1) // 2
    c1, c2 = controls[:split], controls[split:]
    first = mcx_gates(c1, b, c2 + [target] + spare[1:])
    second = mcx_gates(c2 + [b], target, c1)
    return first + second + first + second


def toffoli_count(k: int) -> int:
    """Number of gates :func:`mcx_gates` emits for ``k`` controls."""
    if k <= 2:
        return 1
    split = (k + 1) // 2
    return 2 * toffoli_count(split) + 2 * toffoli_count(k - split + 1)


def _flip_zero_controls(controls: Sequence[int], polarity: Sequence[int]) -> list[Gate]:
    return [x(c) for c, p in zip(controls, polarity) if not p]


def mcry_gates(angle: float, controls: Sequence[int], target: int,
               polarity: Sequence[int] | None = None, ancilla: int | None = None
               ) -> list[Gate]:
    controls = tuple(controls)
    polarity = tuple(polarity) if polarity is not None else (1,) * len(controls)
    flips = _flip_zero_controls(controls, polarity)
    k = len(controls)
    if k == 0:
        core = [ry(angle, target)]
    elif k == 1:
        core = [cry(angle, controls[0], target)]
    else:
        if ancilla is None:
            raise DecompositionError(f"an MCRY with {k} controls needs an ancilla")
        compute = mcx_gates(controls, ancilla, [target])
        core = compute + [cry(angle, ancilla, target)] + compute
    return flips + core + flips


def decompose_mcry(k_controls: int, angle: float) -> list[Gate]:
    """Elementary gates for a k-controlled RY on the canonical layout.

    Controls are qubits ``0..k-1``, the target is ``k`` and (for k >= 2) the
    ancilla is ``k + 1``.
    """
    if k_controls < 0:
        raise ValueError("k_controls must be non-negative")
    controls = tuple(range(k_controls))
    ancilla = k_controls + 1 if k_controls >= 2 else None
    return mcry_gates(angle, controls, k_controls, ancilla=ancilla)


# unitary-block rules ------------------------------------------------------

BlockRule = Callable[[Gate, "int | None"], list[Gate]]
_BLOCK_RULES: dict[str, BlockRule] = {}


def register_block_rule(label: str, rule: BlockRule) -> None:
    """Register ``rule(gate, ancilla) -> elementary gates`` for blocks named ``label``."""
    _BLOCK_RULES[label] = rule


def block_rule(label: str | None) -> BlockRule | None:
    if label is None:
        return None
    return _BLOCK_RULES.get(label)


def _controlled_layer(gate: Gate, ancilla: int | None, per_target) -> list[Gate]:
    """Apply ``per_target(control_qubit_or_None, t)`` under the gate's controls."""
    flips = _flip_zero_controls(gate.controls, gate.polarity)
    k = len(gate.controls)
    if k == 0:
        body = [g for t in gate.targets for g in per_target(None, t)]
        return body
    if k == 1:
        body = [g for t in gate.targets for g in per_target(gate.controls[0], t)]
        return flips + body + flips
    if ancilla is None:
        raise DecompositionError("controlled block needs an ancilla")
    compute = mcx_gates(gate.controls, ancilla, gate.targets)
    body = [g for t in gate.targets for g in per_target(ancilla, t)]
    return flips + compute + body + compute + flips


def _x_all_rule(gate: Gate, ancilla: int | None) -> list[Gate]:
    return _controlled_layer(gate, ancilla,
                             lambda c, t: [x(t)] if c is None else [cnot(c, t)])


def _identity_rule(gate: Gate, ancilla: int | None) -> list[Gate]:
    return []


register_block_rule("x_all", _x_all_rule)
register_block_rule("identity", _identity_rule)


def needs_ancilla(gate: Gate) -> bool:
    if gate.kind == MCRY:
        return len(gate.controls) >= 2
    if gate.kind == MC_UNITARY_BLOCK:
        return len(gate.controls) >= 2 and block_rule(gate.label) is not None
    return False


def decompose_gate(gate: Gate, ancilla: int | None = None, strict: bool = False) -> list[Gate]:
    if gate.kind in (UNITARY_BLOCK, MC_UNITARY_BLOCK):
        rule = block_rule(gate.label)
        if rule is None:
            if strict:
                raise DecompositionError(f"no decomposition rule for block {gate.label!r}")
            return [gate]
        return rule(gate, ancilla)
    if gate.kind == MCRY:
        return mcry_gates(gate.angle, gate.controls, gate.targets[0], gate.polarity, ancilla)
    if gate.kind in (CNOT, CRY, TOFFOLI) and not all(gate.polarity):
        flips = _flip_zero_controls(gate.controls, gate.polarity)
        positive = Gate(gate.kind, gate.targets, gate.controls, (1,) * len(gate.controls),
                        gate.angle)
        return flips + [positive] + flips
    return [gate]


def decompose_circuit(circuit: Circuit, strict: bool = False) -> Circuit:
    """Lower every gate to the elementary set.

    If any gate needs a work qubit, one ancilla is appended after the last
    qubit and registered as ``"ancilla"``; it starts and ends in |0>.
    Opaque blocks without a rule pass through unless ``strict`` is set.
    """
    extra = any(needs_ancilla(g) for g in circuit.gates)
    n = circuit.num_qubits + (1 if extra else 0)
    ancilla = circuit.num_qubits if extra else None
    out: list[Gate] = []
    for g in circuit.gates:
        out.extend(decompose_gate(g, ancilla, strict))
    regs = dict(circuit.registers)
    if extra:
        regs[ANCILLA] = (ancilla, 1)
    return Circuit(n, tuple(out), regs)


def reference_controlled_matrix(base: np.ndarray, num_controls: int) -> np.ndarray:
    """Dense matrix of ``base`` controlled on ``num_controls`` leading qubits (all |1>)."""
    d = base.shape[0]
    dim = d * 2 ** num_controls
    out = np.eye(dim, dtype=complex)
    out[dim - d:, dim - d:] = base
    return out

