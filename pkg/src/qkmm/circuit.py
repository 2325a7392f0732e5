"""Gate and circuit representation plus the line-oriented text format.

Qubit 0 is the most significant bit of a basis-state index everywhere in
the package.  Controls carry a polarity: 1 fires on |1>, 0 fires on |0>.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, QubitIndexError, ValidationError

H = "H"
X = "X"
RY = "RY"
CNOT = "CNOT"
CRY = "CRY"
TOFFOLI = "TOFFOLI"
MCRY = "MCRY"
UNITARY_BLOCK = "UNITARY_BLOCK"
MC_UNITARY_BLOCK = "MC_UNITARY_BLOCK"

ELEMENTARY_KINDS = frozenset({H, X, RY, CNOT, CRY, TOFFOLI})
ROTATION_KINDS = frozenset({RY, CRY, MCRY})
BLOCK_KINDS = frozenset({UNITARY_BLOCK, MC_UNITARY_BLOCK})
ALL_KINDS = ELEMENTARY_KINDS | {MCRY} | BLOCK_KINDS

# number of controls each fixed-arity kind must carry
_FIXED_CONTROLS = {H: 0, X: 0, RY: 0, CNOT: 1, CRY: 1, TOFFOLI: 2}

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_H_MATRIX = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
_X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)


def ry_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True, eq=False)
class Gate:
    """One operation: a matrix on ``targets`` conditioned on ``controls``.

    ``polarity[i]`` is the control value that ``controls[i]`` must hold for
    the gate to fire.  ``matrix`` is only used by the two block kinds.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    polarity: tuple[int, ...] = ()
    angle: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)
    label: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if self.controls and not self.polarity:
            object.__setattr__(self, "polarity", (1,) * len(self.controls))
        if len(self.polarity) != len(self.controls):
            raise ValidationError("polarity list must match the controls")
        if set(self.controls) & set(self.targets):
            raise QubitIndexError("controls and targets must be disjoint")
        if self.kind in _FIXED_CONTROLS and len(self.controls) != _FIXED_CONTROLS[self.kind]:
            raise ValidationError(f"{self.kind} takes {_FIXED_CONTROLS[self.kind]} controls")
        if self.kind in ROTATION_KINDS and self.angle is None:
            raise ValidationError(f"{self.kind} needs an angle")
        if self.kind in BLOCK_KINDS:
            if self.matrix is None:
                raise ValidationError("unitary blocks need a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            d = 2 ** len(self.targets)
            if m.shape != (d, d):
                raise ValidationError(f"block matrix must be {d}x{d}, got {m.shape}")
            if not np.allclose(m.conj().T @ m, np.eye(d), atol=1e-8):
                raise ValidationError("block matrix is not unitary within 1e-8")
            if self.kind == UNITARY_BLOCK and self.controls:
                raise ValidationError("UNITARY_BLOCK takes no controls; use MC_UNITARY_BLOCK")
            object.__setattr__(self, "matrix", m)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_elementary(self) -> bool:
        return self.kind in ELEMENTARY_KINDS

    def base_matrix(self) -> np.ndarray:
        """Matrix applied to the targets when the controls fire."""
        if self.kind == H:
            return _H_MATRIX
        if self.kind in (X, CNOT, TOFFOLI):
            return _X_MATRIX
        if self.kind in ROTATION_KINDS:
            return ry_matrix(self.angle)
        return self.matrix

    def inverse(self) -> "Gate":
        if self.kind in ROTATION_KINDS:
            return Gate(self.kind, self.targets, self.controls, self.polarity, -self.angle,
                        label=self.label)
        if self.kind in BLOCK_KINDS:
            return Gate(self.kind, self.targets, self.controls, self.polarity,
                        matrix=self.matrix.conj().T, label=_inverse_label(self.label))
        return self

    def shifted(self, offset: int) -> "Gate":
        """Same gate with every qubit index moved by ``offset``."""
        return Gate(self.kind, tuple(t + offset for t in self.targets),
                    tuple(c + offset for c in self.controls), self.polarity,
                    self.angle, self.matrix, self.label)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gate):
            return NotImplemented
        same = (self.kind, self.targets, self.controls, self.polarity, self.label) == (
            other.kind, other.targets, other.controls, other.polarity, other.label)
        if not same:
            return False
        if (self.angle is None) != (other.angle is None):
            return False
        if self.angle is not None and self.angle != other.angle:
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is other.matrix
        return bool(np.array_equal(self.matrix, other.matrix))

    __hash__ = None


def _inverse_label(label: str | None) -> str | None:
    if label is None:
        return None
    return label[:-4] if label.endswith("^dag") else label + "^dag"


# constructors -------------------------------------------------------------

def h(q: int) -> Gate:
    return Gate(H, (q,))


def x(q: int) -> Gate:
    return Gate(X, (q,))


def ry(angle: float, q: int) -> Gate:
    return Gate(RY, (q,), angle=float(angle))


def cnot(control: int, target: int, polarity: int = 1) -> Gate:
    return Gate(CNOT, (target,), (control,), (polarity,))


def cry(angle: float, control: int, target: int, polarity: int = 1) -> Gate:
    return Gate(CRY, (target,), (control,), (polarity,), float(angle))


def toffoli(c1: int, c2: int, target: int, polarity: tuple[int, int] = (1, 1)) -> Gate:
    return Gate(TOFFOLI, (target,), (c1, c2), tuple(polarity))


def mcry(angle: float, controls: Sequence[int], target: int,
         polarity: Sequence[int] | None = None) -> Gate:
    controls = tuple(controls)
    pol = tuple(polarity) if polarity is not None else (1,) * len(controls)
    return Gate(MCRY, (target,), controls, pol, float(angle))


def unitary_block(matrix, targets: Sequence[int], label: str | None = None) -> Gate:
    return Gate(UNITARY_BLOCK, tuple(targets), matrix=np.asarray(matrix), label=label)


def mc_unitary_block(matrix, controls: Sequence[int], targets: Sequence[int],
                     polarity: Sequence[int] | None = None, label: str | None = None) -> Gate:
    controls = tuple(controls)
    pol = tuple(polarity) if polarity is not None else (1,) * len(controls)
    return Gate(MC_UNITARY_BLOCK, tuple(targets), controls, pol,
                matrix=np.asarray(matrix), label=label)


@dataclass(frozen=True, eq=False)
class Circuit:
    """Immutable ordered gate list over named contiguous registers.

    ``registers`` maps a role name to ``(start, size)``.
    """

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    registers: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "registers", dict(self.registers))
        if self.num_qubits < 0:
            raise ConfigurationError("num_qubits must be non-negative")
        taken: set[int] = set()
        for name, (start, size) in self.registers.items():
            span = set(range(start, start + size))
            if start < 0 or start + size > self.num_qubits:
                raise ConfigurationError(f"register {name!r} exceeds the circuit width")
            if span & taken:
                raise ConfigurationError(f"register {name!r} overlaps another register")
            taken |= span
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise QubitIndexError(f"{g.kind} touches qubit {q} outside 0..{self.num_qubits - 1}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def register(self, name: str) -> range:
        start, size = self.registers[name]
        return range(start, start + size)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, tuple(g.inverse() for g in reversed(self.gates)),
                       self.registers)

    def compose(self, other: "Circuit") -> "Circuit":
        """``self`` followed by ``other``; widths must agree."""
        if other.num_qubits != self.num_qubits:
            raise ConfigurationError("cannot compose circuits of different widths")
        return Circuit(self.num_qubits, self.gates + other.gates, self.registers)

    def widened(self, num_qubits: int, registers: Mapping[str, tuple[int, int]] | None = None
                ) -> "Circuit":
        if num_qubits < self.num_qubits:
            raise ConfigurationError("cannot narrow a circuit")
        regs = dict(self.registers)
        if registers:
            regs.update(registers)
        return Circuit(num_qubits, self.gates, regs)

    @property
    def is_elementary(self) -> bool:
        return all(g.is_elementary for g in self.gates)

    def to_text(self) -> str:
        return circuit_to_text(self)


# text format --------------------------------------------------------------
#
#   # qkmm-circuit v1
#   qubits 5
#   register data 0 2
#   MCRY 0.7 c=0,~1 t=3
#   MC_UNITARY_BLOCK - c=0 t=1,2 label=B0 matrix=[[re..],[im..]]
#
# ``~q`` marks a control that fires on |0>; ``-`` stands for "no angle".

TEXT_HEADER = "# qkmm-circuit v1"


def _format_gate(g: Gate) -> str:
    angle = repr(float(g.angle)) if g.angle is not None else "-"
    ctrl = ",".join(("" if p else "~") + str(c) for c, p in zip(g.controls, g.polarity))
    parts = [g.kind, angle, f"c={ctrl}", "t=" + ",".join(map(str, g.targets))]
    if g.label is not None:
        parts.append(f"label={g.label}")
    if g.matrix is not None:
        payload = [g.matrix.real.tolist(), g.matrix.imag.tolist()]
        parts.append("matrix=" + json.dumps(payload, separators=(",", ":")))
    return " ".join(parts)


def circuit_to_text(circuit: Circuit) -> str:
    lines = [TEXT_HEADER, f"qubits {circuit.num_qubits}"]
    for name, (start, size) in circuit.registers.items():
        lines.append(f"register {name} {start} {size}")
    lines.extend(_format_gate(g) for g in circuit.gates)
    return "\n".join(lines) + "\n"


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _parse_gate(line: str) -> Gate:
    kind, angle_tok, *fields = line.split(" ")
    opts = dict(f.split("=", 1) for f in fields)
    controls, polarity = [], []
    for tok in filter(None, opts.get("c", "").split(",")):
        polarity.append(0 if tok.startswith("~") else 1)
        controls.append(int(tok.lstrip("~")))
    matrix = None
    if "matrix" in opts:
        re_part, im_part = json.loads(opts["matrix"])
        matrix = np.asarray(re_part) + 1j * np.asarray(im_part)
    angle = None if angle_tok == "-" else float(angle_tok)
    return Gate(kind, tuple(_parse_int_list(opts.get("t", ""))), tuple(controls),
                tuple(polarity), angle, matrix, opts.get("label"))


def circuit_from_text(text: str) -> Circuit:
    num_qubits = None
    registers: dict[str, tuple[int, int]] = {}
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            head = line.split(" ", 1)[0]
            if head == "qubits":
                num_qubits = int(line.split()[1])
            elif head == "register":
                _, name, start, size = line.split()
                registers[name] = (int(start), int(size))
            else:
                gates.append(_parse_gate(line))
        except (ValueError, KeyError) as exc:
            raise ValidationError(f"line {lineno}: cannot parse {raw!r}: {exc}") from exc
    if num_qubits is None:
        raise ValidationError("missing 'qubits' line")
    return Circuit(num_qubits, tuple(gates), registers)


def gates_on(num_qubits: int, gates: Iterable[Gate], **registers: tuple[int, int]) -> Circuit:
    """Shorthand used by builders and tests."""
    return Circuit(num_qubits, tuple(gates), registers)
