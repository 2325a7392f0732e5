"""Amplitude-encoding circuits for real unit vectors.

The encoder is a binary tree of RY rotations.  Level ``d`` rotates data
qubit ``d`` conditioned on the pattern of qubits ``0..d-1``; the root level
is a single RY.  Internal levels split the weight of a subtree between its
halves with non-negative norms, the last level uses the signed leaf values
so that negative entries come out of the rotation quadrant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, mcry, x
from .errors import ValidationError

NORM_TOL = 1e-9


@dataclass(frozen=True)
class AngleTree:
    """Rotation angles per level; level ``d`` holds ``2**d`` entries."""

    levels: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        for d, lvl in enumerate(self.levels):
            if lvl.shape != (2 ** d,):
                raise ValidationError(f"level {d} must have {2 ** d} angles")
            if not np.all(np.isfinite(lvl)):
                raise ValidationError("angles must be finite")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def num_rotations(self) -> int:
        return sum(lvl.size for lvl in self.levels)


def num_qubits_for(length: int) -> int:
    if length < 1:
        raise ValidationError("empty vector")
    return max(1, (length - 1).bit_length())


def pad_to_power_of_two(values) -> np.ndarray:
    """Zero-pad a 1-D array to the next power of two (minimum length 2)."""
    v = np.asarray(values, dtype=float).reshape(-1)
    size = 2 ** num_qubits_for(v.size)
    if size == v.size:
        return v
    out = np.zeros(size)
    out[: v.size] = v
    return out


def as_unit_vector(values, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a real vector of unit norm, zero-padding its length."""
    v = np.asarray(values)
    if np.iscomplexobj(v):
        if np.any(np.abs(v.imag) > 0):
            raise ValidationError("complex-valued vectors are not supported")
        v = v.real
    v = pad_to_power_of_two(v)
    if not np.all(np.isfinite(v)):
        raise ValidationError("vector has non-finite entries")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValidationError("cannot encode the zero vector")
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"vector norm {norm!r} differs from 1 by more than {tol}")
    return v


def compute_angles(v) -> AngleTree:
    v = as_unit_vector(v)
    n = num_qubits_for(v.size)
    levels: list[np.ndarray] = [np.zeros(0)] * n
    # leaf level keeps signs; the parents see non-negative subtree norms
    pairs = v.reshape(-1, 2)
    levels[n - 1] = 2.0 * np.arctan2(pairs[:, 1], pairs[:, 0])
    norms = np.hypot(pairs[:, 0], pairs[:, 1])
    for d in range(n - 2, -1, -1):
        pairs = norms.reshape(-1, 2)
        levels[d] = 2.0 * np.arctan2(pairs[:, 1], pairs[:, 0])
        norms = np.hypot(pairs[:, 0], pairs[:, 1])
    return AngleTree(tuple(levels))


def _bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def encoder_gates(tree: AngleTree, data: Sequence[int], controls: Sequence[int] = (),
                  pattern: Sequence[int] = (), inverse: bool = False,
                  explicit_x: bool = True) -> list[Gate]:
    """Gate list of the encoder (or its inverse) on the ``data`` qubits.

    ``controls``/``pattern`` add extra controls that every rotation carries.
    With ``explicit_x`` every control that must read 0 is realised by an X
    before and after the rotation; otherwise the polarity stays on the gate.
    """
    data = tuple(data)
    controls = tuple(controls)
    pattern = tuple(pattern)
    if len(data) != tree.depth:
        raise ValidationError(f"encoder needs {tree.depth} data qubits, got {len(data)}")
    blocks: list[list[Gate]] = []
    for d, lvl in enumerate(tree.levels):
        ctrl = controls + data[:d]
        for p, angle in enumerate(lvl):
            pol = pattern + _bits(p, d)
            theta = -float(angle) if inverse else float(angle)
            if explicit_x:
                flips = [x(c) for c, b in zip(ctrl, pol) if not b]
                blocks.append(flips + [mcry(theta, ctrl, data[d])] + flips)
            else:
                blocks.append([mcry(theta, ctrl, data[d], pol)])
    if inverse:
        blocks.reverse()
    return [g for block in blocks for g in block]


def build_encoder(v, explicit_x: bool = True) -> Circuit:
    """Circuit U_v with U_v|0...0> = |v>."""
    tree = compute_angles(v)
    n = tree.depth
    return Circuit(n, encoder_gates(tree, range(n), explicit_x=explicit_x), {"data": (0, n)})


def build_encoder_inverse(v, explicit_x: bool = True) -> Circuit:
    tree = compute_angles(v)
    n = tree.depth
    gates = encoder_gates(tree, range(n), inverse=True, explicit_x=explicit_x)
    return Circuit(n, gates, {"data": (0, n)})


def build_controlled_encoder(v, index_width: int, pattern: int, explicit_x: bool = True,
                             inverse: bool = False) -> Circuit:
    """Encoder acting only when the index register holds ``pattern``.

    Layout: index register ``0..index_width-1`` followed by the data register.
    """
    if index_width < 0:
        raise ValidationError("index width must be non-negative")
    if not 0 <= pattern < 2 ** index_width:
        raise ValidationError(f"pattern {pattern} does not fit in {index_width} index qubits")
    tree = compute_angles(v)
    n = tree.depth
    data = range(index_width, index_width + n)
    gates = encoder_gates(tree, data, range(index_width), _bits(pattern, index_width),
                          inverse=inverse, explicit_x=explicit_x)
    return Circuit(index_width + n, gates, {"index": (0, index_width), "data": (index_width, n)})
