import numpy as np
import pytest

from qkmm import Circuit, Gate, build_m2m, circuit_from_text, circuit_to_text
from qkmm.circuit import h, mc_unitary_block, mcry, unitary_block, x
from qkmm.errors import ConfigurationError, QubitIndexError, ValidationError
from qkmm.statevector import circuit_unitary


def test_controls_and_targets_must_be_disjoint():
    with pytest.raises(QubitIndexError):
        mcry(0.3, (0, 1), 1)


def test_polarity_length_checked():
    with pytest.raises(ValidationError):
        Gate("MCRY", (2,), (0, 1), (1,), 0.3)


def test_block_must_be_unitary():
    with pytest.raises(ValidationError):
        unitary_block(np.array([[1, 1], [0, 1]]), [0])


def test_gate_outside_width():
    with pytest.raises(QubitIndexError):
        Circuit(2, [h(2)])


def test_overlapping_registers():
    with pytest.raises(ConfigurationError):
        Circuit(3, [], {"a": (0, 2), "b": (1, 2)})


def test_register_range():
    c = Circuit(4, [], {"index": (0, 1), "data": (1, 3)})
    assert list(c.register("data")) == [1, 2, 3]


def test_inverse_undoes_circuit(rng):
    c = Circuit(3, [h(0), mcry(0.4, (0,), 1), mcry(-1.1, (0, 1), 2, (0, 1)), x(2)])
    U = circuit_unitary(c.compose(c.inverse()))
    assert np.allclose(U, np.eye(8), atol=1e-12)


class TestTextFormat:
    def test_round_trip_every_kind(self):
        Q = np.linalg.qr(np.random.default_rng(4).standard_normal((4, 4)))[0]
        c = Circuit(5, [
            h(0), x(1), Gate("RY", (2,), angle=0.125),
            Gate("CNOT", (1,), (0,), (0,)), Gate("CRY", (3,), (2,), angle=-2.5),
            Gate("TOFFOLI", (4,), (0, 1)), mcry(0.7, (0, 1, 2), 3, (1, 0, 1)),
            unitary_block(Q, [3, 4], label="Q"),
            mc_unitary_block(Q, [0], [1, 2], (0,), label="Q"),
        ], {"index": (0, 2), "data": (2, 3)})
        text = circuit_to_text(c)
        back = circuit_from_text(text)
        assert back.num_qubits == 5
        assert back.registers == c.registers
        assert list(back.gates) == list(c.gates)
        assert circuit_to_text(back) == text

    def test_line_per_gate(self):
        text = circuit_to_text(Circuit(2, [h(0), mcry(0.5, (0,), 1, (0,))]))
        lines = text.splitlines()
        assert lines[0].startswith("# qkmm-circuit")
        assert lines[-1] == "MCRY 0.5 c=~0 t=1"

    def test_angles_survive_exactly(self, rng):
        angles = rng.uniform(-np.pi, np.pi, 20)
        c = Circuit(1, [Gate("RY", (0,), angle=float(a)) for a in angles])
        back = circuit_from_text(c.to_text())
        assert [g.angle for g in back.gates] == [float(a) for a in angles]

    def test_builder_output_round_trips(self, rng):
        A = rng.standard_normal((4, 4))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        c = build_m2m(A, A.T).circuit
        assert list(circuit_from_text(c.to_text()).gates) == list(c.gates)

    def test_garbage(self):
        with pytest.raises(ValidationError):
            circuit_from_text("qubits 2\nRY notanumber c= t=0\n")
        with pytest.raises(ValidationError):
            circuit_from_text("H - c= t=0\n")
