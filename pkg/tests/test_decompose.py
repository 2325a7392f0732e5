import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkmm import Circuit, build_m2m, build_mmm, build_v2m, decompose_circuit, decompose_mcry
from qkmm.circuit import CRY, RY, TOFFOLI, h, mc_unitary_block, mcry, ry_matrix, unitary_block
from qkmm.decompose import mcx_gates, reference_controlled_matrix, toffoli_count
from qkmm.errors import DecompositionError
from qkmm.statevector import circuit_unitary

from conftest import unit_rows


def controlled_ry(theta, k):
    """Dense (k controls + target) matrix built entry by entry."""
    d = 2 ** (k + 1)
    U = np.eye(d)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    U[d - 2, d - 2], U[d - 2, d - 1] = c, -s
    U[d - 1, d - 2], U[d - 1, d - 1] = s, c
    return U


def restrict_to_clean_ancilla(U, n_logical):
    """Block of U on states whose last qubit (the ancilla) is |0>, checking it stays there."""
    idx = np.arange(2 ** n_logical) * 2
    leak = np.delete(U[:, idx], idx, axis=0)
    assert np.allclose(leak, 0, atol=1e-8), "ancilla did not return to |0>"
    return U[np.ix_(idx, idx)]


class TestDecomposeMcry:
    def test_no_controls(self):
        (g,) = decompose_mcry(0, 0.3)
        assert g.kind == RY and g.angle == 0.3

    def test_one_control(self):
        (g,) = decompose_mcry(1, 0.3)
        assert g.kind == CRY

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_toffoli_cry_toffoli(self, k):
        gates = decompose_mcry(k, 0.9)
        kinds = [g.kind for g in gates]
        assert kinds.count(CRY) == 1
        mid = kinds.index(CRY)
        assert gates[mid].controls == (k + 1,)  # CRY hangs off the ancilla
        assert kinds[:mid] == kinds[mid + 1:]
        assert set(kinds) <= {TOFFOLI, CRY}

    @pytest.mark.parametrize("k", range(0, 6))
    def test_dense_equivalence(self, k):
        theta = 0.7 + 0.1 * k
        gates = decompose_mcry(k, theta)
        width = k + 1 + (1 if k >= 2 else 0)
        U = circuit_unitary(Circuit(width, gates))
        if k >= 2:
            U = restrict_to_clean_ancilla(U, k + 1)
        assert np.allclose(U, controlled_ry(theta, k), atol=1e-8)

    def test_reference_helper_agrees(self):
        assert np.allclose(reference_controlled_matrix(ry_matrix(0.7), 3), controlled_ry(0.7, 3))


class TestMcx:
    @pytest.mark.parametrize("k,expected", [(2, 1), (3, 4), (4, 10), (5, 16)])
    def test_toffoli_counts(self, k, expected):
        gates = mcx_gates(list(range(k)), k, [k + 1])
        assert len(gates) == expected == toffoli_count(k)

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_borrowed_qubit_restored(self, k):
        # any state of the borrowed qubit is returned unchanged
        U = circuit_unitary(Circuit(k + 2, mcx_gates(list(range(k)), k, [k + 1])))
        for col in range(2 ** (k + 2)):
            bits = [(col >> (k + 1 - q)) & 1 for q in range(k + 2)]
            want = list(bits)
            if all(bits[:k]):
                want[k] ^= 1
            row = int("".join(map(str, want)), 2)
            assert U[row, col] == pytest.approx(1)

    def test_needs_borrowable_qubit(self):
        with pytest.raises(DecompositionError):
            mcx_gates([0, 1, 2], 3)


class TestDecomposeCircuit:
    def test_elementary_fixed_point(self):
        c = Circuit(2, [h(0), mcry(0.2, (0,), 1)])
        low = decompose_circuit(c)
        assert low.num_qubits == 2
        assert [g.kind for g in low.gates] == ["H", "CRY"]

    def test_two_control_pattern(self):
        low = decompose_circuit(Circuit(3, [mcry(0.4, (0, 1), 2)]))
        assert [g.kind for g in low.gates] == [TOFFOLI, CRY, TOFFOLI]
        assert low.registers["ancilla"] == (3, 1)

    def test_zero_polarity_becomes_x_pairs(self):
        low = decompose_circuit(Circuit(3, [mcry(0.4, (0, 1), 2, (0, 1))]))
        kinds = [g.kind for g in low.gates]
        assert kinds[0] == kinds[-1] == "X"
        assert all(g.polarity in ((), (1,), (1, 1)) for g in low.gates)

    def test_opaque_block_passes_through(self):
        Q = np.linalg.qr(np.random.default_rng(0).standard_normal((2, 2)))[0]
        low = decompose_circuit(Circuit(1, [unitary_block(Q, [0], label="opaque")]))
        assert low.gates[0].kind == "UNITARY_BLOCK"

    def test_strict_rejects_opaque_block(self):
        Q = np.linalg.qr(np.random.default_rng(0).standard_normal((2, 2)))[0]
        with pytest.raises(DecompositionError):
            decompose_circuit(Circuit(1, [unitary_block(Q, [0], label="opaque")]), strict=True)

    def test_registered_block_rule(self):
        xall = np.kron(np.array([[0, 1], [1, 0]]), np.array([[0, 1], [1, 0]]))
        c = Circuit(4, [h(0), h(1), mc_unitary_block(xall, (0, 1), (2, 3), (1, 0),
                                                    label="x_all")])
        low = decompose_circuit(c, strict=True)
        assert low.is_elementary
        U = restrict_to_clean_ancilla(circuit_unitary(low), 4)
        assert np.allclose(U, circuit_unitary(c), atol=1e-10)

    @pytest.mark.parametrize("explicit_x", [True, False])
    def test_full_m2m_n4(self, rng, explicit_x):
        A = unit_rows(rng, 4)
        c = build_m2m(A, unit_rows(rng, 4).T, explicit_x=explicit_x).circuit
        low = decompose_circuit(c)
        assert low.num_qubits == 7
        U = restrict_to_clean_ancilla(circuit_unitary(low), 6)
        assert np.allclose(U, circuit_unitary(c), atol=1e-8)

    def test_builders_up_to_ten_qubits(self, rng):
        # V2M at N=8 (6 register qubits + ancilla) and M-MM with an x_all block
        A = unit_rows(rng, 8)
        x_vec = A[3]
        circuits = [build_v2m(A, x_vec).circuit]
        flip = np.fliplr(np.eye(4))
        circuits.append(build_mmm(unit_rows(rng, 4), [flip, np.eye(4)],
                                  labels=["x_all", "identity"]).circuit)
        for c in circuits:
            low = decompose_circuit(c, strict=True)
            assert low.num_qubits <= 10
            U = restrict_to_clean_ancilla(circuit_unitary(low), c.num_qubits)
            assert np.allclose(U, circuit_unitary(c), atol=1e-8)


def random_high_level_circuit(rng, max_qubits=6, max_gates=30, max_controls=4):
    n = int(rng.integers(2, max_qubits + 1))
    gates = []
    for _ in range(int(rng.integers(1, max_gates + 1))):
        qs = [int(q) for q in rng.permutation(n)]
        k = int(rng.integers(0, min(max_controls, n - 1) + 1))
        if rng.random() < 0.2:
            gates.append(h(qs[0]))
        else:
            pol = [int(b) for b in rng.integers(0, 2, k)]
            gates.append(mcry(float(rng.uniform(-np.pi, np.pi)), qs[:k], qs[k], pol))
    return Circuit(n, gates)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_decomposition_soundness(seed):
    c = random_high_level_circuit(np.random.default_rng(seed))
    low = decompose_circuit(c)
    U = circuit_unitary(low)
    if low.num_qubits > c.num_qubits:
        U = restrict_to_clean_ancilla(U, c.num_qubits)
    assert np.allclose(U, circuit_unitary(c), atol=1e-8)
