"""A whole matrix product from a single circuit.

Two index registers pick row i of A and column j of B.  The ground block of
the data register then holds |(AB)_ij|^2 / N^2 at outcome (j, i).
"""
import numpy as np

from qkmm import (accuracy_gate, build_m2m, mean_error, probabilities, reconstruct_magnitudes,
                  sample_shots, simulate)

rng = np.random.default_rng(5)
N = 4
A = rng.standard_normal((N, N))
A /= np.linalg.norm(A, axis=1, keepdims=True)
B = rng.standard_normal((N, N))
B /= np.linalg.norm(B, axis=0, keepdims=True)

bundle = build_m2m(A, B)
print(f"N={N}: {bundle.width} qubits, registers {bundle.register_map}")
p = probabilities(simulate(bundle.circuit))
exact = reconstruct_magnitudes(p, bundle).magnitudes
print("max error of the exact readout:", np.max(np.abs(exact - np.abs(A @ B))))

np.set_printoptions(precision=3, suppress=True)
print("|AB|\n", np.abs(A @ B))
for shots in (1_000, 100_000):
    est = reconstruct_magnitudes(sample_shots(p, shots, seed=2), bundle)
    gate = accuracy_gate(est, A @ B, 0.1)
    print(f"{shots} shots: mean error {mean_error(est, A @ B):.4f}, "
          f"within 0.1: {gate.pass_rate:.2f}")
    print(est.magnitudes)
