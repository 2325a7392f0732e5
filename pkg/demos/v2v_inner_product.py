"""Inner product of two vectors read from one circuit.

Encode a, un-encode b, and the probability of landing back on |0...0> is
(a.b)^2.  With a finite number of shots the estimate wobbles around it.
"""
import numpy as np

from qkmm import build_v2v, probabilities, reconstruct_magnitudes, sample_shots, simulate

a = np.array([0.6, 0.8, 0.0, 0.0])
b = np.array([0.8, 0.6, 0.0, 0.0])
bundle = build_v2v(a, b)
print(f"{bundle.width} qubits, {len(bundle.circuit.gates)} high-level gates")

p = probabilities(simulate(bundle.circuit))
print(f"P(00) = {p[0]:.6f}   (a.b)^2 = {(a @ b) ** 2:.6f}")

for shots in (100, 1_000, 10_000, 100_000):
    est = reconstruct_magnitudes(sample_shots(p, shots, seed=1), bundle)
    print(f"{shots:>7} shots: |a.b| ~ {float(est.magnitudes):.4f}")
