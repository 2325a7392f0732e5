"""How relaxation, dephasing and gate errors degrade an M2M readout.

Runs the exact density-matrix engine on the lowered circuit for each noise
source on its own and all together (takes about ten seconds).
"""
import numpy as np

from qkmm import (NoiseParams, apply_noise_model, build_m2m, decompose_circuit, dm_probabilities,
                  fidelity, probabilities, reconstruct_magnitudes, simulate)
from qkmm.metrics import marginal

rng = np.random.default_rng(8)
N = 4
A = rng.standard_normal((N, N))
A /= np.linalg.norm(A, axis=1, keepdims=True)
B = rng.standard_normal((N, N))
B /= np.linalg.norm(B, axis=0, keepdims=True)

bundle = build_m2m(A, B)
low = decompose_circuit(bundle.circuit)
print(f"lowered to {len(low.gates)} gates on {low.num_qubits} qubits")
ideal = probabilities(simulate(bundle.circuit))

for sources in (["T1"], ["T2"], ["GATE"], ["T1", "T2", "GATE"]):
    rho = apply_noise_model(low, NoiseParams(enabled_sources=sources))
    q = marginal(dm_probabilities(rho), low.num_qubits, range(bundle.width))
    q = q / q.sum()
    est = reconstruct_magnitudes(q, bundle).magnitudes
    print(f"{'+'.join(sources):>10}: fidelity {fidelity(ideal, q):.3f}, "
          f"mean error {np.mean(np.abs(est - np.abs(A @ B))):.3f}")
