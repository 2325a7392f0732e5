"""Several products sharing one encoded A.

build_mmm adds a third index register that selects one of K unitaries B_k.
The per-product gate count falls as K grows because the row encoders of A
are paid once.
"""
import numpy as np

from qkmm import build_mmm, count_gates, probabilities, reconstruct_magnitudes, simulate

rng = np.random.default_rng(3)
N = 4
A = rng.standard_normal((N, N))
A /= np.linalg.norm(A, axis=1, keepdims=True)


def orthogonal():
    q, r = np.linalg.qr(rng.standard_normal((N, N)))
    return q * np.sign(np.diag(r))


for K in (1, 2, 4, 8):
    blocks = [orthogonal() for _ in range(K)]
    bundle = build_mmm(A, blocks, as_product=True)
    est = reconstruct_magnitudes(probabilities(simulate(bundle.circuit)), bundle)
    err = max(np.max(np.abs(est.magnitudes[k] - np.abs(A @ B))) for k, B in enumerate(blocks))
    gates = count_gates(bundle.circuit, "measured").total_elementary
    print(f"K={K}: {bundle.width} qubits, {gates / K:.1f} gates per product, max error {err:.1e}")
