"""Gate counts of M2M against the closed forms and the Hadamard-test stack."""
import numpy as np

from qkmm import build_m2m, count_gates, decompose_circuit, predicted_counts
from qkmm.counting import hadamard_stack_model

print(f"{'N':>4} {'model':>10} {'closed form':>12} {'printed':>10} {'lowered':>8} "
      f"{'ratio':>6} {'hadamard stack':>15}")
for n in range(1, 6):
    N = 2 ** n
    rng = np.random.default_rng(N)
    A = rng.standard_normal((N, N))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    B = rng.standard_normal((N, N))
    B /= np.linalg.norm(B, axis=0, keepdims=True)
    circuit = build_m2m(A, B).circuit
    model = count_gates(circuit, "paper_model").total_elementary
    lowered = len(decompose_circuit(circuit).gates) if N <= 8 else float("nan")
    pc = predicted_counts(N)
    print(f"{N:>4} {model:>10} {pc.S_recomposed:>12} {pc.S_printed:>10} {lowered:>8} "
          f"{model / (N * N * n):>6.1f} {hadamard_stack_model(N):>15}")
