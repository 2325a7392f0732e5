"""Reading products back out of outcome distributions, and error metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import QkmmCircuitBundle
from .errors import NumericError, ValidationError
from .statevector import ShotHistogram, clamp_probabilities


@dataclass
class ProductEstimate:
    """Magnitudes recovered from a bundle's outcome distribution.

    ``magnitudes`` is a scalar array for V2V and the baselines, length N for
    V2M, ``N x N`` (row i of A, column j of B) for M2M and ``K x N x N``
    (block k, row j of A, output i) for M-MM.  ``signed`` is only set by the
    Hadamard test, the one circuit whose readout keeps the sign.
    """

    magnitudes: np.ndarray
    shots: int | None
    normalization_factor: float
    source: str
    post_selected_shots: int | None = None
    signed: np.ndarray | None = None


def _distribution(data, num_qubits: int) -> tuple[np.ndarray, int | None, str]:
    if isinstance(data, ShotHistogram):
        if data.num_qubits != num_qubits:
            raise ValidationError("histogram width does not match the circuit")
        return data.frequencies(), data.total_shots, "sampled"
    p = clamp_probabilities(np.asarray(data, dtype=float))
    if p.size != 2 ** num_qubits:
        raise ValidationError(f"expected {2 ** num_qubits} outcomes, got {p.size}")
    return p, None, "exact_probabilities"


def marginal(p: np.ndarray, num_qubits: int, keep: range | list[int]) -> np.ndarray:
    """Marginal distribution over the qubits in ``keep`` (kept in order)."""
    keep = list(keep)
    t = np.asarray(p).reshape((2,) * num_qubits)
    drop = tuple(q for q in range(num_qubits) if q not in keep)
    return t.sum(axis=drop).reshape(-1) if drop else t.reshape(-1)


def _ancilla_readout(p0: float) -> float:
    return float(np.clip(p0, 0.0, 1.0))


def reconstruct_magnitudes(data, bundle: QkmmCircuitBundle) -> ProductEstimate:
    """Turn probabilities (or a shot histogram) into product magnitudes.

    ``data`` may cover extra trailing qubits (e.g. a decomposition ancilla);
    they are marginalised away.  Outcomes outside the all-zero data block are
    discarded for the kernel tasks.
    """
    width = bundle.width
    size = data.frequencies().size if isinstance(data, ShotHistogram) else np.asarray(data).size
    total_qubits = max(size - 1, 0).bit_length()
    if 2 ** total_qubits != size or total_qubits < width:
        raise ValidationError(f"{size} outcomes do not cover the {width}-qubit circuit")
    p, shots, source = _distribution(data, total_qubits)
    if total_qubits > width:
        p = marginal(p, total_qubits, range(width))
    N = bundle.dimension
    norm = bundle.normalization_factor
    task = bundle.task
    signed = None
    if task in ("v2v", "v2m", "m2m"):
        index_size = p.size // N
        block = p.reshape(index_size, N)[:, 0]
        mags = np.sqrt(clamp_probabilities(block / norm))
        if task == "v2v":
            mags = mags.reshape(())
        elif task == "m2m":
            mags = mags.reshape(N, N).T
        post = None if shots is None else int(round(block.sum() * shots))
    elif task == "mmm":
        K = bundle.num_blocks
        mags = np.sqrt(clamp_probabilities(p / norm)).reshape(K, N, N)
        post = shots
    elif task == "swap":
        p0 = _ancilla_readout(p.reshape(2, -1)[0].sum())
        sq = 2 * p0 - 1
        if sq < -1e-9 and shots is None:
            raise NumericError(f"swap-test readout {p0} below 1/2")
        mags = np.sqrt(np.array(max(sq, 0.0)))
        post = shots
    elif task == "hadamard":
        p0 = _ancilla_readout(p.reshape(2, -1)[0].sum())
        signed = np.array(2 * p0 - 1)
        mags = np.abs(signed)
        post = shots
    else:
        raise ValidationError(f"unknown task {task!r}")
    if np.any(mags > 1 + 1e-6) and shots is None:
        raise NumericError("reconstructed magnitude exceeds 1")
    return ProductEstimate(np.asarray(mags, dtype=float), shots, norm, source, post, signed)


# oracles ------------------------------------------------------------------

def classical_oracle(A, B) -> np.ndarray | float:
    """Dense product at double precision: dot, matvec or matmul by shape."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 1 and B.ndim == 1:
        if A.size != B.size:
            raise ValidationError("dimension mismatch")
        return float(A @ B)
    if A.ndim == 2 and B.ndim in (1, 2):
        if A.shape[1] != B.shape[0]:
            raise ValidationError(f"incompatible shapes {A.shape} and {B.shape}")
        return A @ B
    raise ValidationError("unsupported operand shapes")


def bundle_truth(bundle: QkmmCircuitBundle, *operands) -> np.ndarray:
    """Exact magnitudes a bundle should reproduce, from the classical oracle."""
    task = bundle.task
    if task in ("v2v", "swap", "hadamard"):
        return np.abs(np.asarray(classical_oracle(*operands)))
    if task in ("v2m", "m2m"):
        return np.abs(classical_oracle(*operands))
    if task == "mmm":
        A, blocks = operands
        as_product = bundle.metadata.get("as_product", False)
        out = []
        for B in list(blocks) + [np.eye(bundle.dimension)] * (bundle.num_blocks - len(blocks)):
            out.append(np.abs(A @ B) if as_product else np.abs(A @ np.asarray(B).T))
        return np.stack(out)
    raise ValidationError(f"unknown task {task!r}")


# metrics ------------------------------------------------------------------

def fidelity(ideal, noisy) -> float:
    """Classical fidelity (sum_z sqrt(p_z q_z))^2 between two distributions."""
    p = np.asarray(ideal, dtype=float)
    q = np.asarray(noisy, dtype=float)
    if p.shape != q.shape:
        raise ValidationError(f"length mismatch: {p.shape} vs {q.shape}")
    for name, d in (("ideal", p), ("noisy", q)):
        if abs(d.sum() - 1.0) > 1e-6:
            raise ValidationError(f"{name} distribution sums to {d.sum()}")
    if np.array_equal(p, q):
        return 1.0
    bc = np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None)))
    return float(min(1.0, bc ** 2))


def matrix_overlap_fidelity(M1, M2) -> float:
    """Normalised Frobenius inner product of two magnitude arrays."""
    a = np.asarray(M1, dtype=float).ravel()
    b = np.asarray(M2, dtype=float).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return float(na == nb)
    return float(np.clip(a @ b / (na * nb), 0.0, 1.0))


def mean_error(estimate, truth) -> float:
    est = estimate.magnitudes if isinstance(estimate, ProductEstimate) else estimate
    est = np.asarray(est, dtype=float)
    t = np.abs(np.asarray(truth, dtype=float))
    if est.shape != t.shape:
        raise ValidationError(f"shape mismatch: {est.shape} vs {t.shape}")
    return float(np.mean(np.abs(est - t)))


@dataclass
class AccuracyGate:
    passed: np.ndarray
    pass_rate: float
    bound: float


def accuracy_gate(estimate, truth, bound: float) -> AccuracyGate:
    """Elementwise |estimate - |truth|| <= bound (boundary counts as a pass)."""
    if bound <= 0:
        raise ValidationError("bound must be positive")
    est = estimate.magnitudes if isinstance(estimate, ProductEstimate) else estimate
    err = np.abs(np.asarray(est, dtype=float) - np.abs(np.asarray(truth, dtype=float)))
    # absorb the rounding of est - truth so an error of exactly `bound` passes
    passed = err <= bound + 4 * np.finfo(float).eps * max(1.0, bound)
    return AccuracyGate(passed, float(np.mean(passed)), bound)


@dataclass
class MetricReport:
    fidelity: float
    mean_error: float
    per_element_errors: np.ndarray
    matrix_fidelity: float | None = None
    pass_rate: float | None = None
    config_echo: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "matrix_fidelity": self.matrix_fidelity,
            "mean_error": self.mean_error,
            "pass_rate": self.pass_rate,
            "per_element_errors": np.asarray(self.per_element_errors).tolist(),
            "config_echo": self.config_echo,
        }


def metric_report(estimate: ProductEstimate, truth, ideal_dist=None, observed_dist=None,
                  bound: float = 0.1, config_echo: dict | None = None) -> MetricReport:
    t = np.abs(np.asarray(truth, dtype=float))
    errs = np.abs(estimate.magnitudes - t)
    fid = 1.0 if ideal_dist is None else fidelity(ideal_dist, observed_dist)
    return MetricReport(fid, float(errs.mean()), errs,
                        matrix_overlap_fidelity(estimate.magnitudes, t),
                        accuracy_gate(estimate, t, bound).pass_rate, dict(config_echo or {}))
