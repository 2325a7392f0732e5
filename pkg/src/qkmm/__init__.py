"""Kernel-based quantum matrix multiplication on a numpy circuit simulator."""

__version__ = "0.1.0"

from .algorithms import (QkmmCircuitBundle, auto_normalize, build_hadamard_test, build_m2m,
                         build_mmm, build_swap_test, build_v2m, build_v2v, normalized_matrix)
from .circuit import Circuit, Gate, circuit_from_text, circuit_to_text
from .counting import GateCountReport, count_gates, predicted_counts
from .decompose import decompose_circuit, decompose_mcry
from .density import DensityMatrix, dm_apply_gate, dm_apply_kraus, dm_probabilities
from .encoding import (AngleTree, build_controlled_encoder, build_encoder, build_encoder_inverse,
                       compute_angles)
from .errors import (ConfigurationError, DecompositionError, NumericError, QkmmError,
                     QubitIndexError, ValidationError)
from .metrics import (MetricReport, ProductEstimate, accuracy_gate, classical_oracle, fidelity,
                      mean_error, reconstruct_magnitudes)
from .noise import (NoiseChannel, NoiseParams, amplitude_damping, apply_noise_model,
                    depolarizing_from_fidelity, phase_damping)
from .statevector import (ShotHistogram, StateVector, apply_circuit, apply_elementary_gate,
                          probabilities, sample_shots, simulate)

__all__ = [
    "AngleTree", "Circuit", "ConfigurationError", "DecompositionError", "DensityMatrix", "Gate",
    "GateCountReport", "MetricReport", "NoiseChannel", "NoiseParams", "NumericError",
    "ProductEstimate", "QkmmCircuitBundle", "QkmmError", "QubitIndexError", "ShotHistogram",
    "StateVector", "ValidationError", "accuracy_gate", "amplitude_damping", "apply_circuit",
    "apply_elementary_gate", "apply_noise_model", "auto_normalize", "build_controlled_encoder",
    "build_encoder", "build_encoder_inverse", "build_hadamard_test", "build_m2m", "build_mmm",
    "build_swap_test", "build_v2m", "build_v2v", "circuit_from_text", "circuit_to_text",
    "classical_oracle", "compute_angles", "count_gates", "decompose_circuit", "decompose_mcry",
    "depolarizing_from_fidelity", "dm_apply_gate", "dm_apply_kraus", "dm_probabilities",
    "fidelity", "mean_error", "normalized_matrix", "phase_damping", "predicted_counts",
    "probabilities", "reconstruct_magnitudes", "sample_shots", "simulate",
]
