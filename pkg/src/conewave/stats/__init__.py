from .entropy import (
    EntropyEstimate,
    EntropyReport,
    delta_k_estimate,
    differential_entropy_knn,
    discretized_entropy,
    gaussian_delta_k,
    gaussian_entropy,
    wave_delta_k,
)
from .lp import AtomicMeasure, DistanceReport, LPResult, levy_prokhorov, xi_k
from .projection import ProjectionBasis, constraint_vectors, pi_basis

__all__ = [
    "AtomicMeasure",
    "DistanceReport",
    "EntropyEstimate",
    "EntropyReport",
    "LPResult",
    "ProjectionBasis",
    "constraint_vectors",
    "delta_k_estimate",
    "differential_entropy_knn",
    "discretized_entropy",
    "gaussian_delta_k",
    "gaussian_entropy",
    "levy_prokhorov",
    "pi_basis",
    "wave_delta_k",
    "xi_k",
]
