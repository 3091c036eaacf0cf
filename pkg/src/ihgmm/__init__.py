"""Clustering under individual-heterogeneous sub-Gaussian mixture models."""
__version__ = "0.1.0"

from .cluster import (  # noqa: E402
    KMeansConfig,
    hollow_gram,
    ideal_oracle,
    ihsc,
    kmeans,
    kmeans_raw,
    psc,
)
from .linalg import qr_orthonormal_columns, sym_top_k_eigs, thin_svd  # noqa: E402
from .metrics import aggregate, linear_assignment, misclassification  # noqa: E402
from .model import (  # noqa: E402
    GroundTruth,
    NoiseSpec,
    compute_diagnostics,
    generate_dataset,
    separation_delta,
)
from .rng import rng_streams  # noqa: E402

__all__ = [
    "KMeansConfig",
    "GroundTruth",
    "NoiseSpec",
    "aggregate",
    "compute_diagnostics",
    "generate_dataset",
    "hollow_gram",
    "ideal_oracle",
    "ihsc",
    "kmeans",
    "kmeans_raw",
    "linear_assignment",
    "misclassification",
    "psc",
    "qr_orthonormal_columns",
    "rng_streams",
    "separation_delta",
    "sym_top_k_eigs",
    "thin_svd",
]
