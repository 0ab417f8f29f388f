"""Koopman operator approximation from sparse data.

Sparse snapshot sets are enriched with bounded artificial perturbations and
the operator is fitted by Frobenius-regularized least squares, which keeps
the learned spectrum well behaved where plain (E)DMD overfits.
"""

from .dictionary import Dictionary
from .enrichment import EnrichmentConfig, SnapshotPairs, enrich
from .errors import (
    ConfigError,
    DimensionError,
    InstabilityError,
    InsufficientDataError,
    KoopmanError,
    MisconfigurationError,
    NumericalFailure,
    SchemaError,
)
from .koopman import (
    GramMatrices,
    KoopmanModel,
    build_gram,
    fit_edmd,
    fit_robust,
    spectrum,
    train_from_trajectory,
)
from .predictor import PredictionResult, fit_output_map, predict
from .systems import Trajectory

__all__ = [
    "ConfigError",
    "DimensionError",
    "Dictionary",
    "EnrichmentConfig",
    "GramMatrices",
    "InstabilityError",
    "InsufficientDataError",
    "KoopmanError",
    "KoopmanModel",
    "MisconfigurationError",
    "NumericalFailure",
    "PredictionResult",
    "SchemaError",
    "SnapshotPairs",
    "Trajectory",
    "build_gram",
    "enrich",
    "fit_edmd",
    "fit_output_map",
    "fit_robust",
    "predict",
    "spectrum",
    "train_from_trajectory",
]
