"""Learning Gaussian latent tree structure from corrupted samples."""

from .corrupt import CorruptionSpec, audit_budget, inject
from .distances import DistanceMatrix
from .estimate import distance_matrix, estimate_distance, robust_covariance, truncated_inner_product
from .estimators import (ChowLiuRecursiveGrouping, InformationDistance, NeighborJoining, RecursiveGrouping,
                         SpectralNeighborJoining)
from .evaluate import error_rate, rf_distance
from .exceptions import LatentTreeError, ModelAssumptionError, ParameterError, ShapeError
from .model import (GroundTruthModel, ModelParams, delta_mst, exact_covariance, exact_distance,
                    exact_distance_matrix, make_homogeneous_params, mutual_information, sample,
                    surrogate)
from .reconstruct import LearnedTree, RgConfig, clrg_learn, mst, nj_learn, rg_learn, snj_learn
from .tree import LatentTree, build_archetype

__version__ = "0.1.0"

__all__ = [
    "ChowLiuRecursiveGrouping", "CorruptionSpec", "DistanceMatrix", "GroundTruthModel", "InformationDistance",
    "LatentTree", "LatentTreeError", "LearnedTree", "ModelAssumptionError", "ModelParams", "NeighborJoining",
    "ParameterError", "RecursiveGrouping", "RgConfig", "ShapeError", "SpectralNeighborJoining", "audit_budget",
    "build_archetype", "clrg_learn", "delta_mst", "distance_matrix", "error_rate", "estimate_distance",
    "exact_covariance", "exact_distance", "exact_distance_matrix", "inject", "make_homogeneous_params", "mst",
    "mutual_information", "nj_learn", "rf_distance", "rg_learn", "robust_covariance", "sample", "snj_learn",
    "surrogate", "truncated_inner_product",
]
