"""Sparse overlapping community detection by iterative thresholding of the
leading eigenspace of a network adjacency matrix."""

from .datasets import FixtureMissingError, load_karate, load_polblogs
from .graph import (DegreeSummary, EdgeListError, SparseGraph, degree_summary,
                    largest_connected_component, load_edge_list, save_edge_list)
from .linalg import (EigenConvergenceError, EigenPair, RankDeficientError, spmm,
                     subspace_distance, thin_qr, top_k_eigen, truncated_svd)
from .metrics import binarize, metrics_report, misclustering, nvi, overlap_count
from .selection import (DEFAULT_GRID, FoldPlan, LambdaPath, bic_score, complete_matrix,
                        ecv_score, log_likelihood, make_folds, project_p,
                        select_k, select_lambda)
from .simulate import (OccamParams, ScenarioError, ScenarioSpec, build_scenario,
                       calibrate_alpha, planted_partition, sample_adjacency)
from .spca import (FitConfig, FitError, MembershipBasis, random_multistart,
                   score_init, spca_cd_fit, spca_eig_fit, threshold_rows, v_to_occam)

__all__ = [
    "bic_score",
    "binarize",
    "build_scenario",
    "calibrate_alpha",
    "complete_matrix",
    "DEFAULT_GRID",
    "degree_summary",
    "DegreeSummary",
    "ecv_score",
    "EdgeListError",
    "EigenConvergenceError",
    "EigenPair",
    "FitConfig",
    "FitError",
    "FixtureMissingError",
    "FoldPlan",
    "LambdaPath",
    "largest_connected_component",
    "load_edge_list",
    "load_karate",
    "load_polblogs",
    "log_likelihood",
    "make_folds",
    "MembershipBasis",
    "metrics_report",
    "misclustering",
    "nvi",
    "OccamParams",
    "overlap_count",
    "planted_partition",
    "project_p",
    "random_multistart",
    "RankDeficientError",
    "sample_adjacency",
    "save_edge_list",
    "ScenarioError",
    "ScenarioSpec",
    "score_init",
    "select_k",
    "select_lambda",
    "SparseGraph",
    "spca_cd_fit",
    "spca_eig_fit",
    "spmm",
    "subspace_distance",
    "thin_qr",
    "threshold_rows",
    "top_k_eigen",
    "truncated_svd",
    "v_to_occam",
]

__version__ = "0.1.0"
