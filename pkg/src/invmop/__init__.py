"""Inverse multiobjective optimization: objective vectors from Pareto critical data."""
from .basis import MonomialBasis, eval_basis_gradients, eval_monomial, generate_monomial_basis
from .kkt import DataPoint, DataSet, KktSystem, assemble_block, assemble_system, load_dataset, save_dataset
from .objective import (
    AnalyticObjective,
    PolynomialObjective,
    best_alpha,
    best_alpha_many,
    get_objective,
    kkt_residual,
)
from .solver import (
    InverseSolution,
    SvdSpectrum,
    align_weights,
    compose_coefficient,
    degree_sweep,
    reconstruct_objective,
    select_indices,
    solve_inverse,
    svd_spectrum,
)
from .critical_set import (
    CriticalPointCloud,
    cluster_components,
    filter_near_data,
    grid_scan,
    hausdorff,
)
from .generators import (
    DescentOptions,
    SaaConfig,
    gen_circle,
    gen_ellipse,
    gen_saa_location,
    gen_scalarized_dataset,
    gen_three_lines,
    weighted_sum_solve,
)
from .alpha_estimation import estimate_kkt_vectors

__version__ = "0.1.0"

__all__ = [
    "AnalyticObjective", "CriticalPointCloud", "DataPoint", "DataSet", "DescentOptions", "InverseSolution",
    "KktSystem", "MonomialBasis", "PolynomialObjective", "SaaConfig", "SvdSpectrum", "align_weights",
    "assemble_block", "assemble_system", "best_alpha", "best_alpha_many", "cluster_components",
    "compose_coefficient", "degree_sweep", "estimate_kkt_vectors", "eval_basis_gradients", "eval_monomial",
    "filter_near_data", "gen_circle", "gen_ellipse", "gen_saa_location", "gen_scalarized_dataset",
    "gen_three_lines", "generate_monomial_basis", "get_objective", "grid_scan", "hausdorff", "kkt_residual",
    "load_dataset", "reconstruct_objective", "save_dataset", "select_indices", "solve_inverse", "svd_spectrum",
    "weighted_sum_solve",
]
