"""Halfspace depth toolkit.

Exact and certified sample depth, closed-form population depth for
normal families, finite-sample deviation bounds for the empirical depth
process, and a seeded Monte Carlo harness that compares the bounds
against observed deviations.
"""

from .bounds import (
    BOUND_KINDS,
    BoundParams,
    BoundReport,
    CoveringCount,
    Precondition,
    bound_balanced_tail,
    bound_bivariate_normal,
    bound_free_params,
    bound_parameter_free,
    covering_count,
    dkw_bound,
    evaluate_bound,
    halfplane_subset_count,
    improvement_factor,
    regular_polygon,
    shatter_exact_2d,
    shatter_upper,
    vc_bound_double_sample,
    vc_bound_squared_sample,
)
from .experiments import (
    BoundComparison,
    ExperimentConfig,
    ExperimentResult,
    TrialResult,
    auto_queries,
    default_sweep_grid,
    draw_sample,
    run_bound_sweep,
    run_deviation_experiment,
    split_seed,
    sweep_rows_to_csv,
    write_outputs,
)
from .geometry import (
    CoverCheck,
    Direction,
    SphericalCover,
    build_cover,
    max_cover_radius,
    project,
    sample_directions,
    spherical_distance,
    verify_cover,
)
from .population import (
    AffineReduction,
    DistributionSpec,
    affine_reduce,
    cdf_projected,
    cdf_projected_many,
    elliptical_normal,
    population_depth,
    standard_normal,
    tail_probability_bound,
)
from .sample_depth import (
    DepthInterval,
    DepthValue,
    Sample,
    depth_1d,
    depth_approx,
    depth_brute,
    depth_certified,
    depth_exact_2d,
    ks_statistic,
    sup_deviation,
)

__version__ = "0.1.0"

__all__ = [
    "BOUND_KINDS",
    "AffineReduction",
    "BoundComparison",
    "BoundParams",
    "BoundReport",
    "CoverCheck",
    "CoveringCount",
    "DepthInterval",
    "DepthValue",
    "Direction",
    "DistributionSpec",
    "ExperimentConfig",
    "ExperimentResult",
    "Precondition",
    "Sample",
    "SphericalCover",
    "TrialResult",
    "affine_reduce",
    "auto_queries",
    "bound_balanced_tail",
    "bound_bivariate_normal",
    "bound_free_params",
    "bound_parameter_free",
    "build_cover",
    "cdf_projected",
    "cdf_projected_many",
    "covering_count",
    "default_sweep_grid",
    "depth_1d",
    "depth_approx",
    "depth_brute",
    "depth_certified",
    "depth_exact_2d",
    "dkw_bound",
    "draw_sample",
    "elliptical_normal",
    "evaluate_bound",
    "halfplane_subset_count",
    "improvement_factor",
    "ks_statistic",
    "max_cover_radius",
    "population_depth",
    "project",
    "regular_polygon",
    "run_bound_sweep",
    "run_deviation_experiment",
    "sample_directions",
    "shatter_exact_2d",
    "shatter_upper",
    "spherical_distance",
    "split_seed",
    "standard_normal",
    "sup_deviation",
    "sweep_rows_to_csv",
    "tail_probability_bound",
    "vc_bound_double_sample",
    "vc_bound_squared_sample",
    "verify_cover",
    "write_outputs",
]
