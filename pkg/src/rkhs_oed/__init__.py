"""Bias-aware optimal experimental design for linear functionals of an
RKHS element: feature maps, functionals, estimators, confidence ellipsoids,
allocation optimization, and reproducible experiment scenarios."""

from .features import (FeatureMap, PriorOperator, evaluate_design_matrix,
                       linear_map, nystrom_features, polynomial_map,
                       qff_squared_exponential, se_kernel, se_kernel_grad)
from .functionals import (FunctionalFamily, LinearFunctional, ProjectedData,
                          contamination_selector, evaluation_functional,
                          gradient_functional, integral_functional,
                          interpolation_weights, lyapunov_functional,
                          mmd_bias, ode_nullspace_functional, project_data,
                          relative_bias)
from .estimators import (Dataset, InfoMatrix, info_matrix_adaptive,
                         info_matrix_interp, info_matrix_ridge, interpolate,
                         residual_covariance_bound, ridge,
                         weighted_info_matrix)
from .confidence import (ConfidenceEllipsoid, adaptive_ellipsoid,
                         adaptive_radius_closed_form, fixed_interp_ellipsoid,
                         fixed_ridge_ellipsoid, interval, l2_error_bound,
                         projected_biased_adaptive, xi)
from .design import (Allocation, DesignObjective, balance_bias_variance,
                     evaluate_objective, gradient_design_geometry_check,
                     greedy_design, grid_search_design, mirror_descent_design,
                     objective_gradient, query_complexity, round_allocation)

__version__ = "0.1.0"
