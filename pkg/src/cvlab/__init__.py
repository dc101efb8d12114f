"""Numerical laboratory for rotation-invariant Kahler metrics on C^n.

Build a metric model from a single radial generator (xi, F'' or h), evaluate
its curvature pointwise, and integrate curvature quantities over geodesic
balls to measure which comparison integrals stay bounded as the balls grow.
"""

from .expr import EvaluationError, ExpressionError, evaluate, parse_expression, to_source
from .profiles import (
    ClosedFormSource,
    GeneratorKind,
    GeneratorProfile,
    ProfileError,
    SampledSource,
    ValidationReport,
    eval_profile,
    load_profile,
    validate,
    validate_F,
    validate_xi,
)
from .families import (
    ParameterGateError,
    StepFamily,
    flat_metric,
    lp_counterexample,
    polynomial_xi,
    s3_metric,
    saturation_ramp,
    smooth_step_profile,
    step_profile,
    yau_counterexample,
)
from .metric import (
    BuildOptions,
    Classification,
    MetricClass,
    MetricModel,
    Representation,
    VolumeGrowth,
    ball_coefficient,
    build_metric,
    classify,
    completeness_check,
    fprime_from_xi,
    h_to_f,
    load_metric,
    save_metric,
    xi_from_fprime,
    xi_to_h,
)
from .curvature import (
    abc_at_r,
    abc_at_x,
    abc_native,
    chern_density_k,
    curvature_table,
    ricci_eigenvalues,
    scalar_curvature,
    sigma_k,
)
from .integrals import (
    BallIntegralSeries,
    ChernTotal,
    average_scalar_curvature,
    average_scalar_series,
    ball_integral,
    chern_number,
    default_s_grid,
    distance_s,
    lp_curvature_series,
    mixed_curvature_ibp,
    normalized_chern_series,
    normalized_sigma_series,
    volume_ball,
    volume_growth_report,
    volume_ratio_limit,
)
from .growth import (
    CoordinateGrowthReport,
    GrowthFit,
    GrowthVerdict,
    coordinate_growth,
    fit_loglog,
    growth_fit,
    log_growth_fit,
)
from .quadrature import QuadratureError

__version__ = "0.1.0"

__all__ = [
    "BallIntegralSeries",
    "BuildOptions",
    "ChernTotal",
    "Classification",
    "ClosedFormSource",
    "CoordinateGrowthReport",
    "EvaluationError",
    "ExpressionError",
    "GeneratorKind",
    "GeneratorProfile",
    "GrowthFit",
    "GrowthVerdict",
    "MetricClass",
    "MetricModel",
    "ParameterGateError",
    "ProfileError",
    "QuadratureError",
    "Representation",
    "SampledSource",
    "StepFamily",
    "ValidationReport",
    "VolumeGrowth",
    "abc_at_r",
    "abc_at_x",
    "abc_native",
    "average_scalar_curvature",
    "average_scalar_series",
    "ball_coefficient",
    "ball_integral",
    "build_metric",
    "chern_density_k",
    "chern_number",
    "classify",
    "completeness_check",
    "coordinate_growth",
    "curvature_table",
    "default_s_grid",
    "distance_s",
    "eval_profile",
    "evaluate",
    "fit_loglog",
    "flat_metric",
    "fprime_from_xi",
    "growth_fit",
    "h_to_f",
    "load_metric",
    "load_profile",
    "log_growth_fit",
    "lp_counterexample",
    "lp_curvature_series",
    "mixed_curvature_ibp",
    "normalized_chern_series",
    "normalized_sigma_series",
    "parse_expression",
    "polynomial_xi",
    "ricci_eigenvalues",
    "s3_metric",
    "saturation_ramp",
    "save_metric",
    "scalar_curvature",
    "sigma_k",
    "smooth_step_profile",
    "step_profile",
    "to_source",
    "validate",
    "validate_F",
    "validate_xi",
    "volume_ball",
    "volume_growth_report",
    "volume_ratio_limit",
    "xi_from_fprime",
    "xi_to_h",
    "yau_counterexample",
]
