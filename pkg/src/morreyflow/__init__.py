"""Numerical laboratory for the supercritical reaction-diffusion flow on balls.

u_t - Laplace(u) = |u|^(p-2) u with Dirichlet data, radial reduction on
B_R(0) in R^n: Morrey-norm instruments, the Dirichlet heat semigroup, the
nonlinear flow with blow-up detection, Duhamel/fixed-point mild solutions,
and truncated monotone approximations with blow-up classification.
"""

__version__ = "0.1.0"

from .exponents import (
    FlowParams,
    ball_blowup_bound,
    derive_params,
    joseph_lundgren,
    singular_steady_coefficient,
)
from .geometry import (
    RadialField,
    RadialGrid,
    SpaceTimeField,
    ball_volume,
    integrate,
    make_grid,
    rescale_field,
)
from .norms import (
    MorreyResult,
    energy,
    fractional_maximal,
    lq_norm,
    morrey_norm_radial,
    morrey_norm_sampled,
    parabolic_morrey_norm,
)
from .heat import (
    LinearStepper,
    decay_check,
    gaussian_kernel,
    green_column,
    semigroup,
    step_linear,
)
from .flow import (
    BlowupReport,
    FlowControls,
    Trajectory,
    fit_blowup_rate,
    run_flow,
    scaling_test,
    verify_ball,
)
from .mild import (
    PicardDiagnostics,
    bound_28_check,
    compare_mild_vs_stepper,
    duhamel,
    epsilon0_scan,
    picard_solve,
)
from .minimal import (
    Classification,
    TruncationRun,
    classify,
    duhamel_consistency,
    minimal_solution,
    run_truncated,
    theorem41_margin_scan,
)
from .profiles import bubble_profile, make_profile, power_profile

__all__ = [
    "FlowParams",
    "derive_params",
    "joseph_lundgren",
    "singular_steady_coefficient",
    "ball_blowup_bound",
    "RadialGrid",
    "RadialField",
    "SpaceTimeField",
    "make_grid",
    "integrate",
    "rescale_field",
    "ball_volume",
    "MorreyResult",
    "lq_norm",
    "morrey_norm_radial",
    "morrey_norm_sampled",
    "parabolic_morrey_norm",
    "fractional_maximal",
    "energy",
    "LinearStepper",
    "step_linear",
    "semigroup",
    "gaussian_kernel",
    "green_column",
    "decay_check",
    "FlowControls",
    "Trajectory",
    "BlowupReport",
    "run_flow",
    "fit_blowup_rate",
    "verify_ball",
    "scaling_test",
    "PicardDiagnostics",
    "duhamel",
    "picard_solve",
    "compare_mild_vs_stepper",
    "bound_28_check",
    "epsilon0_scan",
    "TruncationRun",
    "Classification",
    "run_truncated",
    "minimal_solution",
    "duhamel_consistency",
    "classify",
    "theorem41_margin_scan",
    "power_profile",
    "bubble_profile",
    "make_profile",
]
