"""Verification toolkit for glued approximately-Einstein metrics on cyclic
branched covers of hyperbolic manifolds.

The heavy lifting lives in the C++ extension ``einglue._core``; this package
re-exports its public surface.
"""

from ._core import (  # noqa: F401
    __version__,
    eval_model_profile,
    a_max_and_v,
    largest_root,
    cone_angle,
    solve_cone_angle,
    Profile,
    hyperbolic_profile,
    model_profile,
    glued_profile,
    frame_curvature,
    curvature_scan,
    region_volume,
    error_support_check,
    error_sup_norm,
    decay_exponent_fit,
    negativity_certificate,
    cutoff_shape_constants,
    derive_parameters,
    l2_bound_chain,
    l2_numeric,
    scenario_report,
    convergence_table,
    linearization_selftest,
)
