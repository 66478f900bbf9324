"""Numerics for the Mobius-invariant N_p spaces on the unit ball of C^n."""

from .carleson import CarlesonReport, TubeGrid, carleson_constant, carleson_transform, tube_measure, vanishing_test
from .functions import (
    BlackBox,
    GapSeries,
    HoloFunction,
    Polynomial,
    dilate,
    evaluate,
    kernel_function,
    multiply,
    truncate,
    weighted_compose,
)
from .gap import (
    GapSpec,
    equivalence_report,
    gap_aq_rhs,
    gap_dyadic_blocks,
    gap_np_rhs,
    gap_np_series_value,
    separation_witnesses,
)
from .geometry import (
    Automorphism,
    BoundaryError,
    DimensionError,
    NumericError,
    compose,
    composition_bound,
    kernel_eval,
    mobius_eval,
    mobius_factor,
)
from .integrate import QuadSpec, ball_integral, kernel_integral, np_integral, sphere_kernel_integral
from .norms import (
    NormEstimate,
    SearchSpec,
    composition_bound_check,
    isometry_residual,
    multiplier_check,
    norm_a2p,
    norm_bergman_type,
    norm_np,
    norm_sup,
    np0_test,
    small_p_estimate_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
