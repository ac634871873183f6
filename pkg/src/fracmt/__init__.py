"""Fractional Sobolev seminorms and Moser-Trudinger functionals in one
dimension for the critical pair s * p = 1."""

from .constants import ConstantsReport, Params, alpha_star, dirichlet_lambda, gamma_fn, gamma_s
from .errors import AccuracyError, FracMTError, InputError
from .function_models import (
    GridFunction,
    MoserFunction,
    full_norm_p,
    lp_norm_p,
    moser_eval,
    moser_nodes,
    sample_to_grid,
)
from .mt_functional import (
    MTConfig,
    RufSplit,
    concentration_fn_check,
    extremal_search,
    mt_integral,
    ruf_split,
    sharpness_scan,
    truncated_exp,
)
from .quadrature import QuadratureSpec
from .rearrangement import RearrangedPair, equimeasurability_check, polya_szego_gap, rearrange
from .reports import ScanReport, emit_report
from .seminorm import (
    DecompositionReport,
    embedding_ratio,
    gagliardo_p,
    gagliardo_p_pl,
    gagliardo_p_radial,
    moser_decomposition,
    rate_check,
    tail_bound_check,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConstantsReport",
    "DecompositionReport",
    "FracMTError",
    "GridFunction",
    "InputError",
    "MTConfig",
    "MoserFunction",
    "Params",
    "QuadratureSpec",
    "RearrangedPair",
    "RufSplit",
    "ScanReport",
    "alpha_star",
    "concentration_fn_check",
    "dirichlet_lambda",
    "embedding_ratio",
    "emit_report",
    "equimeasurability_check",
    "extremal_search",
    "full_norm_p",
    "gagliardo_p",
    "gagliardo_p_pl",
    "gagliardo_p_radial",
    "gamma_fn",
    "gamma_s",
    "lp_norm_p",
    "moser_decomposition",
    "moser_eval",
    "moser_nodes",
    "mt_integral",
    "polya_szego_gap",
    "rate_check",
    "rearrange",
    "ruf_split",
    "sample_to_grid",
    "sharpness_scan",
    "tail_bound_check",
    "truncated_exp",
]
