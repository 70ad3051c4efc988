"""Scalars, parameters, the graded fixed-point space and series arithmetic."""

from .linalg import gram_rank, inverse, null_vector
from .params import GenericityReport, ModelParams, make_params
from .scalars import Arith, absmax, arith, norm2, parse_complex
from .series import OperatorSeries, PowerSeries, q_pochhammer_inverse_series, q_pochhammer_series
from .space import (
    FixedPoint,
    GradedOperator,
    enumerate_fixed_points,
    graded_order,
    sector_index,
    sector_masks,
    sector_offset,
)
from .symfun import SymmetricFunctionSpec, elementary

__all__ = [
    "Arith", "FixedPoint", "GenericityReport", "GradedOperator", "ModelParams", "OperatorSeries",
    "PowerSeries", "SymmetricFunctionSpec", "absmax", "arith", "elementary", "enumerate_fixed_points",
    "graded_order", "gram_rank", "inverse", "make_params", "norm2", "null_vector", "parse_complex",
    "q_pochhammer_inverse_series", "q_pochhammer_series", "sector_index", "sector_masks", "sector_offset",
]
