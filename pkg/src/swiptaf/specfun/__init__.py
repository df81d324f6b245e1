"""Gamma-family primitives and Mellin-Barnes evaluation of Fox H-functions."""

from .contour import kernel_factors, plan_contour
from .foxh import bivariate_fox_h, fox_h, incomplete_fox_h, plan_bivariate
from .gammafn import log_gamma_complex, loggamma, upper_incomplete_gamma
from .types import (
    BivariateHSpec,
    ContourPlan,
    GammaPair,
    GammaTriple,
    HFunctionSpec,
    IncompleteHSpec,
    MetricResult,
)

__all__ = [
    "BivariateHSpec", "ContourPlan", "GammaPair", "GammaTriple", "HFunctionSpec",
    "IncompleteHSpec", "MetricResult", "bivariate_fox_h", "fox_h", "incomplete_fox_h",
    "kernel_factors", "log_gamma_complex", "loggamma", "plan_bivariate", "plan_contour",
    "upper_incomplete_gamma",
]
