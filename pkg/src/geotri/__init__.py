"""Balanced geodesic triangulations of a closed genus-2 hyperbolic surface."""

from .surface import build_genus2
from .triangulation import build_base_triangulation, is_embedded, theta_min
from .tutte import mean_value_weights, solve_balanced, uniform_weights

__all__ = [
    "build_genus2",
    "build_base_triangulation",
    "is_embedded",
    "theta_min",
    "mean_value_weights",
    "solve_balanced",
    "uniform_weights",
]
