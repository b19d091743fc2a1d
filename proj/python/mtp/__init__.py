"""Riesz-energy dimension bounds for limsup sets on the torus."""

from ._core import (
    EstimatorFailure,
    InvalidArgument,
    LimsupFamily,
    Shape,
    bound_energy_ratio,
    bound_singular_value,
    covering_counts,
    dimension_formula_D,
    energy_set,
    find_truncation,
    intersection_experiment,
    interval_energy,
    make_affine_family,
    make_diophantine,
    make_random_balls,
    make_shrunken_balls,
    singular_value_fn,
    vitali_select,
)

__all__ = [
    "EstimatorFailure",
    "InvalidArgument",
    "LimsupFamily",
    "Shape",
    "bound_energy_ratio",
    "bound_singular_value",
    "covering_counts",
    "dimension_formula_D",
    "energy_set",
    "find_truncation",
    "intersection_experiment",
    "interval_energy",
    "make_affine_family",
    "make_diophantine",
    "make_random_balls",
    "make_shrunken_balls",
    "singular_value_fn",
    "vitali_select",
]
