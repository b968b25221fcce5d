"""Numerical laboratory for approximate cubic derivations on finite-dimensional
Banach algebras: exact maps, residuals, dyadic recovery, and certified bounds."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraSpec,
    BimoduleSpec,
    Element,
    build_triangular_example,
    builtin,
    matrix_algebra,
    scalar_algebra,
    validate_algebra,
)
from .control import ControlFunction, measure_delta, tilde_series_backward, tilde_series_forward  # noqa: E402
from .maps import MapExpr, PerturbationSpec, residual_sweep  # noqa: E402
from .probes import make_probes  # noqa: E402
from .recover import direct_backward, direct_forward, fixed_point_recover, uniqueness_check  # noqa: E402

__all__ = [
    "AlgebraSpec", "BimoduleSpec", "Element", "build_triangular_example", "builtin",
    "matrix_algebra", "scalar_algebra", "validate_algebra", "ControlFunction", "measure_delta",
    "tilde_series_backward", "tilde_series_forward", "MapExpr", "PerturbationSpec",
    "residual_sweep", "make_probes", "direct_backward", "direct_forward",
    "fixed_point_recover", "uniqueness_check",
]
