"""Multivariable q-Racah polynomials and their limit families.

Exact rational and arbitrary-precision evaluation of polynomials, weights
and squared norms, plus a Gram-matrix engine that checks orthogonality
on the full lattice.
"""

from .multivar import FamilyMV, MultiIndex, ParamSetMV, eval_norm_mv, eval_poly_mv, eval_weight_mv
from .scalar import EXACT, RootParam, float_backend, get_backend
from .verify import check_identity, check_limit, gram, plan_truncation

__version__ = "0.1.0"

__all__ = [
    "EXACT",
    "FamilyMV",
    "MultiIndex",
    "ParamSetMV",
    "RootParam",
    "check_identity",
    "check_limit",
    "eval_norm_mv",
    "eval_poly_mv",
    "eval_weight_mv",
    "float_backend",
    "get_backend",
    "gram",
    "plan_truncation",
]
