"""Scattered q-polynomials psi_(h,t), their MRD codes and linear sets, with exhaustive checkers."""

from .errors import ClaimCheckError, GuardRailError
from .family import InadmissibleError, check_h, psi
from .gf import FieldCtx, admissible_h, make_field_ctx
from .linpoly import LinPoly
from .scatter import LinearSet, is_scattered, linear_set

__version__ = "0.1.0"

__all__ = [
    "ClaimCheckError",
    "FieldCtx",
    "GuardRailError",
    "InadmissibleError",
    "LinPoly",
    "LinearSet",
    "admissible_h",
    "check_h",
    "is_scattered",
    "linear_set",
    "make_field_ctx",
    "psi",
]
