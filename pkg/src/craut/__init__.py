"""Graded Lie algebras of infinitesimal automorphisms of weighted homogeneous CR models."""

from .core import Poly, Space, VarTable, param_space, parse_poly
from .liealg import AlgebraConfig, GradedAlgebra, VectorField, compute_component, compute_full_algebra, lie_bracket
from .model import CRModel, builtin_model, builtin_model_names, load_model, validate_model

__all__ = [
    "Poly",
    "Space",
    "VarTable",
    "param_space",
    "parse_poly",
    "AlgebraConfig",
    "GradedAlgebra",
    "VectorField",
    "compute_component",
    "compute_full_algebra",
    "lie_bracket",
    "CRModel",
    "builtin_model",
    "builtin_model_names",
    "load_model",
    "validate_model",
]
