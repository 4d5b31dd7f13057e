"""Symmetry breaking for unnamed types by delayed application on representations."""

from .groups import GenStrategy, SymCombo, TaggedPerm, generators, group_closure, orbits
from .parser import parse_model, print_model
from .pipeline import RunConfig, run_compare, run_solve, run_verify
from .refinery import AbstractModel, ConcreteModel, bibd_model, compile_model
from .reprs import (
    check_delayed_condition, concrete_type_of, parse_repr, phi, phi_inverse, rep_less,
    transform_concrete,
)
from .solver import solve_all
from .types import apply_symmetry, enumerate_values, static_less, typecheck

__version__ = "0.1.0"

__all__ = [
    "AbstractModel", "ConcreteModel", "GenStrategy", "RunConfig", "SymCombo", "TaggedPerm",
    "apply_symmetry", "bibd_model", "check_delayed_condition", "compile_model",
    "concrete_type_of", "enumerate_values", "generators", "group_closure", "orbits",
    "parse_model", "parse_repr", "phi", "phi_inverse", "print_model", "rep_less",
    "run_compare", "run_solve", "run_verify", "solve_all", "static_less",
    "transform_concrete", "typecheck",
]
