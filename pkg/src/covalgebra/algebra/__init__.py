"""Exact arithmetic: number fields, Laurent polynomials, linear algebra."""
from .laurent import LaurentPoly, is_unit, log_derivative, coordinate_derivation
from .linalg import (Frac, FractionMatrix, LinearSolution, det, rank, solve_linear, solve_laurent,
                     field_kernel, field_rank, field_solve, inverse_laurent)
from .numberfield import (FieldElem, NumberField, cyclotomic_field, cyclotomic_poly, embed,
                          rational_field, parse_field)
from .upoly import UPoly, charpoly, factor, roots_in_field, upoly_gcd

__all__ = [
    "LaurentPoly", "is_unit", "log_derivative", "coordinate_derivation",
    "Frac", "FractionMatrix", "LinearSolution", "det", "rank", "solve_linear", "solve_laurent",
    "field_kernel", "field_rank", "field_solve", "inverse_laurent",
    "FieldElem", "NumberField", "cyclotomic_field", "cyclotomic_poly", "embed", "rational_field",
    "parse_field", "UPoly", "charpoly", "factor", "roots_in_field", "upoly_gcd",
]
