"""Exact-arithmetic toolkit for rank-6 modular data with an order-3 Galois
column symmetry: polynomial and cyclotomic scalars, a degree-capped Groebner
saturation engine, a modular-data verifier, and the elimination pipeline."""

from .poly import Poly, VarRegistry, parse_poly, poly_arith, poly_reduce
from .cyclotomic import (Cyclotomic, cyc_arith, cyc_conj, cyc_embed,
                         cyc_galois, cyc_make, cyc_min_poly)
from .groebner import (IdealSpec, ResourceBudgetExceeded, SaturationTrace,
                       buchberger_capped, divide_out_atoms, s_polynomial,
                       saturation_loop)

__all__ = [
    "Poly", "VarRegistry", "parse_poly", "poly_arith", "poly_reduce",
    "Cyclotomic", "cyc_arith", "cyc_conj", "cyc_embed", "cyc_galois",
    "cyc_make", "cyc_min_poly",
    "IdealSpec", "ResourceBudgetExceeded", "SaturationTrace",
    "buchberger_capped", "divide_out_atoms", "s_polynomial",
    "saturation_loop",
]
