"""Exact symbolic algebra: Laurent polynomials, rational functions, q-series."""

from .poly import (Poly, VarSpace, space, K_SPACE, K2_SPACE, K1_SPACE,
                   COH_SPACE, COH2_SPACE, REF_SPACE, KAPPA_SPACE, B_SPACE)
from .ratfunc import RationalFunction, Factor, EpsSeries, canonical, rf_sum
from .series import QSeries, FractionRing, RFRing, FRACTIONS, geometric_inverse
from .characters import VirtualCharacter, bracket, linear_euler

__all__ = [
    "Poly", "VarSpace", "space", "K_SPACE", "K2_SPACE", "K1_SPACE",
    "COH_SPACE", "COH2_SPACE", "REF_SPACE", "KAPPA_SPACE", "B_SPACE",
    "RationalFunction", "Factor", "EpsSeries", "canonical", "rf_sum",
    "QSeries", "FractionRing", "RFRing", "FRACTIONS", "geometric_inverse",
    "VirtualCharacter", "bracket", "linear_euler",
]
