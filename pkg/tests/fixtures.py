"""Shared constructions for the worked quartics and small oracles."""

import sys, os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fractions import Fraction

from tropcover.exactnum import QQ, Poly, tower_of
from tropcover.p1_models import InputCurve
from tropcover.series import LaurentSeries, RamifiedParam

PARAM_T = RamifiedParam("t", 1)


def tpoly(k, spec):
    """spec: dict t-exponent -> rational."""
    return LaurentSeries(k, PARAM_T,
                         {Fraction(e): k.coerce(Fraction(c))
                          for e, c in spec.items()})


def main_example_curve():
    """The smooth plane quartic with the degree-12 discriminant table,
    dehomogenized at Z = 1 with the covering (x, y) -> x."""
    k = tower_of(QQ)
    T = {
        (4, 0): {22: 1},
        (3, 1): {14: 1},
        (3, 0): {8: 1},
        (2, 2): {10: 1},
        (2, 1): {16: 1},
        (2, 0): {0: 1, 6: 1},
        (1, 3): {4: 1},
        (1, 2): {12: 1, 0: -2},
        (1, 1): {16: 1},
        (1, 0): {8: 1},
        (0, 4): {2: 1, 0: 1},
        (0, 3): {4: 1},
        (0, 2): {10: 1},
        (0, 1): {14: 1},
        (0, 0): {22: 1},
    }
    return InputCurve({ij: tpoly(k, sp) for ij, sp in T.items()}, k)


def hannah_example_curve():
    """The Mumford-curve quartic (already rescaled so all radii are
    integers: the parameter here is t with t_scaled = t^6)."""
    k = tower_of(QQ)
    T = {
        (4, 0): {144: 1},
        (2, 2): {0: -1},
        (1, 3): {48: 1},
        (0, 4): {108: 1},
        (2, 1): {0: -2},
        (1, 2): {18: 1},
        (0, 3): {72: 1},
        (2, 0): {24: -1, 0: 1},
        (1, 1): {0: 1},
        (0, 2): {48: 1},
        (1, 0): {36: 1},
        (0, 1): {66: 1},
        (0, 0): {108: 1},
    }
    return InputCurve({ij: tpoly(k, sp) for ij, sp in T.items()}, k)


def good_reduction_hyperelliptic():
    """y^2 - (x-1)(x-2)(x-3)(x-4) over Q((t)): good reduction, genus 1."""
    k = tower_of(QQ)
    # (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24
    T = {
        (0, 2): {0: 1},
        (4, 0): {0: -1},
        (3, 0): {0: 10},
        (2, 0): {0: -35},
        (1, 0): {0: 50},
        (0, 0): {0: -24},
    }
    return InputCurve({ij: tpoly(k, sp) for ij, sp in T.items()}, k)
