"""Exact computation of tropical skeletons of tame coverings of P^1.

The package computes, for a bivariate polynomial f(x, y) over a discretely
valued field k0((t)), the weighted metric graph (skeleton) of the covering
(x, y) -> x together with its map onto a separating tree for the branch
locus, entirely in exact arithmetic.
"""

__version__ = "0.1.0"
