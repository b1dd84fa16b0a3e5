"""Exact computational models for equivariant Floer cohomology.

The engine works over a prime field (characteristic 2 by default) and covers
Schubert-cell Morse models of classifying-space towers, bigraded family Morse
complexes, spectral sequences of filtered complexes, limit and telescope
constructions, and the conic-fibration local Floer models.
"""

__version__ = "0.1.0"
