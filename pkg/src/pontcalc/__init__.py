"""Combinatorial Pontrjagin classes from oriented-matroid charts on triangulated manifolds."""

__version__ = "0.1.0"
