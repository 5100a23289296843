"""Exact integral affine geometry and Poisson-measure computations.

Submodules: ``exact``/``intmat``/``lattice`` (exact substrate), ``affine``
(Aff_Z groups), ``atlas`` (developing maps, holonomy), ``variation``,
``realization`` (period lattices), ``measure`` (Monte Carlo), ``cech``
(twisted Čech cohomology), ``cookbook`` and ``cli``.
"""
from .exact import ExactScalar, ExactVector, PeriodBasis
from .affine import AffineElement, GroupPresentation, analyze, compose, invert
from .lattice import ClosedSubgroup, Lattice

__version__ = "0.1.0"

__all__ = ["ExactScalar", "ExactVector", "PeriodBasis", "AffineElement", "GroupPresentation", "analyze",
           "compose", "invert", "ClosedSubgroup", "Lattice", "__version__"]
