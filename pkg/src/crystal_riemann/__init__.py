"""Crystallographic Riemann surfaces generated by conformal maps of right triangles.

The seven discrete surfaces, their lattices, and their planar sections.
"""
from .classify import SurfaceDescriptor, classify_all
from .cyclotomic import CycNum
from .isometry import Isometry, SurfaceParams
from .lattice import LatticeBasis, RootLatticeId, lattice_basis
from .scmap import SCMapContext, context_for
from .sections import SectionPointSet, analytic_section, model_section

__all__ = [
    "CycNum",
    "Isometry",
    "SurfaceParams",
    "LatticeBasis",
    "RootLatticeId",
    "lattice_basis",
    "SurfaceDescriptor",
    "classify_all",
    "SCMapContext",
    "context_for",
    "SectionPointSet",
    "analytic_section",
    "model_section",
]
