"""Symmetry-reduced helical Navier-Stokes and Euler solvers on the unit disk.

The package integrates the three-component reduced equations on a polar
grid (Fourier in the angle, finite volumes in radius), corrects planar
initial data onto the pitch-dependent constraint class, lifts reduced
fields back to helical 3D velocity fields, and ships a sweep harness that
measures the planar-limit convergence rates.
"""

__version__ = "0.1.0"

from .grid import (DiskGrid, ScalarField, VectorField3, build_grid,
                   l2_inner, lp_norm, scalar_from_function,
                   vector_from_functions)
from .operators import PLANAR, SigmaParam

__all__ = [
    "DiskGrid", "ScalarField", "VectorField3", "build_grid", "l2_inner",
    "lp_norm", "scalar_from_function", "vector_from_functions",
    "PLANAR", "SigmaParam", "__version__",
]
