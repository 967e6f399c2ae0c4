"""Batch figure rendering for the helical-solver sweep CSV outputs."""

__version__ = "0.1.0"

from .figures import plot_convergence, plot_energy
from .tables import read_table

__all__ = ["plot_convergence", "plot_energy", "read_table", "__version__"]
