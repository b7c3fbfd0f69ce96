"""Numerics for random Schrodinger operators on Sierpinski gasket graphs.

Builds finite gasket subgraphs, assembles Anderson Hamiltonians under
several boundary conditions, computes spectra and eigenvalue counting
functions, reproduces the exact free-Laplacian spectrum by preimage
iteration, estimates the integrated density of states by Monte Carlo, and
mechanically verifies the finite-dimensional counting inequalities that
back those computations.
"""

from . import decimation, ids, lattice, operators, spectra
from .errors import CapacityError, InsufficientDataError, ValidationError

__all__ = [
    "lattice",
    "operators",
    "spectra",
    "decimation",
    "ids",
    "CapacityError",
    "InsufficientDataError",
    "ValidationError",
]

__version__ = "0.1.0"
