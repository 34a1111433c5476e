"""hslab: a desk-scale numerical laboratory for Hamiltonian stationary
Lagrangian geometry in C^n.

Subpackages cover gradient-graph calculus, parametric immersions, the n=1
curve laboratory, the Lewy-Yuan rotation, a solver for the stationarity
equation via its second-order splitting, and varifold diagnostics.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    curve_lab,
    diagnostics,
    graph_calculus,
    immersion_calculus,
    kernels,
    rotation,
    solver,
)
