"""Certified upper bounds on the axis speed of the Eden model (first-passage
percolation with Exp(1) passage times) by the unidirectional-infection
recursion, and comparison with the diagonal lower bound."""

from .config import BoxConfig
from .diagonal import DIAG_CONSTANT, diag_lower_bound
from .gamma_min import GammaMinQuery, gamma_min_expectation
from .level1 import BoundTable1D, compute_level1_table, level1_mu_bound
from .leveln import (assemble_boundary, bound_chain, compute_chain, compute_leveln_table,
                     recursion_step, tau_upper_bound)
from .perimeter import forward_edge_lower_bound, perimeter_lower_bound
from .tables import BoundTableND

__version__ = "0.1.0"

__all__ = [
    "BoundTable1D", "BoundTableND", "BoxConfig", "DIAG_CONSTANT", "GammaMinQuery",
    "assemble_boundary", "bound_chain", "compute_chain", "compute_level1_table",
    "compute_leveln_table", "diag_lower_bound", "forward_edge_lower_bound",
    "gamma_min_expectation", "level1_mu_bound", "perimeter_lower_bound", "recursion_step",
    "tau_upper_bound",
]
