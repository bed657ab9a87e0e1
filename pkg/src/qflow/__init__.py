"""Relaxed Landau-de Gennes Q-tensor gradient flow and its harmonic map limit."""

__version__ = "0.1.0"

from .algebra import QTensor, eig_sym3, from_matrix, to_components, to_matrix, uniaxial
from .fields import DirectorField, Grid, QField
from .manifold import MaterialParams, bulk_energy, bulk_force_J, dist_to_N, project_to_N, s_plus
from .run import Run, simulate
from .solver import SolverConfig, initial_circle_map, initial_from_director, max_stable_dt
