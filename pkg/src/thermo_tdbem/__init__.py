"""Laplace-domain boundary integral operators and convolution quadrature for thermoelastodynamics."""
from .material import Material, validate_material, derive_constants
from .kernels import LaplacePoint, fundamental_matrix, kernel_coeffs, wave_numbers
from .geometry import make_mesh
from .operators import Density, OperatorMatrix, assemble, solve_boundary_system
from .potentials import eval_potential, jumps
from .tdcq import CQConfig, Signal, TimeGrid, cq_convolve, cq_solve_bvp

__version__ = "0.1.0"
