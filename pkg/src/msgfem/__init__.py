"""Multiscale spectral GFEM with full and ring-shaped local eigenproblems."""

__version__ = "0.1.0"

from .coefficients import CoefficientField, channel_field, constant_field, skyscraper_field
from .config import RunConfig, load_config
from .decomposition import Decomposition, build_decomposition, build_partition_of_unity
from .fem import FineProblem, Mesh, build_fine_problem, build_mesh
from .gfem import build_coarse_space, build_particular, coarse_solve, relative_energy_error
from .local import FULL, RING, EigenOptions, compute_particulars, compute_spectra, eigensolve
from .precond import build_preconditioner, gmres, richardson

__all__ = [
    "CoefficientField",
    "Decomposition",
    "EigenOptions",
    "FULL",
    "FineProblem",
    "Mesh",
    "RING",
    "RunConfig",
    "__version__",
    "build_coarse_space",
    "build_decomposition",
    "build_fine_problem",
    "build_mesh",
    "build_particular",
    "build_partition_of_unity",
    "channel_field",
    "coarse_solve",
    "compute_particulars",
    "compute_spectra",
    "constant_field",
    "eigensolve",
    "gmres",
    "load_config",
    "relative_energy_error",
    "richardson",
    "skyscraper_field",
]
