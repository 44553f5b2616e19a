# Init file for diracspec package

from .bcond import BoundaryMatrix, BcKind, classify, minors, unperturbed_spectrum, delta0, adjoint_bc, preset, read_boundary_matrix
from .potential import PotentialSpec, ZERO_POTENTIAL, POTENTIAL_PRESETS, build_mesh, gauge_reduce, read_potential, eval_potential, adjoint_potential
from .evolve import fundamental_matrix, fundamental_matrix_grid, fundamental_matrix_batch, liouville_det
from .chardet import char_matrix, char_det, char_det_batch
from .spectrum import EigenvalueRecord, Contour, compute_spectrum, adjoint_spectrum, count_zeros
from .resolvent import Grid, GridFunction, KernelMatrix, make_grid, green_kernel, green_kernel_super, kernel_matrix, apply_resolvent, spectral_projector, projector_deviation
from .basis import eigenfunction, eigenfunctions, biorthogonal_system, gram_matrix, bessel_ratio, projector_sum_norm, subspace_gram
from .error_handling import DiracError, ConfigError
