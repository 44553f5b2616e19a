import os

import psutil

GLOBAL_DEBUG = False  # If True, prints debug information, default is False

DEFAULT_MESH_CELLS = 1024  # Number of uniform cells of the integration mesh, default is 1024
DEFAULT_MESH_TOL = 1e-8  # Target width parameter of the first graded cell near a singular endpoint
DEFAULT_GRID_NODES = 512  # Uniform trapezoid grid for grid functions, default is 512
DEFAULT_GAUSS_NODES = 256  # Gauss-Legendre grid used by projectors and basis diagnostics, default is 256
DEFAULT_REDUCED_SAMPLES = 4096  # Samples of the gauge phase of reduced potentials, default is 4096
MAX_BATCH_ENTRIES = 1 << 21  # Upper bound on lambda values times mesh cells held in memory at once

RANK_TOL = 1e-10  # Relative tolerance for rank and regularity decisions
ZERO_SYSTEM_TOL = 1e-8  # Relative threshold for a numerically zero 2x2 system matrix
SEMISIMPLE_TOL = 1e-5  # Relative size of M(lam) at a computed double eigenvalue still counted as semisimple
ROOT_RESIDUAL_TOL = 1e-12  # Residual of the roots of the characteristic quadratic
DET_DRIFT_TOL = 1e-6  # Allowed deviation of det E from its expected value
SERIES_THRESHOLD = 1e-2  # |s| below which the cell exponential switches to its Taylor series

ZERO_ON_CONTOUR_TOL = 1e-12  # min |Delta| / max |Delta| on a contour below which a zero is assumed on it
WINDING_INTEGER_TOL = 1e-3  # Maximal distance of a winding number to the nearest integer
MAX_CONTOUR_NODES = 1 << 16  # Node cap of the adaptive winding number, default is 2^16
MIN_CONTOUR_NODES = 64
NEWTON_MAX_ITERS = 50
NEWTON_STEP_TOL = 1e-14
NEWTON_RESIDUAL_TOL = 1e-14
MULTIPLICITY_RADIUS = 1e-4  # Radius of the disk used to count multiplicities
MAX_SWEEP_GROUPS = 64  # Growth limit of the central rectangle sweep

NEAR_EIGENVALUE_TOL = 1e-6  # |Delta| <= tol * |Delta'| counts as an eigenvalue hit
PROJECTOR_START_NODES = 64  # Initial trapezoid nodes on a projector circle
PROJECTOR_TOL = 1e-8  # Stopping change of the projector kernel under node doubling
PROJECTOR_MAX_NODES = 1024
CONTOUR_SEPARATION = 1e-3  # Minimal distance of eigenvalues to a projector contour

PAIRING_TOL = 1e-8  # |<y_n, z_n>| below this signals mis-paired indices
ZERO_FUNCTION_TOL = 1e-14

FLOAT_DIGITS = 17  # Significant digits of every emitted float


# ---------------------------------------------Automatic Settings-------------------------------------------------------

if os.environ.get("DIRAC_DEBUG", "") not in ("", "0"):
    GLOBAL_DEBUG = True


def max_workers() -> int:
    """
    Number of worker processes allowed for parallel evaluation, read from DIRAC_THREADS and capped by the CPU count.
    Unset, invalid or non-positive values mean serial evaluation.
    :return: Number of workers, at least 1
    :rtype: int
    """
    raw = os.environ.get("DIRAC_THREADS", "")
    try:
        requested = int(raw)
    except ValueError:
        return 1
    cpus = psutil.cpu_count(logical=True) or 1
    return max(1, min(requested, cpus))
