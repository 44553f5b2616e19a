import argparse
import math
import sys
from dataclasses import dataclass, asdict, fields, replace

import numpy as np

from .basis import (basis_grid, bessel_ratio, biorthogonal_system, biorthogonality_error, eigenfunctions,
                    expansion_residual, gram_matrix, integer_lattice, subspace_gram, tau_variation)
from .bcond import classify, read_boundary_matrix, require_regular, unperturbed_spectrum
from .chardet import char_det, delta_grid
from .error_handling import ConfigError, DiracError, print_debug, print_error
from .evolve import fundamental_matrix
from .jsonio import dumps_json, format_float, load_json, pair_to_complex, save_csv, save_json, write_csv
from .potential import build_mesh, gauge_reduce, read_potential
from .resolvent import GRID_KINDS, GridFunction, green_rows, kernel_matrix, make_grid, offset_grids, spectral_projector
from .selftest import run_selftest
from .settings import DEFAULT_MESH_CELLS, DEFAULT_MESH_TOL, GLOBAL_DEBUG, NEWTON_RESIDUAL_TOL, PROJECTOR_TOL
from .spectrum import CSV_HEADER, adjoint_spectrum, compute_spectrum, lattice_for, strip_width

GREEN_HEADER = ["t", "x", "re_g11", "im_g11", "re_g12", "im_g12", "re_g21", "im_g21", "re_g22", "im_g22"]
CHARDET_HEADER = ["re", "im", "re_delta", "im_delta"]
TOLERANCE_KEYS = {"newton_residual": NEWTON_RESIDUAL_TOL, "projector": PROJECTOR_TOL}

FUNCTION_PRESETS = {
    "const": lambda x: np.vstack([np.ones_like(x), np.zeros_like(x)]),
    "smooth": lambda x: np.vstack([np.sin(x) ** 2, x * (math.pi - x) * np.cos(x)]),
    "both": lambda x: np.vstack([np.ones_like(x), np.ones_like(x)]),
}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a command needs besides its own flags. Read from a JSON object with exactly these keys (all optional),
    then overridden by command line flags.
    """
    bc: str | dict = "preset:separated"
    potential: str | dict = "preset:zero"
    mesh_cells: int = DEFAULT_MESH_CELLS
    mesh_tol: float = DEFAULT_MESH_TOL
    grid: str = "gauss"
    grid_nodes: int | None = None
    n_min: int = -10
    n_max: int = 10
    out: str | None = None
    force: bool = False
    tolerances: dict | None = None

    def __post_init__(self):
        if not isinstance(self.bc, (str, dict)):
            raise ConfigError("'bc' must be a preset reference, a file name or a boundary matrix object")
        if not isinstance(self.potential, (str, dict)):
            raise ConfigError("'potential' must be a preset reference, a file name or a potential object")
        for name in ("mesh_cells", "n_min", "n_max"):
            if not _is_int(getattr(self, name)):
                raise ConfigError(f"'{name}' must be an integer")
        if self.grid_nodes is not None and (not _is_int(self.grid_nodes) or self.grid_nodes < 1):
            raise ConfigError("'grid_nodes' must be a positive integer")
        if self.mesh_cells < 1:
            raise ConfigError("'mesh_cells' must be positive")
        if isinstance(self.mesh_tol, bool) or not isinstance(self.mesh_tol, (int, float)) or not 0 < self.mesh_tol < 1:
            raise ConfigError("'mesh_tol' must be a number in (0, 1)")
        if self.grid not in GRID_KINDS:
            raise ConfigError(f"'grid' must be one of {', '.join(GRID_KINDS)}")
        if self.n_min > self.n_max:
            raise ConfigError(f"Empty index range [{self.n_min}, {self.n_max}]")
        if self.out is not None and not isinstance(self.out, str):
            raise ConfigError("'out' must be a file name")
        if not isinstance(self.force, bool):
            raise ConfigError("'force' must be true or false")
        if self.tolerances is not None:
            if not isinstance(self.tolerances, dict):
                raise ConfigError(f"'tolerances' must be an object with the keys {', '.join(TOLERANCE_KEYS)}")
            unknown = set(self.tolerances) - set(TOLERANCE_KEYS)
            if unknown:
                raise ConfigError(f"Unknown tolerance keys {sorted(unknown)}")
            for key, value in self.tolerances.items():
                if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 < value < 1:
                    raise ConfigError(f"Tolerance '{key}' must be a number in (0, 1)")

    def tolerance(self, key: str) -> float:
        return (self.tolerances or {}).get(key, TOLERANCE_KEYS[key])

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("Run configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown configuration keys {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to a run configuration JSON file")
    common.add_argument("--bc", help="Boundary conditions: preset:<name> or path to a JSON file")
    common.add_argument("--potential", help="Potential: preset:<name> or path to a JSON file")
    common.add_argument("--mesh-cells", type=int, help="Number of uniform cells of the integration mesh")
    common.add_argument("--mesh-tol", type=float, help="Width of the first graded cell near a singular endpoint")
    common.add_argument("--grid", choices=GRID_KINDS, help="Quadrature grid for functions and kernels")
    common.add_argument("--grid-nodes", type=int, help="Number of grid nodes")
    common.add_argument("--n-min", type=int, help="Smallest eigenvalue index")
    common.add_argument("--n-max", type=int, help="Largest eigenvalue index")
    common.add_argument("--out", help="Output file, stdout if omitted")
    common.add_argument("--force", action="store_true", default=None, help="Force overwrite of output file if it exists")
    common.add_argument("--save-config", help="Write the effective run configuration to this JSON file")
    common.add_argument("--debug", action="store_true", help="Print debug information")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog="dirac", description="Spectral analysis of Dirac operators on [0, pi]")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("classify", parents=[common], help="Classify the boundary conditions")
    commands.add_parser("model-spectrum", parents=[common], help="Unperturbed eigenvalues of the boundary conditions")
    spectrum = commands.add_parser("spectrum", parents=[common], help="Eigenvalues as CSV")
    spectrum.add_argument("--adjoint", action="store_true", help="Spectrum of the adjoint operator")
    commands.add_parser("eigenfunctions", parents=[common], help="Normalized eigenfunctions on the grid as JSON")
    green = commands.add_parser("green", parents=[common], help="Green's kernel on a grid as CSV")
    green.add_argument("--lambda", dest="lam", required=True, help="Spectral parameter, e.g. 0.5+2i")
    projector = commands.add_parser("projector", parents=[common], help="Spectral projector kernel as JSON")
    projector.add_argument("--n", type=int, required=True, help="Group label of the projector")
    basis = commands.add_parser("basis", parents=[common], help="Gram matrix and basis diagnostics as JSON")
    basis.add_argument("--N", type=int, required=True, help="Truncation index")
    basis.add_argument("--f", default="preset:smooth", help="Function expanded for the residual: preset:<name>")
    bessel = commands.add_parser("bessel", parents=[common], help="Bessel ratio of a function")
    bessel.add_argument("--N", type=int, required=True, help="Truncation index")
    bessel.add_argument("--f", default="preset:const", help="Function: preset:<name>")
    bessel.add_argument("--lattice", choices=("spectrum", "integer"), default="spectrum",
                        help="Exponents: eigenvalues of the operator or the integers")
    commands.add_parser("gauge", parents=[common], help="Gauge reduction of a diagonal potential")
    commands.add_parser("selftest", parents=[common], help="Run the closed-form oracle checks")
    chardet = commands.add_parser("chardet", parents=[common], help="Characteristic determinant")
    where = chardet.add_mutually_exclusive_group(required=True)
    where.add_argument("--lambda", dest="lam", help="Single spectral parameter, dumps M, Delta and E(pi) as JSON")
    where.add_argument("--lambda-grid", help="re0:re1:n,im0:im1:m, Delta on the grid as CSV")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Run configuration from --config, overridden by the flags given on the command line.
    """
    config = RunConfig.from_json(load_json(args.config)) if args.config else RunConfig()
    overrides = {name: getattr(args, name) for name in ("bc", "potential", "mesh_cells", "mesh_tol", "grid",
                                                        "grid_nodes", "n_min", "n_max", "out", "force")
                 if getattr(args, name) is not None}
    return replace(config, **overrides)


def _function(source: str):
    if not source.startswith("preset:") or source[len("preset:"):] not in FUNCTION_PRESETS:
        raise ConfigError(f"Unknown function '{source}', known functions: "
                          f"{', '.join('preset:' + name for name in FUNCTION_PRESETS)}")
    return FUNCTION_PRESETS[source[len("preset:"):]]


def _linspace(text: str) -> np.ndarray:
    try:
        start, stop, count = text.split(":")
        return np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise ConfigError(f"Expected start:stop:count, got '{text}'") from None


def _emit_json(data, config: RunConfig, debug: bool) -> None:
    if config.out is None:
        print(dumps_json(data))
    else:
        save_json(data, config.out, force=config.force, debug=debug)


def _emit_csv(header: list[str], rows, config: RunConfig, debug: bool) -> None:
    if config.out is None:
        write_csv(sys.stdout, header, rows)
    else:
        save_csv(header, rows, config.out, force=config.force, debug=debug)


def _grid(config: RunConfig, n_max: int | None = None):
    if config.grid_nodes is None and n_max is not None and config.grid == "gauss":
        return basis_grid(n_max)
    return make_grid(config.grid, config.grid_nodes)


def _classify(config, U, P, args, debug):
    _emit_json(classify(U).to_json(), config, debug)


def _model_spectrum(config, U, P, args, debug):
    require_regular(U)
    model = unperturbed_spectrum(U)
    indices = range(config.n_min, config.n_max + 1)
    _emit_json({**model.to_json(), "eigenvalues": [{"n": n, "lambda0": model.lambda0(n)} for n in indices]},
               config, debug)


def _spectrum(config, U, P, args, debug):
    if args.adjoint:
        records = adjoint_spectrum(U, P, config.n_min, config.n_max, _mesh(config, P, debug), debug,
                                   config.tolerance("newton_residual"))
    else:
        records = compute_spectrum(U, P, config.n_min, config.n_max, _mesh(config, P, debug), debug,
                                   config.tolerance("newton_residual"))
    if debug:
        print_debug(f"Strip width of the computed eigenvalues: {format_float(strip_width(records))}")
    _emit_csv(CSV_HEADER, [r.to_row() for r in records], config, debug)


def _eigenfunctions(config, U, P, args, debug):
    mesh = _mesh(config, P, debug)
    records = compute_spectrum(U, P, config.n_min, config.n_max, mesh, debug, config.tolerance("newton_residual"))
    grid = _grid(config, max(abs(config.n_min), abs(config.n_max)))
    found = eigenfunctions(U, P, records, grid, mesh, debug)
    _emit_json({"grid": grid.to_json(),
                "eigenfunctions": [{**y.to_json(), "values": y.function.values} for y in found]}, config, debug)


def _green(config, U, P, args, debug):
    lam = pair_to_complex(args.lam)
    if config.grid == "trapezoid":
        t_grid, x_grid = offset_grids(config.grid_nodes or 64)
    else:
        t_grid = x_grid = make_grid(config.grid, config.grid_nodes or (65 if config.grid == "simpson" else 64))
    kernel = kernel_matrix(U, P, lam, t_grid, x_grid, _mesh(config, P, debug))
    _emit_csv(GREEN_HEADER, green_rows(kernel), config, debug)


def _projector(config, U, P, args, debug):
    mesh = _mesh(config, P, debug)
    grid = _grid(config, 2 * abs(args.n) + 1)
    kernel = spectral_projector(U, P, args.n, grid, mesh, debug, config.tolerance("projector"))
    unperturbed = spectral_projector(U, read_potential("preset:zero"), args.n, grid, debug=debug,
                                     tol=config.tolerance("projector"))
    _emit_json({**kernel.to_json(), "trace": kernel.weighted_trace(),
                "idempotency_error": (kernel.compose(kernel) - kernel).sup_norm(),
                "deviation": (kernel - unperturbed).sup_norm()}, config, debug)


def _basis(config, U, P, args, debug):
    if args.N < 0:
        raise ConfigError("--N must not be negative")
    mesh = _mesh(config, P, debug)
    grid = _grid(config, args.N)
    if lattice_for(U, P)[0].doubled:
        labels = range(-(args.N // 2), (args.N - 1) // 2 + 1)
        gram = subspace_gram(U, P, labels, grid, debug=debug)
        _emit_json({"mode": "subspace", "labels": list(labels), "gram": gram.to_json()}, config, debug)
        return
    records = compute_spectrum(U, P, -args.N, args.N, mesh, debug, config.tolerance("newton_residual"))
    ys = eigenfunctions(U, P, records, grid, mesh, debug)
    ws = biorthogonal_system(U, P, ys, debug=debug)
    f = _function(args.f)
    _emit_json({"mode": "eigenfunctions", "N": args.N, "gram": gram_matrix(ys).to_json(),
                "biorthogonality_error": biorthogonality_error(ys, ws),
                "expansion_residual": expansion_residual(U, P, f, args.N, grid, mesh, debug),
                "tau_variation": tau_variation(ys)}, config, debug)


def _bessel(config, U, P, args, debug):
    if args.N < 0:
        raise ConfigError("--N must not be negative")
    grid = _grid(config, args.N)
    f = GridFunction.from_callable(_function(args.f), grid)
    if args.lattice == "integer":
        eigenvalues = integer_lattice(args.N)
    else:
        eigenvalues = compute_spectrum(U, P, -args.N, args.N, _mesh(config, P, debug), debug,
                                       config.tolerance("newton_residual"))
    _emit_json({"N": args.N, "lattice": args.lattice, "ratio": bessel_ratio(f, eigenvalues, args.N)}, config, debug)


def _gauge(config, U, P, args, debug):
    result = gauge_reduce(P, U)
    _emit_json({"gamma": result.gamma, "boundary": result.boundary.to_json(),
                "potential": result.potential.to_json(), "kind": classify(result.boundary).to_json()}, config, debug)


def _chardet(config, U, P, args, debug):
    mesh = _mesh(config, P, debug)
    if args.lam is not None:
        lam = pair_to_complex(args.lam)
        evaluation = char_det(U, P, lam, mesh, debug=debug)
        E = fundamental_matrix(P, mesh, lam, math.pi).E
        _emit_json({**evaluation.to_json(), "E_pi": E}, config, debug)
        return
    try:
        re_text, im_text = args.lambda_grid.split(",")
    except ValueError:
        raise ConfigError(f"Expected re0:re1:n,im0:im1:m, got '{args.lambda_grid}'") from None
    _emit_csv(CHARDET_HEADER, delta_grid(U, P, _linspace(re_text), _linspace(im_text), mesh), config, debug)


def _mesh(config: RunConfig, P, debug: bool):
    return build_mesh(P, config.mesh_tol, config.mesh_cells, debug)


HANDLERS = {"classify": _classify, "model-spectrum": _model_spectrum, "spectrum": _spectrum,
            "eigenfunctions": _eigenfunctions, "green": _green, "projector": _projector, "basis": _basis,
            "bessel": _bessel, "gauge": _gauge, "chardet": _chardet}


def run(argv: list[str] | None = None) -> int:
    """
    Parses the command line, runs one command and returns the exit code: 0 on success, 2 on invalid input and 3 on
    a numerical failure.
    :param argv: Arguments without the program name, sys.argv[1:] if omitted
    :type argv: list[str] | None
    :return: Exit code
    :rtype: int
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    debug = args.debug or GLOBAL_DEBUG
    try:
        config = resolve_config(args)
        if args.save_config:
            save_json(config.to_json(), args.save_config, force=config.force, debug=debug)
        if args.command == "selftest":
            return 0 if run_selftest(debug) == 0 else 3
        U = read_boundary_matrix(config.bc)
        P = read_potential(config.potential)
        HANDLERS[args.command](config, U, P, args, debug)
    except ConfigError as e:
        return print_error(f"ConfigError: {e}", 2)
    except DiracError as e:
        return print_error(f"{type(e).__name__}: {e}", 3)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
