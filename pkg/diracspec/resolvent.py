"""
Resolvent R(lam) = (l_P - lam)^{-1} as an integral operator with Green's kernel

    G(t, x, lam) = E(x) [M^{-1} C - chi_{t > x}] E^{-1}(t) B^{-1},

its application to grid functions and the Riesz projectors -1/(2 pi i) integral of R(lam) over a circle.
Kernel blocks are stored with the x index first: blocks[j, i] = G(t_i, x_j).
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np
from pympler import asizeof
from scipy.integrate import cumulative_simpson, cumulative_trapezoid
from scipy.interpolate import make_interp_spline
from scipy.linalg import svdvals

from .bcond import BoundaryMatrix, minors, require_regular
from .error_handling import NearEigenvalue, ContourSeparationFailure, ConfigError, print_debug, print_warning
from .evolve import propagate_end, propagate_grid, adjugate, det2, liouville_det
from .potential import PotentialSpec, Mesh, build_mesh, ZERO_POTENTIAL
from .settings import (GLOBAL_DEBUG, DEFAULT_GRID_NODES, DEFAULT_GAUSS_NODES, NEAR_EIGENVALUE_TOL,
                       PROJECTOR_START_NODES, PROJECTOR_TOL, PROJECTOR_MAX_NODES, CONTOUR_SEPARATION)
from .spectrum import compute_spectrum, group_of

B_INV = np.diag([1j, -1j])
_SIGN = np.diag([1.0, -1.0]).astype(complex)
GRID_KINDS = ("trapezoid", "simpson", "gauss", "midpoint")


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    @property
    def size(self) -> int:
        return self.nodes.size

    def same_as(self, other: "Grid") -> bool:
        return self is other or (self.kind == other.kind and self.size == other.size
                                 and np.array_equal(self.nodes, other.nodes))

    def to_json(self) -> dict:
        return {"kind": self.kind, "nodes": self.nodes, "weights": self.weights}


def make_grid(kind: str = "trapezoid", nodes: int | None = None) -> Grid:
    """
    Quadrature grid on [0, pi].
    :param kind: "trapezoid" (uniform with end points), "simpson" (the same nodes with composite Simpson weights, odd
        node count), "gauss" (Gauss-Legendre) or "midpoint" (uniform, offset by half a step from the trapezoid grid
        with one node more)
    :type kind: str
    :param nodes: Number of nodes, the module default of the kind if omitted
    :type nodes: int | None
    :return: Nodes and weights
    :rtype: Grid
    """
    if kind == "trapezoid":
        count = DEFAULT_GRID_NODES if nodes is None else int(nodes)
        if count < 2:
            raise ConfigError("A trapezoid grid needs at least 2 nodes")
        xs = np.linspace(0.0, math.pi, count)
        weights = np.full(count, math.pi / (count - 1))
        weights[[0, -1]] *= 0.5
        return Grid(xs, weights, kind)
    if kind == "simpson":
        count = DEFAULT_GRID_NODES + 1 if nodes is None else int(nodes)
        if count < 3 or count % 2 == 0:
            raise ConfigError(f"A Simpson grid needs an odd number of at least 3 nodes, got {count}")
        xs = np.linspace(0.0, math.pi, count)
        weights = np.where(np.arange(count) % 2 == 1, 4.0, 2.0)
        weights[[0, -1]] = 1.0
        return Grid(xs, weights * math.pi / (3 * (count - 1)), kind)
    if kind == "gauss":
        count = DEFAULT_GAUSS_NODES if nodes is None else int(nodes)
        if count < 1:
            raise ConfigError("A Gauss grid needs at least 1 node")
        t, w = np.polynomial.legendre.leggauss(count)
        return Grid(0.5 * math.pi * (t + 1), 0.5 * math.pi * w, kind)
    if kind == "midpoint":
        count = DEFAULT_GRID_NODES - 1 if nodes is None else int(nodes)
        if count < 1:
            raise ConfigError("A midpoint grid needs at least 1 node")
        h = math.pi / count
        return Grid((np.arange(count) + 0.5) * h, np.full(count, h), kind)
    raise ConfigError(f"Unknown grid kind '{kind}', known kinds: {', '.join(GRID_KINDS)}")


def offset_grids(nodes: int = DEFAULT_GRID_NODES) -> tuple[Grid, Grid]:
    """
    A trapezoid t-grid and a midpoint x-grid whose nodes never coincide, so the kernel jump at t = x is never sampled.
    """
    return make_grid("trapezoid", nodes), make_grid("midpoint", nodes - 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (2, self.grid.size):
            raise ConfigError(f"Grid function needs shape (2, {self.grid.size}), got {self.values.shape}")

    @classmethod
    def from_callable(cls, func, grid: Grid) -> "GridFunction":
        return cls(grid, np.asarray(func(grid.nodes), dtype=complex).reshape(2, grid.size))

    def inner(self, other: "GridFunction") -> complex:
        """
        <f, g> = integral of f1 conj(g1) + f2 conj(g2).
        """
        return complex(np.sum(self.grid.weights * np.sum(self.values * np.conj(other.values), axis=0)))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, factor: complex) -> "GridFunction":
        return GridFunction(self.grid, self.values * factor)

    __rmul__ = __mul__

    def to_rows(self) -> list[list[float]]:
        return [[float(x), v1.real, v1.imag, v2.real, v2.imag]
                for x, v1, v2 in zip(self.grid.nodes, self.values[0], self.values[1])]


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    t_grid: Grid
    x_grid: Grid
    blocks: np.ndarray
    meta: dict = field(default_factory=dict)

    def operator_matrix(self) -> np.ndarray:
        """
        Matrix of the discretized operator acting on stacked values (node-major, component-minor).
        """
        nx, nt = self.x_grid.size, self.t_grid.size
        weighted = self.blocks * self.t_grid.weights[None, :, None, None]
        return weighted.transpose(0, 2, 1, 3).reshape(2 * nx, 2 * nt)

    def compose(self, other: "KernelMatrix") -> "KernelMatrix":
        """
        Kernel of self o other, (self o other)(t, x) = integral of self(s, x) other(t, s) ds.
        """
        if not self.t_grid.same_as(other.x_grid):
            raise ConfigError("Composition needs the inner grids to coincide")
        nx, nt = self.x_grid.size, other.t_grid.size
        product = self.operator_matrix() @ other.operator_matrix()
        blocks = product.reshape(nx, 2, nt, 2).transpose(0, 2, 1, 3) / other.t_grid.weights[None, :, None, None]
        return KernelMatrix(other.t_grid, self.x_grid, blocks)

    def apply(self, f: GridFunction) -> GridFunction:
        if not self.t_grid.same_as(f.grid):
            raise ConfigError("The function must live on the kernel's t-grid")
        values = np.einsum("jiab,i,bi->aj", self.blocks, self.t_grid.weights, f.values)
        return GridFunction(self.x_grid, values)

    def weighted_trace(self) -> complex:
        if not self.t_grid.same_as(self.x_grid):
            raise ConfigError("The trace needs equal t- and x-grids")
        diagonal = self.blocks[np.arange(self.t_grid.size), np.arange(self.t_grid.size)]
        return complex(np.sum(self.t_grid.weights * np.trace(diagonal, axis1=-2, axis2=-1)))

    def norm(self) -> float:
        """
        Operator norm on the discretized Hilbert space, the largest singular value of W_x^{1/2} K W_t^{-1/2}.
        """
        if self.blocks.size == 0:
            return 0.0
        left = np.repeat(np.sqrt(self.x_grid.weights), 2)
        right = np.repeat(1 / np.sqrt(self.t_grid.weights), 2)
        return float(svdvals(left[:, None] * self.operator_matrix() * right[None, :])[0])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.blocks))) if self.blocks.size else 0.0

    def _check_grids(self, other: "KernelMatrix") -> None:
        if not (self.t_grid.same_as(other.t_grid) and self.x_grid.same_as(other.x_grid)):
            raise ConfigError("Kernels live on different grids")

    def __add__(self, other: "KernelMatrix") -> "KernelMatrix":
        self._check_grids(other)
        return KernelMatrix(self.t_grid, self.x_grid, self.blocks + other.blocks)

    def __sub__(self, other: "KernelMatrix") -> "KernelMatrix":
        self._check_grids(other)
        return KernelMatrix(self.t_grid, self.x_grid, self.blocks - other.blocks)

    def to_json(self) -> dict:
        return {"t_grid": self.t_grid.to_json(), "x_grid": self.x_grid.to_json(), "blocks": self.blocks,
                "meta": self.meta}


def zero_kernel(grid: Grid) -> KernelMatrix:
    return KernelMatrix(grid, grid, np.zeros((grid.size, grid.size, 2, 2), dtype=complex))


@dataclass(frozen=True, eq=False)
class _GreenData:
    """
    lam-dependent factors of the kernel: M^{-1} C, E(pi), Delta.
    """
    lam: complex
    solve_c: np.ndarray
    E_pi: np.ndarray
    delta: complex


def _green_data(U: BoundaryMatrix, P: PotentialSpec, lam: complex, mesh: Mesh) -> _GreenData:
    require_regular(U)
    E, dE = propagate_end(P, mesh, np.array([lam]), with_derivative=True)
    M = U.C + U.D @ E[0]
    delta = complex(det2(M))
    d_delta = complex(np.trace(adjugate(M) @ (U.D @ dE[0])))
    if abs(delta) <= NEAR_EIGENVALUE_TOL * abs(d_delta):
        raise NearEigenvalue(f"lam = {lam} is within {abs(delta / d_delta):.3e} of an eigenvalue")
    return _GreenData(lam=complex(lam), solve_c=adjugate(M) @ U.C / delta, E_pi=E[0], delta=delta)


def _inverse_grid(P: PotentialSpec, E: np.ndarray, xs) -> np.ndarray:
    # E^{-1} as adjugate over the Liouville determinant
    return adjugate(E) / liouville_det(P, np.asarray(xs, dtype=float))[..., None, None]


def green_kernel(U: BoundaryMatrix, P: PotentialSpec, lam: complex, t: float, x: float,
                 mesh: Mesh | None = None) -> np.ndarray:
    """
    Green's kernel G(t, x, lam) = E(x) [M^{-1} C - chi_{t > x}] E^{-1}(t) B^{-1}; on the diagonal the t < x branch.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param lam: Spectral parameter away from the spectrum
    :type lam: complex
    :param t: Source point in [0, pi]
    :type t: float
    :param x: Observation point in [0, pi]
    :type x: float
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :return: 2x2 kernel value
    :rtype: np.ndarray
    """
    mesh = build_mesh(P) if mesh is None else mesh
    data = _green_data(U, P, lam, mesh)
    E, _ = propagate_grid(P, mesh, [lam], [x, t])
    E_x, E_t = E[0]
    inner = data.solve_c - (np.eye(2) if t > x else 0)
    return E_x @ inner @ _inverse_grid(P, E_t, t) @ B_INV


def green_kernel_super(U: BoundaryMatrix, P: PotentialSpec, lam: complex, t: float, x: float,
                       mesh: Mesh | None = None) -> np.ndarray:
    """
    Green's kernel through the minors of U:
    G = (J12 / Delta - chi_{t > x}) E(x) E^{-1}(t) B^{-1} + E(x) E^{-1}(pi) S K E^{-1}(t) B^{-1} / Delta
    with S = diag(1, -1) and K = [[J14, J24], [J13, J23]].
    """
    mesh = build_mesh(P) if mesh is None else mesh
    data = _green_data(U, P, lam, mesh)
    J = minors(U)
    K = np.array([[J.J14, J.J24], [J.J13, J.J23]], dtype=complex)
    E, _ = propagate_grid(P, mesh, [lam], [x, t])
    E_x, E_t = E[0]
    E_t_inv = _inverse_grid(P, E_t, t) @ B_INV
    E_pi_inv = _inverse_grid(P, data.E_pi, math.pi)
    scalar = J.J12 / data.delta - (1.0 if t > x else 0.0)
    return scalar * E_x @ E_t_inv + E_x @ E_pi_inv @ _SIGN @ K @ E_t_inv / data.delta


def kernel_matrix(U: BoundaryMatrix, P: PotentialSpec, lam: complex, t_grid: Grid | None = None,
                  x_grid: Grid | None = None, mesh: Mesh | None = None) -> KernelMatrix:
    """
    Green's kernel at every (t_i, x_j) pair of two grids.
    """
    t_grid = make_grid() if t_grid is None else t_grid
    x_grid = t_grid if x_grid is None else x_grid
    mesh = build_mesh(P) if mesh is None else mesh
    data = _green_data(U, P, lam, mesh)
    E_x, _ = propagate_grid(P, mesh, [lam], x_grid.nodes)
    E_t, _ = propagate_grid(P, mesh, [lam], t_grid.nodes)
    left = E_x[0]
    right = _inverse_grid(P, E_t[0], t_grid.nodes) @ B_INV
    jump = (t_grid.nodes[None, :] > x_grid.nodes[:, None])[..., None, None]
    blocks = (left @ data.solve_c)[:, None] @ right[None, :] - jump * (left[:, None] @ right[None, :])
    return KernelMatrix(t_grid, x_grid, blocks, meta={"lambda": data.lam})


def green_rows(kernel: KernelMatrix) -> list[list[float]]:
    """
    CSV rows t, x, then real and imaginary parts of g11, g12, g21, g22.
    """
    rows = []
    for j, x in enumerate(kernel.x_grid.nodes):
        for i, t in enumerate(kernel.t_grid.nodes):
            g = kernel.blocks[j, i].reshape(-1)
            rows.append([float(t), float(x)] + [v for z in g for v in (z.real, z.imag)])
    return rows


def _cumulative_integral(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    # integral from nodes[0] to every node along axis 0
    if nodes.size < 6:
        cumulative = cumulative_simpson if nodes.size >= 3 else cumulative_trapezoid
        return cumulative(values, x=nodes, axis=0, initial=0)
    antiderivative = make_interp_spline(nodes, values, k=5).antiderivative()
    return antiderivative(nodes) - antiderivative(nodes[0])


def apply_resolvent(U: BoundaryMatrix, P: PotentialSpec, lam: complex, f: GridFunction,
                    mesh: Mesh | None = None) -> GridFunction:
    """
    R(lam) f. On equispaced (trapezoid or Simpson) grids by variation of constants,
    Rf(x) = E(x) [M^{-1} C H(pi) - (H(pi) - H(x))] with
    H(x) = integral_0^x E^{-1}(t) B^{-1} f(t) dt accumulated by integrating a quintic interpolating spline (Simpson's
    rule below six nodes); on other grids by kernel quadrature.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param lam: Spectral parameter away from the spectrum
    :type lam: complex
    :param f: Right-hand side
    :type f: GridFunction
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :return: Rf on the grid of f
    :rtype: GridFunction
    """
    mesh = build_mesh(P) if mesh is None else mesh
    if f.grid.kind not in ("trapezoid", "simpson"):
        return kernel_matrix(U, P, lam, f.grid, f.grid, mesh).apply(f)
    data = _green_data(U, P, lam, mesh)
    nodes = f.grid.nodes
    E, _ = propagate_grid(P, mesh, [lam], nodes)
    E = E[0]
    integrand = np.einsum("nab,nb->na", _inverse_grid(P, E, nodes) @ B_INV, f.values.T)
    H = _cumulative_integral(integrand.real, nodes) + 1j * _cumulative_integral(integrand.imag, nodes)
    total = H[-1]
    coefficient = (data.solve_c @ total)[None, :] - (total[None, :] - H)
    values = np.einsum("nab,nb->an", E, coefficient)
    return GridFunction(f.grid, values)


def operator_residual(P: PotentialSpec, lam: complex, y: GridFunction, f: GridFunction) -> GridFunction:
    """
    (l_P - lam) y - f on the grid of y. y' is taken from quintic interpolating splines through the grid values, so
    the grid needs at least six nodes and no power channel may be singular at a node.
    :param P: Potential
    :type P: PotentialSpec
    :param lam: Spectral parameter
    :type lam: complex
    :param y: Approximate solution, e.g. apply_resolvent(U, P, lam, f)
    :type y: GridFunction
    :param f: Right-hand side on the same grid
    :type f: GridFunction
    :return: Residual on the grid
    :rtype: GridFunction
    """
    if not y.grid.same_as(f.grid):
        raise ConfigError("Solution and right-hand side live on different grids")
    nodes = y.grid.nodes
    if nodes.size < 6:
        raise ConfigError(f"Residual needs at least 6 grid nodes, got {nodes.size}")
    real = make_interp_spline(nodes, y.values.real.T, k=5).derivative()(nodes).T
    imag = make_interp_spline(nodes, y.values.imag.T, k=5).derivative()(nodes).T
    derivative = real + 1j * imag
    p1, p2, p3, p4 = (ch.evaluate(nodes) for ch in P.channels)
    y1, y2 = y.values
    values = np.array([-1j * derivative[0] + (p1 - lam) * y1 + p2 * y2,
                       1j * derivative[1] + p3 * y1 + (p4 - lam) * y2]) - f.values
    return GridFunction(y.grid, values)


def projector_contour(U: BoundaryMatrix, P: PotentialSpec, n: int, mesh: Mesh | None = None):
    """
    Indices, center and radius of the projector circle for the group labelled n, with the group's eigenvalues at
    least CONTOUR_SEPARATION inside and its neighbours at least as far outside. The radius is shrunk from the lattice
    radius down to half of it.
    :return: (indices, center, radius, eigenvalues of the group)
    :rtype: tuple[tuple[int, ...], complex, float, list[complex]]
    """
    indices, center, radius = group_of(U, P, n)
    records = compute_spectrum(U, P, indices[0] - 2, indices[-1] + 2, mesh)
    inside = [r.lam for r in records if r.n in indices]
    outside = [r.lam for r in records if r.n not in indices]
    for r in np.linspace(radius, radius / 2, 9):
        if all(abs(z - center) <= r - CONTOUR_SEPARATION for z in inside) and \
                all(abs(z - center) >= r + CONTOUR_SEPARATION for z in outside):
            return indices, center, float(r), inside
    raise ContourSeparationFailure(f"No circle of radius in [{radius / 2:.4g}, {radius:.4g}] around {center:.6g} "
                                   f"separates eigenvalues {indices} from their neighbours")


def _contour_terms(U: BoundaryMatrix, P: PotentialSpec, mesh: Mesh, lams: np.ndarray, grid: Grid):
    # factors of E(x) M^{-1} C E^{-1}(t) B^{-1} for every contour node, flattened for one matrix product
    E_grid, _ = propagate_grid(P, mesh, lams, grid.nodes)
    E_pi, _ = propagate_end(P, mesh, lams)
    M = U.C + U.D @ E_pi
    solve_c = adjugate(M) @ U.C / det2(M)[:, None, None]
    left = E_grid @ solve_c[:, None]
    right = _inverse_grid(P, E_grid, grid.nodes) @ B_INV
    K, N = lams.size, grid.size
    return left.transpose(1, 2, 0, 3).reshape(2 * N, 2 * K), right.transpose(0, 2, 1, 3).reshape(2 * K, 2 * N)


def spectral_projector(U: BoundaryMatrix, P: PotentialSpec, n: int, grid: Grid | None = None, mesh: Mesh | None = None,
                       debug: bool = GLOBAL_DEBUG, tol: float = PROJECTOR_TOL) -> KernelMatrix:
    """
    Riesz projector -1/(2 pi i) integral of R(lam) over the circle around the group labelled n: the pair
    lambda_{2n}, lambda_{2n+1} when the unperturbed eigenvalues are double, the single lambda_n otherwise.
    Trapezoid rule on the circle, node count doubled from PROJECTOR_START_NODES until the kernel changes by less
    than tol.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param n: Group label
    :type n: int
    :param grid: Grid on [0, pi], Gauss-Legendre with the default size if omitted
    :type grid: Grid | None
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :param debug: True if debug information should be printed
    :type debug: bool
    :param tol: Largest change of the kernel under one more node doubling
    :type tol: float
    :return: Projector kernel on grid x grid
    :rtype: KernelMatrix
    """
    if debug:
        start_time = time.perf_counter()
    grid = make_grid("gauss") if grid is None else grid
    mesh = build_mesh(P) if mesh is None else mesh
    indices, center, radius, eigenvalues = projector_contour(U, P, n, mesh)

    def node_sum(thetas):
        left, right = _contour_terms(U, P, mesh, center + radius * np.exp(1j * thetas), grid)
        right = right * np.repeat(np.exp(1j * thetas), 2)[:, None]
        return left @ right

    count = PROJECTOR_START_NODES
    raw = node_sum(2 * math.pi * np.arange(count) / count)
    current = -radius / count * raw
    change = math.inf
    while count < PROJECTOR_MAX_NODES:
        raw = raw + node_sum(2 * math.pi * (np.arange(count) + 0.5) / count)
        count *= 2
        refined = -radius / count * raw
        change = float(np.max(np.abs(refined - current)))
        current = refined
        if change < tol:
            break
    if change >= tol:
        print_warning(f"Projector {n} changed by {change:.3e} at {count} contour nodes")
    N = grid.size
    blocks = current.reshape(N, 2, N, 2).transpose(0, 2, 1, 3)
    kernel = KernelMatrix(grid, grid, blocks, meta={"n": n, "indices": list(indices), "center": center,
                                                    "radius": radius, "contour_nodes": count,
                                                    "eigenvalues": eigenvalues})
    if debug:
        print_debug(f"Projector {n} on {N} nodes with {count} contour nodes computed in "
                    f"{(time.perf_counter() - start_time):.6f} seconds, kernel uses {asizeof.asizeof(kernel)} bytes")
    return kernel


def projector_deviation(U: BoundaryMatrix, P: PotentialSpec, n: int, grid: Grid | None = None,
                        debug: bool = GLOBAL_DEBUG) -> float:
    """
    max over grid pairs of |P_n(t, x) - P_n^0(t, x)|, the projectors of P and of the zero potential.
    """
    grid = make_grid("gauss") if grid is None else grid
    perturbed = spectral_projector(U, P, n, grid, debug=debug)
    unperturbed = spectral_projector(U, ZERO_POTENTIAL, n, grid, debug=debug)
    return (perturbed - unperturbed).sup_norm()
