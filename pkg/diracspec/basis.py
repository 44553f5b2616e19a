"""
Eigenfunctions y_n = E(x, lambda_n) omega_n, the biorthogonal system built from the adjoint problem and the
diagnostics of (Riesz) basis properties: Gram matrices, Bessel sums, projector sums and expansion residuals.
"""
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh, svd

from .bcond import BoundaryMatrix, fix_phase, adjoint_bc
from .error_handling import DefectiveEigenvalue, PairingDegenerate, ZeroFunction, ConfigError, print_debug
from .evolve import propagate_end, propagate_grid
from .potential import PotentialSpec, Mesh, build_mesh, adjoint_potential
from .resolvent import Grid, GridFunction, KernelMatrix, make_grid, spectral_projector, zero_kernel
from .settings import (GLOBAL_DEBUG, DEFAULT_GAUSS_NODES, SEMISIMPLE_TOL, PAIRING_TOL, ZERO_FUNCTION_TOL)
from .spectrum import EigenvalueRecord, compute_spectrum
from .workers import parallel_map


@dataclass(frozen=True, eq=False)
class EigenfunctionRecord:
    n: int
    lam: complex
    omega: np.ndarray
    function: GridFunction
    norm: float
    tau_variation: tuple[float, float]
    end_values: tuple[np.ndarray, np.ndarray]

    def to_json(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "omega": self.omega, "norm": self.norm,
                "tau_variation": list(self.tau_variation)}


@dataclass(frozen=True, eq=False)
class GramResult:
    matrix: np.ndarray
    min_eigenvalue: float
    max_eigenvalue: float

    def to_json(self) -> dict:
        return {"matrix": self.matrix, "min_eigenvalue": self.min_eigenvalue, "max_eigenvalue": self.max_eigenvalue}


def basis_grid(n_max: int) -> Grid:
    """
    Gauss-Legendre grid resolving e^{i n x} for |n| <= n_max.
    """
    return make_grid("gauss", max(DEFAULT_GAUSS_NODES, 2 * abs(int(n_max)) + 64))


def _omegas(U: BoundaryMatrix, M: np.ndarray, E_pi: np.ndarray, rec: EigenvalueRecord) -> list[np.ndarray]:
    scale = float(np.max(np.abs(U.u))) * max(1.0, float(np.max(np.abs(E_pi))))
    if rec.multiplicity >= 2:
        if np.max(np.abs(M)) <= SEMISIMPLE_TOL * scale:
            return [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
        raise DefectiveEigenvalue(f"lambda_{rec.n} = {rec.lam:.10g} is a double eigenvalue with a one-dimensional "
                                  f"eigenspace, use the range of its spectral projector instead")
    row = M[0] if np.linalg.norm(M[0]) >= np.linalg.norm(M[1]) else M[1]
    return [fix_phase(np.array([row[1], -row[0]], dtype=complex))]


def eigenfunction(U: BoundaryMatrix, P: PotentialSpec, rec: EigenvalueRecord, grid: Grid | None = None,
                  mesh: Mesh | None = None) -> list[EigenfunctionRecord]:
    """
    Normalized eigenfunction y = omega_1 e_1 + omega_2 e_2 with omega = (M12, -M11) (or (M22, -M21) when the
    second row of M(lambda_n) is larger) and the larger-modulus component of omega real positive. A semisimple
    double eigenvalue (M(lambda_n) = 0) yields the two canonical columns of E instead.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param rec: Eigenvalue from compute_spectrum
    :type rec: EigenvalueRecord
    :param grid: Grid for the values, Gauss-Legendre with the default size if omitted
    :type grid: Grid | None
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :return: One record, or two for a semisimple double eigenvalue
    :rtype: list[EigenfunctionRecord]
    """
    grid = make_grid("gauss") if grid is None else grid
    mesh = build_mesh(P) if mesh is None else mesh
    lam = complex(rec.lam)
    E_pi, _ = propagate_end(P, mesh, np.array([lam]))
    E_pi = E_pi[0]
    M = U.C + U.D @ E_pi
    E_grid, _ = propagate_grid(P, mesh, [lam], grid.nodes)
    E_grid = E_grid[0]
    records = []
    for omega in _omegas(U, M, E_pi, rec):
        values = (E_grid @ omega).T
        norm = math.sqrt(float(np.sum(grid.weights * np.sum(np.abs(values) ** 2, axis=0))))
        if norm < ZERO_FUNCTION_TOL:
            raise ZeroFunction(f"Eigenfunction of lambda_{rec.n} vanishes on the grid")
        omega = omega / norm
        values = values / norm
        tau1 = values[0] * np.exp(-1j * lam * grid.nodes)
        tau2 = values[1] * np.exp(1j * lam * grid.nodes)
        variation = (float(np.sum(np.abs(np.diff(tau1)))), float(np.sum(np.abs(np.diff(tau2)))))
        records.append(EigenfunctionRecord(n=rec.n, lam=lam, omega=omega, function=GridFunction(grid, values),
                                           norm=norm, tau_variation=variation, end_values=(omega, E_pi @ omega)))
    return records


def _blocks(records: list[EigenvalueRecord]) -> list[list[EigenvalueRecord]]:
    # consecutive records of one semisimple double eigenvalue share a block
    blocks = []
    for rec in records:
        if blocks and rec.multiplicity >= 2 and len(blocks[-1]) == 1 and blocks[-1][0].multiplicity >= 2 \
                and abs(rec.lam - blocks[-1][0].lam) <= 1e-6 * (1 + abs(rec.lam)):
            blocks[-1].append(rec)
        else:
            blocks.append([rec])
    return blocks


def _block_eigenfunctions(U: BoundaryMatrix, P: PotentialSpec, block: list[EigenvalueRecord], grid: Grid,
                          mesh: Mesh) -> list[EigenfunctionRecord]:
    found = eigenfunction(U, P, block[0], grid, mesh)
    if len(found) < len(block):
        raise DefectiveEigenvalue(f"Eigenvalues {[r.n for r in block]} share a one-dimensional eigenspace")
    return [EigenfunctionRecord(n=rec.n, lam=f.lam, omega=f.omega, function=f.function, norm=f.norm,
                                tau_variation=f.tau_variation, end_values=f.end_values)
            for rec, f in zip(block, found)]


def eigenfunctions(U: BoundaryMatrix, P: PotentialSpec, records: list[EigenvalueRecord], grid: Grid | None = None,
                   mesh: Mesh | None = None, debug: bool = GLOBAL_DEBUG) -> list[EigenfunctionRecord]:
    """
    One eigenfunction per eigenvalue record, computed in parallel over eigenvalues. A semisimple double eigenvalue
    listed twice gets the two canonical eigenfunctions, one per index.
    """
    grid = make_grid("gauss") if grid is None else grid
    mesh = build_mesh(P) if mesh is None else mesh
    results = parallel_map(_block_eigenfunctions, [(U, P, block, grid, mesh) for block in _blocks(records)],
                           debug=debug)
    return [rec for block in results for rec in block]


def biorthogonal_system(U: BoundaryMatrix, P: PotentialSpec, records: list[EigenfunctionRecord],
                        mesh: Mesh | None = None, debug: bool = GLOBAL_DEBUG) -> list[EigenfunctionRecord]:
    """
    Functions w_n with <y_n, w_m> = delta_nm built from the eigenfunctions z_n of the adjoint operator (P*, U*) at
    conj(lambda_n): w_n = z_n / conj(<y_n, z_n>), and for a semisimple pair w_b = sum_c conj((G^{-1})_cb) z_c with
    G_bc = <y_b, z_c>.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param records: Eigenfunctions y_n on a common grid
    :type records: list[EigenfunctionRecord]
    :param mesh: Mesh for P*, built with the defaults if omitted
    :type mesh: Mesh | None
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: w_n in the order of records
    :rtype: list[EigenfunctionRecord]
    """
    if debug:
        start_time = time.perf_counter()
    if not records:
        return []
    grid = records[0].function.grid
    U_star, P_star = adjoint_bc(U), adjoint_potential(P)
    mesh = build_mesh(P_star) if mesh is None else mesh
    blocks: list[list[int]] = []
    for k, rec in enumerate(records):
        if blocks and abs(rec.lam - records[blocks[-1][0]].lam) <= 1e-6 * (1 + abs(rec.lam)) and len(blocks[-1]) == 1:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    result: list[EigenfunctionRecord | None] = [None] * len(records)
    for block in blocks:
        lam_star = records[block[0]].lam.conjugate()
        multiplicity = len(block)
        adjoint_rec = EigenvalueRecord(n=records[block[0]].n, lam=lam_star, lam0=lam_star, multiplicity=multiplicity,
                                       residual=0.0)
        z = eigenfunction(U_star, P_star, adjoint_rec, grid, mesh)
        if len(z) != multiplicity:
            raise PairingDegenerate(f"Adjoint eigenspace at {lam_star:.10g} has dimension {len(z)}, "
                                    f"expected {multiplicity}")
        G = np.array([[records[b].function.inner(z[c].function) for c in range(multiplicity)] for b in block])
        if abs(np.linalg.det(G)) < PAIRING_TOL:
            raise PairingDegenerate(f"|<y_n, z_n>| = {abs(np.linalg.det(G)):.3e} for n = {[records[b].n for b in block]}")
        G_inv = np.linalg.inv(G)
        for position, b in enumerate(block):
            coefficients = np.conj(G_inv[:, position])

            def combine(part):
                return sum(c * part(z[k]) for k, c in enumerate(coefficients))

            w = GridFunction(grid, combine(lambda r: r.function.values))
            result[b] = EigenfunctionRecord(n=records[b].n, lam=z[0].lam, omega=combine(lambda r: r.omega), function=w,
                                            norm=w.norm(), tau_variation=z[0].tau_variation,
                                            end_values=(combine(lambda r: r.end_values[0]),
                                                        combine(lambda r: r.end_values[1])))
    if debug:
        print_debug(f"Biorthogonal system of {len(records)} functions computed in "
                    f"{(time.perf_counter() - start_time):.6f} seconds")
    return result


def pairing_matrix(records: list[EigenfunctionRecord], dual: list[EigenfunctionRecord]) -> np.ndarray:
    """
    Matrix <y_n, w_m>.
    """
    return np.array([[y.function.inner(w.function) for w in dual] for y in records])


def biorthogonality_error(records: list[EigenfunctionRecord], dual: list[EigenfunctionRecord]) -> float:
    pairing = pairing_matrix(records, dual)
    return float(np.max(np.abs(pairing - np.eye(len(records))))) if records else 0.0


def gram_matrix(records: list[EigenfunctionRecord], N: int | None = None) -> GramResult:
    """
    Hermitian Gram matrix <y_m, y_n> of the records with |n| <= N (all records if N is omitted) and its extremal
    eigenvalues.
    :param records: Normalized eigenfunctions on a common grid
    :type records: list[EigenfunctionRecord]
    :param N: Truncation index
    :type N: int | None
    :return: Gram matrix and eigenvalue bounds
    :rtype: GramResult
    """
    chosen = records if N is None else [r for r in records if abs(r.n) <= N]
    if not chosen:
        raise ConfigError("Gram matrix of an empty family")
    values = np.stack([r.function.values for r in chosen])
    weights = chosen[0].function.grid.weights
    gram = np.einsum("man,n,kan->km", values, weights, np.conj(values))
    gram = 0.5 * (gram + gram.conj().T)
    spectrum = eigvalsh(gram)
    return GramResult(matrix=gram, min_eigenvalue=float(spectrum[0]), max_eigenvalue=float(spectrum[-1]))


def bessel_ratio(f: GridFunction, eigenvalues, N: int) -> float:
    """
    sum_{|n| <= N} |integral_0^pi f(x) e^{i lambda_n x} dx|^2 / ||f||^2, summed over both components of f.
    :param f: Function on a grid fine enough for e^{i lambda_N x}
    :type f: GridFunction
    :param eigenvalues: Records, or a mapping from n to lambda_n
    :type eigenvalues: list[EigenvalueRecord] | dict[int, complex]
    :param N: Truncation index
    :type N: int
    :return: Bessel ratio
    :rtype: float
    """
    norm = f.norm()
    if norm < ZERO_FUNCTION_TOL:
        raise ZeroFunction(f"||f|| = {norm:.3e} is numerically zero")
    lams = eigenvalues if isinstance(eigenvalues, dict) else {r.n: r.lam for r in eigenvalues}
    chosen = np.array([lam for n, lam in sorted(lams.items()) if abs(n) <= N], dtype=complex)
    phases = np.exp(1j * chosen[:, None] * f.grid.nodes[None, :])
    integrals = (phases * f.grid.weights[None, :]) @ f.values.T
    return float(np.sum(np.abs(integrals) ** 2) / norm ** 2)


def integer_lattice(N: int) -> dict[int, complex]:
    return {n: complex(n) for n in range(-N, N + 1)}


def _projector_task(U: BoundaryMatrix, P: PotentialSpec, n: int, grid: Grid) -> KernelMatrix:
    return spectral_projector(U, P, n, grid, debug=False)


def spectral_projectors(U: BoundaryMatrix, P: PotentialSpec, labels, grid: Grid,
                        debug: bool = GLOBAL_DEBUG) -> dict[int, KernelMatrix]:
    """
    Projectors for several group labels, computed in parallel.
    """
    labels = sorted(set(int(n) for n in labels))
    kernels = parallel_map(_projector_task, [(U, P, n, grid) for n in labels], debug=debug)
    return dict(zip(labels, kernels))


def projector_sum_norm(U: BoundaryMatrix, P: PotentialSpec, J, grid: Grid | None = None,
                       projectors: dict[int, KernelMatrix] | None = None, debug: bool = GLOBAL_DEBUG) -> float:
    """
    Operator norm of sum_{n in J} P_n on the discretized Hilbert space; 0 for empty J.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param J: Finite set of group labels
    :type J: Iterable[int]
    :param grid: Grid for the kernels, sized for the largest label if omitted
    :type grid: Grid | None
    :param projectors: Already computed projectors by label
    :type projectors: dict[int, KernelMatrix] | None
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: Norm of the projector sum
    :rtype: float
    """
    J = sorted(set(int(n) for n in J))
    if not J:
        return 0.0
    projectors = {} if projectors is None else projectors
    missing = [n for n in J if n not in projectors]
    if missing:
        grid = basis_grid(2 * max(abs(n) for n in J)) if grid is None else grid
        projectors = {**projectors, **spectral_projectors(U, P, missing, grid, debug)}
    total = zero_kernel(projectors[J[0]].t_grid)
    for n in J:
        total = total + projectors[n]
    return total.norm()


def expansion_residual(U: BoundaryMatrix, P: PotentialSpec, f, N: int, grid: Grid | None = None,
                       mesh: Mesh | None = None, debug: bool = GLOBAL_DEBUG) -> float:
    """
    ||f - sum_{|n| <= N} <f, w_n> y_n|| for the biorthogonal expansion of f.
    :param f: Callable returning shape (2, len(x)) or a GridFunction on grid
    :type f: callable | GridFunction
    :param N: Truncation index
    :type N: int
    :return: L2 norm of the residual
    :rtype: float
    """
    grid = (f.grid if isinstance(f, GridFunction) else basis_grid(N)) if grid is None else grid
    f = f if isinstance(f, GridFunction) else GridFunction.from_callable(f, grid)
    mesh = build_mesh(P) if mesh is None else mesh
    spectrum = compute_spectrum(U, P, -N - 1, N + 1, mesh, debug=debug)
    found = eigenfunctions(U, P, spectrum, grid, mesh, debug)
    inner = [y for y in found if abs(y.n) <= N]
    # keep both partners of a semisimple pair cut by the truncation
    ys = [y for y in found if abs(y.n) <= N or any(abs(y.lam - o.lam) <= 1e-6 * (1 + abs(y.lam)) for o in inner)]
    ws = biorthogonal_system(U, P, ys, debug=debug)
    partial = GridFunction(grid, np.zeros_like(f.values))
    for y, w in zip(ys, ws):
        partial = partial + f.inner(w.function) * y.function
    return (f - partial).norm()


def tau_variation(records: list[EigenfunctionRecord]) -> dict:
    """
    Largest and median total variation of tau_1 = y_1 e^{-i lambda x} and tau_2 = y_2 e^{i lambda x}.
    """
    variation = np.array([max(r.tau_variation) for r in records]) if records else np.zeros(1)
    return {"max": float(np.max(variation)), "median": float(np.median(variation)),
            "per_index": {r.n: max(r.tau_variation) for r in records}}


def _range_basis(kernel: KernelMatrix, rank: int) -> np.ndarray:
    # orthonormal functions spanning the range, values (rank, 2, N)
    weights = kernel.x_grid.weights
    root = np.repeat(np.sqrt(weights), 2)
    scaled = root[:, None] * kernel.operator_matrix() / np.repeat(np.sqrt(kernel.t_grid.weights), 2)[None, :]
    left, _, _ = svd(scaled)
    vectors = left[:, :rank] / root[:, None]
    return vectors.T.reshape(rank, kernel.x_grid.size, 2).transpose(0, 2, 1)


def subspace_gram(U: BoundaryMatrix, P: PotentialSpec, labels, grid: Grid | None = None,
                  projectors: dict[int, KernelMatrix] | None = None, debug: bool = GLOBAL_DEBUG) -> GramResult:
    """
    Block Gram matrix of orthonormal bases of the projector ranges of the given groups.
    """
    labels = sorted(set(int(n) for n in labels))
    if not labels:
        raise ConfigError("Subspace Gram matrix of an empty family")
    projectors = {} if projectors is None else projectors
    missing = [n for n in labels if n not in projectors]
    if missing:
        grid = basis_grid(2 * max(abs(n) for n in labels)) if grid is None else grid
        projectors = {**projectors, **spectral_projectors(U, P, missing, grid, debug)}
    bases = [_range_basis(projectors[n], len(projectors[n].meta.get("indices", (n,)))) for n in labels]
    values = np.concatenate(bases)
    weights = projectors[labels[0]].x_grid.weights
    gram = np.einsum("man,n,kan->km", values, weights, np.conj(values))
    gram = 0.5 * (gram + gram.conj().T)
    spectrum = eigvalsh(gram)
    return GramResult(matrix=gram, min_eigenvalue=float(spectrum[0]), max_eigenvalue=float(spectrum[-1]))


def gelfand_sampling(U: BoundaryMatrix, P: PotentialSpec, low: int = 10, high: int = 60, samples: int = 20,
                     max_size: int = 20, seed: int = 0, grid: Grid | None = None, debug: bool = GLOBAL_DEBUG) -> dict:
    """
    Norms of projector sums over random finite sets J of group labels in [low, high], against singletons.
    :return: Largest sampled sum norm, largest singleton norm, their ratio and the samples
    :rtype: dict
    """
    if low > high or samples < 1 or max_size < 1:
        raise ConfigError("Gelfand sampling needs low <= high and positive sample counts")
    grid = basis_grid(2 * max(abs(low), abs(high))) if grid is None else grid
    projectors = spectral_projectors(U, P, range(low, high + 1), grid, debug)
    singleton = max(kernel.norm() for kernel in projectors.values())
    rng = np.random.default_rng(seed)
    population = np.arange(low, high + 1)
    sampled = []
    for _ in range(samples):
        size = int(rng.integers(1, min(max_size, population.size) + 1))
        J = sorted(int(n) for n in rng.choice(population, size=size, replace=False))
        sampled.append({"J": J, "norm": projector_sum_norm(U, P, J, projectors=projectors)})
    largest = max(s["norm"] for s in sampled)
    return {"max_norm": largest, "max_singleton_norm": singleton, "ratio": largest / singleton, "samples": sampled}
