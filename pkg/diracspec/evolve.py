"""
Fundamental matrix E(x, lam) of B y' + P y = lam y with E(0, lam) = I, B = diag(-i, i).

Every mesh cell contributes exp(h B^{-1}(lam I - avg P)). The 2x2 exponential is evaluated in closed form from the
trace-free part X0 of the cell matrix X: exp(X) = e^{tr X / 2} (F(s) I + G(s) X0) with s = -det X0,
F(s) = cosh(sqrt s) and G(s) = sinh(sqrt s) / sqrt s. The lam-derivative of a cell is the Frechet derivative of exp
in the direction h B^{-1}, which has the same closed form.
"""
import time
from dataclasses import dataclass

import numpy as np

from .error_handling import MeshMismatch, DeterminantDrift, print_debug
from .potential import PotentialSpec, Mesh
from .settings import GLOBAL_DEBUG, SERIES_THRESHOLD, DET_DRIFT_TOL, MAX_BATCH_ENTRIES


@dataclass(frozen=True, eq=False)
class Propagation:
    E: np.ndarray
    dE: np.ndarray | None
    lam: complex
    x: float


def _entire_functions(s: np.ndarray, with_derivative: bool = False):
    # F = cosh(mu), G = sinh(mu)/mu, Q = (mu cosh(mu) - sinh(mu))/mu^3 with mu^2 = s
    s = np.asarray(s, dtype=complex)
    small = np.abs(s) < SERIES_THRESHOLD
    large = ~small
    mu = np.sqrt(s[large])
    F = np.empty_like(s)
    G = np.empty_like(s)
    z = s[small]
    F[small] = 1 + z / 2 * (1 + z / 12 * (1 + z / 30 * (1 + z / 56 * (1 + z / 90))))
    G[small] = 1 + z / 6 * (1 + z / 20 * (1 + z / 42 * (1 + z / 72 * (1 + z / 110))))
    F[large] = np.cosh(mu)
    G[large] = np.sinh(mu) / mu
    if not with_derivative:
        return F, G, None
    Q = np.empty_like(s)
    Q[small] = 1 / 3 + z / 30 + z ** 2 / 840 + z ** 3 / 45360 + z ** 4 / 3991680
    Q[large] = (mu * np.cosh(mu) - np.sinh(mu)) / mu ** 3
    return F, G, Q


def _cell_exponentials(averages: np.ndarray, widths: np.ndarray, lams: np.ndarray, with_derivative: bool):
    """
    Cell propagators for every (lam, cell) pair, shape (K, m, 2, 2), and their lam-derivatives.
    """
    h = widths[None, :]
    p1, p2, p3, p4 = (averages[None, :, j] for j in range(4))
    lam = lams[:, None]
    tau = 0.5j * h * (p4 - p1)
    a = 1j * h * (lam - 0.5 * (p1 + p4))
    b = np.broadcast_to(-1j * h * p2, a.shape)
    c = np.broadcast_to(1j * h * p3, a.shape)
    tau = np.broadcast_to(tau, a.shape)
    F, G, Q = _entire_functions(a * a + b * c, with_derivative)
    scale = np.exp(tau)
    E = np.empty(a.shape + (2, 2), dtype=complex)
    E[..., 0, 0] = scale * (F + G * a)
    E[..., 0, 1] = scale * G * b
    E[..., 1, 0] = scale * G * c
    E[..., 1, 1] = scale * (F - G * a)
    if not with_derivative:
        return E, None
    hb = np.broadcast_to(1j * h, a.shape)
    t = 2 * hb * a  # tr(X0 h B^{-1})
    common = scale * G * t / 2
    dE = np.empty_like(E)
    dE[..., 0, 0] = common + scale * (hb * G + Q / 2 * t * a)
    dE[..., 1, 1] = common - scale * (hb * G + Q / 2 * t * a)
    dE[..., 0, 1] = scale * Q / 2 * t * b
    dE[..., 1, 0] = scale * Q / 2 * t * c
    return E, dE


def _ordered_product(E: np.ndarray, dE: np.ndarray | None):
    """
    Product E[:, m-1] ... E[:, 0] by pairwise reduction, with the product rule for the derivatives.
    """
    while E.shape[1] > 1:
        if E.shape[1] % 2:
            pad = np.broadcast_to(np.eye(2, dtype=complex), (E.shape[0], 1, 2, 2))
            E = np.concatenate([E, pad], axis=1)
            if dE is not None:
                dE = np.concatenate([dE, np.zeros_like(pad)], axis=1)
        first, second = E[:, 0::2], E[:, 1::2]
        if dE is not None:
            dE = dE[:, 1::2] @ first + second @ dE[:, 0::2]
        E = second @ first
    return E[:, 0], (None if dE is None else dE[:, 0])


def _prefix_products(E: np.ndarray, dE: np.ndarray | None):
    """
    All prefixes E[:, k] ... E[:, 0] by a doubling scan.
    """
    m = E.shape[1]
    offset = 1
    while offset < m:
        later, earlier = E[:, offset:], E[:, :-offset]
        new_E = E.copy()
        new_E[:, offset:] = later @ earlier
        if dE is not None:
            new_dE = dE.copy()
            new_dE[:, offset:] = dE[:, offset:] @ earlier + later @ dE[:, :-offset]
            dE = new_dE
        E = new_E
        offset *= 2
    return E, dE


def _check_mesh(P: PotentialSpec, mesh: Mesh, xs: np.ndarray) -> None:
    if mesh.potential is not P and mesh.potential != P:
        raise MeshMismatch("Mesh was built for a different potential")
    if xs.size and (np.min(xs) < mesh.nodes[0] - 1e-12 or np.max(xs) > mesh.nodes[-1] + 1e-12):
        raise MeshMismatch(f"Points outside the mesh range [{mesh.nodes[0]}, {mesh.nodes[-1]}]")


def _chunks(count: int, cells: int):
    size = max(1, MAX_BATCH_ENTRIES // max(cells, 1))
    for start in range(0, count, size):
        yield slice(start, min(count, start + size))


def propagate_end(P: PotentialSpec, mesh: Mesh, lams, with_derivative: bool = False):
    """
    E(pi, lam) for an array of lam, shape lams.shape + (2, 2), and optionally dE/dlam.
    """
    lams = np.asarray(lams, dtype=complex)
    flat = lams.reshape(-1)
    _check_mesh(P, mesh, np.empty(0))
    E = np.empty((flat.size, 2, 2), dtype=complex)
    dE = np.empty_like(E) if with_derivative else None
    widths = mesh.widths
    for part in _chunks(flat.size, mesh.cells):
        cells, d_cells = _cell_exponentials(mesh.averages, widths, flat[part], with_derivative)
        E[part], d_part = _ordered_product(cells, d_cells)
        if with_derivative:
            dE[part] = d_part
    E = E.reshape(lams.shape + (2, 2))
    return E, (None if dE is None else dE.reshape(lams.shape + (2, 2)))


def propagate_grid(P: PotentialSpec, mesh: Mesh, lams, xs, with_derivative: bool = False):
    """
    E(x, lam) for every lam in lams (1-D) and x in xs (1-D), shape (K, N, 2, 2), and optionally dE/dlam.
    Each x lies in a mesh cell; the part of that cell left of x is propagated with its own exact average.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    _check_mesh(P, mesh, xs)
    nodes = mesh.nodes
    m = mesh.cells
    k = np.clip(np.searchsorted(nodes, xs, side="right") - 1, 0, m - 1)
    partial_widths = np.clip(xs - nodes[k], 0.0, None)
    F_x = P.antiderivatives(xs)
    F_k = P.antiderivatives(nodes[k])
    safe = np.where(partial_widths > 0, partial_widths, 1.0)
    partial_avg = np.where(partial_widths[:, None] > 0, (F_x - F_k) / safe[:, None], 0.0)
    last = int(np.max(k)) if xs.size else 0
    E_out = np.empty((lams.size, xs.size, 2, 2), dtype=complex)
    dE_out = np.empty_like(E_out) if with_derivative else None
    identity = np.eye(2, dtype=complex)
    for part in _chunks(lams.size, max(last, 1) + xs.size):
        K = part.stop - part.start
        prefix = np.broadcast_to(identity, (K, 1, 2, 2))
        d_prefix = np.zeros((K, 1, 2, 2), dtype=complex) if with_derivative else None
        if last > 0:
            cells, d_cells = _cell_exponentials(mesh.averages[:last], mesh.widths[:last], lams[part], with_derivative)
            scanned, d_scanned = _prefix_products(cells, d_cells)
            prefix = np.concatenate([prefix, scanned], axis=1)
            if with_derivative:
                d_prefix = np.concatenate([d_prefix, d_scanned], axis=1)
        tails, d_tails = _cell_exponentials(partial_avg, partial_widths, lams[part], with_derivative)
        E_out[part] = tails @ prefix[:, k]
        if with_derivative:
            dE_out[part] = d_tails @ prefix[:, k] + tails @ d_prefix[:, k]
    return E_out, dE_out


def fundamental_matrix(P: PotentialSpec, mesh: Mesh, lam: complex, x: float, with_derivative: bool = False,
                       debug: bool = GLOBAL_DEBUG) -> Propagation:
    """
    Fundamental matrix E(x, lam) as the ordered product of cell exponentials up to x.
    :param P: Potential, general or gauge reduced
    :type P: PotentialSpec
    :param mesh: Mesh built for P
    :type mesh: Mesh
    :param lam: Spectral parameter
    :type lam: complex
    :param x: Point in [0, pi]
    :type x: float
    :param with_derivative: True if dE/dlam should be accumulated as well
    :type with_derivative: bool
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: E and optionally dE/dlam
    :rtype: Propagation
    """
    if debug:
        start_time = time.perf_counter()
    x = float(x)
    if x == mesh.nodes[-1]:
        _check_mesh(P, mesh, np.array([x]))
        E, dE = propagate_end(P, mesh, np.array([lam]), with_derivative)
        E, dE = E[0], (None if dE is None else dE[0])
    else:
        E, dE = propagate_grid(P, mesh, [lam], [x], with_derivative)
        E, dE = E[0, 0], (None if dE is None else dE[0, 0])
    if debug:
        print_debug(f"E({x:.6g}, {lam:.6g}) over {mesh.cells} cells computed in {(time.perf_counter() - start_time):.6f} seconds")
    return Propagation(E=E, dE=dE, lam=complex(lam), x=x)


def fundamental_matrix_grid(P: PotentialSpec, mesh: Mesh, lam: complex, xs, with_derivative: bool = False):
    """
    E(x, lam) at all points xs for one lam, shape (N, 2, 2), and optionally dE/dlam.
    """
    E, dE = propagate_grid(P, mesh, [lam], xs, with_derivative)
    return E[0], (None if dE is None else dE[0])


def fundamental_matrix_batch(P: PotentialSpec, mesh: Mesh, lams, with_derivative: bool = False):
    """
    E(pi, lam) for many lam, shape lams.shape + (2, 2).
    """
    return propagate_end(P, mesh, lams, with_derivative)


def liouville_det(P: PotentialSpec, x) -> np.ndarray:
    """
    det E(x, lam) = exp(i int_0^x (p4 - p1)), independent of lam.
    """
    return np.exp(1j * (P.p4.antiderivative(x) - P.p1.antiderivative(x)))


def adjugate(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    out = np.empty_like(A)
    out[..., 0, 0] = A[..., 1, 1]
    out[..., 1, 1] = A[..., 0, 0]
    out[..., 0, 1] = -A[..., 0, 1]
    out[..., 1, 0] = -A[..., 1, 0]
    return out


def det2(A: np.ndarray):
    A = np.asarray(A)
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def transfer_matrix(E_a: np.ndarray, E_x: np.ndarray, det_expected: complex = 1.0) -> np.ndarray:
    """
    Transfer matrix E(x, lam) E(a, lam)^{-1} with the inverse taken as adjugate / det_expected.
    :param E_a: E(a, lam), may be batched
    :type E_a: np.ndarray
    :param E_x: E(x, lam), may be batched
    :type E_x: np.ndarray
    :param det_expected: Known value of det E(a, lam), 1 for reduced potentials
    :type det_expected: complex
    :return: Transfer matrix
    :rtype: np.ndarray
    """
    drift = np.max(np.abs(det2(E_a) - det_expected) / np.maximum(1.0, np.abs(det_expected)))
    if drift > DET_DRIFT_TOL:
        raise DeterminantDrift(f"|det E(a) - {det_expected}| = {drift:.3e} exceeds {DET_DRIFT_TOL}")
    return np.asarray(E_x, dtype=complex) @ adjugate(E_a) / det_expected


def oracle_const_E(a: complex, b: complex, lam: complex, x: float) -> np.ndarray:
    """
    Closed form of E(x, lam) for the constant potential p2 = a, p3 = b:
    cos(omega x) I + sin(omega x)/omega A with A = [[i lam, -i a], [i b, -i lam]], omega^2 = lam^2 - ab.
    Stable at omega = 0 where it reduces to I + x A.
    """
    A = np.array([[1j * lam, -1j * a], [1j * b, -1j * lam]], dtype=complex)
    F, G, _ = _entire_functions(np.array([x * x * (a * b - lam * lam)]))
    return F[0] * np.eye(2, dtype=complex) + x * G[0] * A
