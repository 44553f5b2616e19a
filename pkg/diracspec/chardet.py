"""
Characteristic matrix M(lam) = C + D E(pi, lam) and determinant Delta(lam) = det M(lam), whose zeros are the
eigenvalues.
"""
import math
import time
from dataclasses import dataclass

import numpy as np

from .bcond import BoundaryMatrix, minors, delta0, require_regular
from .error_handling import print_debug
from .evolve import propagate_end, adjugate, det2
from .potential import PotentialSpec, Mesh, build_mesh
from .settings import GLOBAL_DEBUG


@dataclass(frozen=True, eq=False)
class CharEval:
    M: np.ndarray
    delta: complex
    d_delta: complex | None
    lam: complex

    def to_json(self) -> dict:
        return {"lambda": self.lam, "M": self.M, "delta": self.delta, "d_delta": self.d_delta}


def _mesh_for(P: PotentialSpec, mesh: Mesh | None) -> Mesh:
    return build_mesh(P) if mesh is None else mesh


def char_matrix(U: BoundaryMatrix, P: PotentialSpec, lam: complex, mesh: Mesh | None = None) -> np.ndarray:
    """
    Characteristic matrix C + D E(pi, lam).
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param lam: Spectral parameter
    :type lam: complex
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :return: 2x2 matrix
    :rtype: np.ndarray
    """
    require_regular(U)
    E, _ = propagate_end(P, _mesh_for(P, mesh), np.array([lam]))
    return U.C + U.D @ E[0]


def char_det_batch(U: BoundaryMatrix, P: PotentialSpec, lams, mesh: Mesh | None = None, with_derivative: bool = False):
    """
    Delta and optionally dDelta/dlam for an array of lam.
    :return: (Delta, dDelta or None, M), shaped like lams (M with two extra axes)
    """
    lams = np.asarray(lams, dtype=complex)
    E, dE = propagate_end(P, _mesh_for(P, mesh), lams, with_derivative)
    M = U.C + U.D @ E
    delta = det2(M)
    if not with_derivative:
        return delta, None, M
    d_delta = np.trace(adjugate(M) @ (U.D @ dE), axis1=-2, axis2=-1)
    return delta, d_delta, M


def char_det(U: BoundaryMatrix, P: PotentialSpec, lam: complex, mesh: Mesh | None = None, with_derivative: bool = True,
             debug: bool = GLOBAL_DEBUG) -> CharEval:
    """
    Characteristic determinant Delta(lam) = det(C + D E(pi, lam)) with dDelta/dlam = tr(adj(M) D dE/dlam).
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param lam: Spectral parameter
    :type lam: complex
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :param with_derivative: True if the derivative should be computed
    :type with_derivative: bool
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: M, Delta and dDelta/dlam
    :rtype: CharEval
    """
    if debug:
        start_time = time.perf_counter()
    require_regular(U)
    delta, d_delta, M = char_det_batch(U, P, np.array([lam]), mesh, with_derivative)
    result = CharEval(M=M[0], delta=complex(delta[0]), d_delta=None if d_delta is None else complex(d_delta[0]),
                      lam=complex(lam))
    if debug:
        print_debug(f"Delta({lam:.6g}) = {result.delta:.6g} computed in {(time.perf_counter() - start_time):.6f} seconds")
    return result


def expansion_delta(U: BoundaryMatrix, E: np.ndarray) -> complex:
    """
    Delta from the minor expansion J12 + J13 e12 + J14 e22 + J32 e11 + J42 e21 + J34 det E.
    """
    J = minors(U)
    return complex(J.J12 + J.J13 * E[0, 1] + J.J14 * E[1, 1] + J.J32 * E[0, 0] + J.J42 * E[1, 0]
                   + J.J34 * det2(E))


def delta_scale(U: BoundaryMatrix, lam) -> np.ndarray:
    """
    Natural size of Delta near lam, sum |J| e^{pi |Im lam|}.
    """
    J = minors(U)
    return np.sum(np.abs(J.values())) * np.exp(math.pi * np.abs(np.imag(lam)))


def decay_ladder(U: BoundaryMatrix, P: PotentialSpec, ladder=(10.0, 20.0, 40.0), mesh: Mesh | None = None) -> list[float]:
    """
    |Delta(lam) - Delta_0(lam)| along a ladder of real lam.
    """
    lams = np.array(ladder, dtype=complex)
    delta, _, _ = char_det_batch(U, P, lams, mesh)
    return [float(v) for v in np.abs(delta - delta0(U, lams))]


def lower_bound_ratio(U: BoundaryMatrix, P: PotentialSpec, mesh: Mesh | None = None, samples: int = 81,
                      re: float = 0.5, im_range: tuple[float, float] = (2.0, 6.0)) -> float:
    """
    Minimum of |Delta(lam)| e^{-pi |Im lam|} on the segment Re lam = re, Im lam in im_range.
    """
    lams = re + 1j * np.linspace(im_range[0], im_range[1], samples)
    delta, _, _ = char_det_batch(U, P, lams, mesh)
    return float(np.min(np.abs(delta) * np.exp(-math.pi * np.abs(lams.imag))))


def e11_asymptotic_ladder(P: PotentialSpec, ladder=(10.0, 20.0, 40.0), mesh: Mesh | None = None) -> list[float]:
    """
    |E11(pi, lam) e^{-i lam pi} - 1| along a ladder of real lam.
    """
    lams = np.array(ladder, dtype=complex)
    E, _ = propagate_end(P, _mesh_for(P, mesh), lams)
    return [float(v) for v in np.abs(E[:, 0, 0] * np.exp(-1j * math.pi * lams) - 1)]


def delta_grid(U: BoundaryMatrix, P: PotentialSpec, re_values, im_values, mesh: Mesh | None = None) -> list[tuple]:
    """
    Rows (re lam, im lam, re Delta, im Delta) over a rectangular lam grid, real part varying fastest.
    """
    re_values = np.asarray(re_values, dtype=float)
    im_values = np.asarray(im_values, dtype=float)
    lams = (re_values[None, :] + 1j * im_values[:, None]).reshape(-1)
    delta, _, _ = char_det_batch(U, P, lams, mesh)
    return [(float(l.real), float(l.imag), float(d.real), float(d.imag)) for l, d in zip(lams, delta)]
