"""
Boundary conditions U(y) = C y(0) + D y(pi) = 0 given by the 2x4 matrix (C|D), their minors, Birkhoff
classification, adjoint conditions and the closed-form spectral theory of the unperturbed operator.
"""
import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .error_handling import RankDeficient, NonRegularInput, ConfigError
from .jsonio import load_json, pair_to_complex, complex_to_pair
from .settings import RANK_TOL, ZERO_SYSTEM_TOL, ROOT_RESIDUAL_TOL

_MINOR_KEYS = ("J12", "J13", "J14", "J23", "J24", "J34")


class BoundaryMatrix:
    def __init__(self, rows, name: str = ""):
        """
        Boundary conditions C y(0) + D y(pi) = 0.
        :param rows: 2x4 complex matrix (C|D)
        :type rows: array_like
        :param name: Optional preset name, only used for printing
        :type name: str
        """
        u = np.array(rows, dtype=complex)
        if u.shape != (2, 4):
            raise ConfigError(f"Boundary matrix must be 2x4, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ConfigError("Boundary matrix contains non-finite entries")
        u.setflags(write=False)
        self.u = u
        self.name = name
        minors(self)

    @property
    def C(self) -> np.ndarray:
        return self.u[:, :2]

    @property
    def D(self) -> np.ndarray:
        return self.u[:, 2:]

    @classmethod
    def from_blocks(cls, C, D, name: str = "") -> "BoundaryMatrix":
        return cls(np.hstack([np.asarray(C, dtype=complex), np.asarray(D, dtype=complex)]), name=name)

    @classmethod
    def from_q_form(cls, C_u, D_u, name: str = "") -> "BoundaryMatrix":
        """
        Converts conditions C_u u(0) + D_u u(pi) = 0 stated for the system [[0,-1],[1,0]] u' + Q u into conditions
        on y with u = S y, S = 1/2 [[1, 1], [i, -i]].
        """
        S = _Q_FORM_S
        return cls.from_blocks(np.asarray(C_u, dtype=complex) @ S, np.asarray(D_u, dtype=complex) @ S, name=name)

    def scale_d(self, factor: complex) -> "BoundaryMatrix":
        """
        Returns the conditions (C, factor * D).
        """
        return BoundaryMatrix.from_blocks(self.C, factor * self.D)

    def to_json(self) -> dict:
        return {"U": [[complex_to_pair(v) for v in row] for row in self.u]}

    def __eq__(self, other) -> bool:
        return isinstance(other, BoundaryMatrix) and np.array_equal(self.u, other.u)

    def __hash__(self) -> int:
        return hash(self.u.tobytes())

    def __str__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        rows = "; ".join(", ".join(f"{v:.6g}" for v in row) for row in self.u)
        return f"BoundaryMatrix{label} [{rows}]"


_Q_FORM_S = np.array([[0.5, 0.5], [0.5j, -0.5j]], dtype=complex)


@dataclass(frozen=True)
class MinorSet:
    J12: complex
    J13: complex
    J14: complex
    J23: complex
    J24: complex
    J34: complex

    @property
    def J32(self) -> complex:
        return -self.J23

    @property
    def J42(self) -> complex:
        return -self.J24

    def J(self, a: int, b: int) -> complex:
        """
        Minor of columns a and b (1-based), using J_ba = -J_ab.
        """
        if a == b:
            return 0j
        if a > b:
            return -self.J(b, a)
        return getattr(self, f"J{a}{b}")

    def values(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in _MINOR_KEYS], dtype=complex)

    def scale(self) -> float:
        return float(np.max(np.abs(self.values())))

    def plucker(self) -> complex:
        return self.J12 * self.J34 - self.J13 * self.J24 + self.J14 * self.J23


class BcKind(Enum):
    NON_REGULAR = "NonRegular"
    REGULAR_NOT_STRONG = "RegularNotStrong"
    STRONGLY_REGULAR = "StronglyRegular"


@dataclass(frozen=True)
class BcClass:
    kind: BcKind
    discriminant: complex

    @property
    def is_regular(self) -> bool:
        return self.kind is not BcKind.NON_REGULAR

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "discriminant": complex_to_pair(self.discriminant)}


def minors(U: BoundaryMatrix) -> MinorSet:
    """
    Computes the six independent 2x2 minors J_ab = u_1a u_2b - u_1b u_2a of the boundary matrix.
    :param U: Boundary matrix
    :type U: BoundaryMatrix
    :return: The minors
    :rtype: MinorSet
    """
    u = U.u
    values = {}
    for key in _MINOR_KEYS:
        a, b = int(key[1]) - 1, int(key[2]) - 1
        values[key] = complex(u[0, a] * u[1, b] - u[0, b] * u[1, a])
    result = MinorSet(**values)
    entry_scale = float(np.max(np.abs(u)))
    if entry_scale == 0.0 or result.scale() <= RANK_TOL * entry_scale ** 2:
        raise RankDeficient(f"Boundary matrix has rank below 2: {U}")
    return result


def classify(U: BoundaryMatrix) -> BcClass:
    """
    Birkhoff classification: regular iff J14 J23 != 0, strongly regular iff additionally
    (J12 + J34)^2 + 4 J14 J23 != 0.
    :param U: Boundary matrix
    :type U: BoundaryMatrix
    :return: Kind and discriminant
    :rtype: BcClass
    """
    J = minors(U)
    scale = J.scale() ** 2
    discriminant = (J.J12 + J.J34) ** 2 + 4 * J.J14 * J.J23
    if abs(J.J14 * J.J23) <= RANK_TOL * scale:
        kind = BcKind.NON_REGULAR
    elif abs(discriminant) <= RANK_TOL * scale:
        kind = BcKind.REGULAR_NOT_STRONG
    else:
        kind = BcKind.STRONGLY_REGULAR
    return BcClass(kind=kind, discriminant=discriminant)


def require_regular(U: BoundaryMatrix) -> BcClass:
    bc_class = classify(U)
    if not bc_class.is_regular:
        raise NonRegularInput(f"Boundary conditions are not Birkhoff regular: {U}")
    return bc_class


def adjoint_bc(U: BoundaryMatrix) -> BoundaryMatrix:
    """
    Boundary matrix of the adjoint operator, [[J23*, J13*, -J12*, 0], [0, -J34*, J24*, J23*]].
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :return: Adjoint boundary matrix
    :rtype: BoundaryMatrix
    """
    require_regular(U)
    J = minors(U)
    c = np.conj
    rows = [[c(J.J23), c(J.J13), -c(J.J12), 0.0],
            [0.0, -c(J.J34), c(J.J24), c(J.J23)]]
    return BoundaryMatrix(rows, name=f"{U.name}*" if U.name else "")


def branch_log(z: complex) -> complex:
    """
    Logarithm with imaginary part in (-pi, pi]; points on the negative real axis get imaginary part pi.
    """
    value = cmath.log(z)
    if value.imag <= -math.pi + 1e-12:
        value = complex(value.real, math.pi)
    return value


@dataclass(frozen=True)
class ModelSpectrum:
    z0: complex
    z1: complex
    kappa0: complex
    kappa1: complex
    doubled: bool = False  # both series coincide, set from the classification of U

    def lambda0(self, n: int) -> complex:
        """
        Unperturbed eigenvalue with index n, kappa_{n mod 2} + n.
        """
        return (self.kappa0 if n % 2 == 0 else self.kappa1) + n

    def lambda0_array(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=int)
        return np.where(indices % 2 == 0, self.kappa0, self.kappa1) + indices

    def to_json(self) -> dict:
        return {"z0": complex_to_pair(self.z0), "z1": complex_to_pair(self.z1),
                "kappa0": complex_to_pair(self.kappa0), "kappa1": complex_to_pair(self.kappa1),
                "doubled": self.doubled}


def _quadratic_roots(a: complex, b: complex, c: complex) -> tuple[complex, complex]:
    # roots of a z^2 + b z + c without cancellation
    root = cmath.sqrt(b * b - 4 * a * c)
    if (b.conjugate() * root).real < 0:
        root = -root
    q = -0.5 * (b + root)
    if q == 0:
        return 0j, 0j
    return q / a, c / q


def unperturbed_spectrum(U: BoundaryMatrix) -> ModelSpectrum:
    """
    Spectrum of the operator with zero potential: the roots z0, z1 of J23 z^2 - (J12 + J34) z - J14 = 0 give the two
    series kappa0 + 2k and kappa1 + 2k + 1 with kappa0 = -(i/pi) ln z0 and kappa1 = -(i/pi) ln z1 - 1.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :return: Roots, kappas and enumeration
    :rtype: ModelSpectrum
    """
    doubled = require_regular(U).kind is BcKind.REGULAR_NOT_STRONG
    J = minors(U)
    a, b, c = J.J23, -(J.J12 + J.J34), -J.J14
    roots = _quadratic_roots(a, b, c)
    for z in roots:
        residual = abs(a * z * z + b * z + c)
        if residual > ROOT_RESIDUAL_TOL * (abs(a) * abs(z) ** 2 + abs(b) * abs(z) + abs(c)):
            raise NonRegularInput(f"Characteristic quadratic solved inaccurately, residual {residual:.3e}")
    candidates = []
    for z0, z1 in (roots, roots[::-1]):
        kappa0 = -1j / math.pi * branch_log(z0)
        kappa1 = -1j / math.pi * branch_log(z1) - 1
        lower, upper = kappa0.real, kappa1.real + 1
        if lower > -1 and lower <= upper + 1e-12 and upper <= 1 + 1e-12:
            if abs(lower - upper) <= 1e-12 and kappa0.imag > kappa1.imag + 1e-12:
                continue
            candidates.append(ModelSpectrum(z0=z0, z1=z1, kappa0=kappa0, kappa1=kappa1, doubled=doubled))
    if not candidates:
        raise NonRegularInput(f"No admissible assignment of the roots {roots[0]:.6g}, {roots[1]:.6g}")
    return candidates[0]


def delta0(U: BoundaryMatrix, lam):
    """
    Characteristic determinant of the unperturbed operator, (J12 + J34) - J23 e^{i pi lam} + J14 e^{-i pi lam}.
    Accepts scalars and numpy arrays.
    """
    J = minors(U)
    lam = np.asarray(lam, dtype=complex)
    value = (J.J12 + J.J34) - J.J23 * np.exp(1j * np.pi * lam) + J.J14 * np.exp(-1j * np.pi * lam)
    return complex(value) if value.ndim == 0 else value


def _exp_integral(c: complex) -> float:
    # integral over [0, pi] of e^{c x} for real c
    c = float(c)
    if abs(c) < 1e-14:
        return math.pi
    return math.expm1(c * math.pi) / c


@dataclass(frozen=True)
class ModelEigenfunction:
    """
    Normalized eigenfunction (omega1 e^{i lam x}, omega2 e^{-i lam x}) of the unperturbed operator.
    """
    n: int
    lam: complex
    omega: tuple[complex, complex]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([self.omega[0] * np.exp(1j * self.lam * x), self.omega[1] * np.exp(-1j * self.lam * x)])


def fix_phase(omega: np.ndarray) -> np.ndarray:
    """
    Multiplies omega by a unimodular factor making its larger-modulus component real positive (ties: first).
    """
    k = 0 if abs(omega[0]) >= abs(omega[1]) - 1e-14 * max(abs(omega[0]), abs(omega[1])) else 1
    if omega[k] == 0:
        return omega
    return omega * (abs(omega[k]) / omega[k])


def model_eigenfunction(U: BoundaryMatrix, n: int) -> list[ModelEigenfunction]:
    """
    Normalized eigenfunction(s) of the unperturbed operator at lambda_n^0. Returns two functions spanning the
    eigenspace when the system matrix C + D diag(e^{i pi lam}, e^{-i pi lam}) vanishes, one otherwise.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param n: Index
    :type n: int
    :return: One or two normalized eigenfunctions
    :rtype: list[ModelEigenfunction]
    """
    lam = unperturbed_spectrum(U).lambda0(n)
    m0 = U.C + U.D @ np.diag([np.exp(1j * np.pi * lam), np.exp(-1j * np.pi * lam)])
    norms = (_exp_integral(-2 * lam.imag), _exp_integral(2 * lam.imag))
    if np.max(np.abs(m0)) <= ZERO_SYSTEM_TOL * np.max(np.abs(U.u)):
        return [ModelEigenfunction(n, lam, (1 / math.sqrt(norms[0]), 0j)),
                ModelEigenfunction(n, lam, (0j, 1 / math.sqrt(norms[1])))]
    row = m0[0] if np.linalg.norm(m0[0]) >= np.linalg.norm(m0[1]) else m0[1]
    omega = fix_phase(np.array([row[1], -row[0]], dtype=complex))
    norm = math.sqrt(abs(omega[0]) ** 2 * norms[0] + abs(omega[1]) ** 2 * norms[1])
    omega = omega / norm
    return [ModelEigenfunction(n, lam, (complex(omega[0]), complex(omega[1])))]


def boundary_residual(U: BoundaryMatrix, y0, ypi) -> np.ndarray:
    """
    Value of the boundary form U(y) = C y(0) + D y(pi).
    """
    return U.C @ np.asarray(y0, dtype=complex) + U.D @ np.asarray(ypi, dtype=complex)


def lagrange_form(f0, fpi, g0, gpi) -> complex:
    """
    Boundary term [f, g] = -i f1 conj(g1) |_0^pi + i f2 conj(g2) |_0^pi of the Lagrange identity
    <l_P f, g> - <f, l_{P*} g> = [f, g].
    :param f0: f(0)
    :param fpi: f(pi)
    :param g0: g(0)
    :param gpi: g(pi)
    :return: Boundary term
    :rtype: complex
    """
    f0, fpi, g0, gpi = (np.asarray(v, dtype=complex) for v in (f0, fpi, g0, gpi))
    first = fpi[0] * np.conj(gpi[0]) - f0[0] * np.conj(g0[0])
    second = fpi[1] * np.conj(gpi[1]) - f0[1] * np.conj(g0[1])
    return complex(-1j * first + 1j * second)


PRESET_NAMES = ("periodic", "antiperiodic", "separated", "initial", "quasiperiodic:<theta>")


def preset(name: str) -> BoundaryMatrix:
    """
    Named boundary conditions: periodic, antiperiodic, separated, initial (C = I, D = 0) and
    quasiperiodic:<theta> (C = I, D = -e^{i pi theta} I).
    """
    identity = np.eye(2)
    if name == "periodic":
        return BoundaryMatrix.from_blocks(identity, -identity, name=name)
    if name == "antiperiodic":
        return BoundaryMatrix.from_blocks(identity, identity, name=name)
    if name == "separated":
        return BoundaryMatrix([[1, 1, 0, 0], [0, 0, 1, 1]], name=name)
    if name == "initial":
        return BoundaryMatrix.from_blocks(identity, np.zeros((2, 2)), name=name)
    if name.startswith("quasiperiodic:"):
        try:
            theta = float(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"Invalid quasiperiodic parameter in '{name}'") from None
        return BoundaryMatrix.from_blocks(identity, -cmath.exp(1j * math.pi * theta) * identity, name=name)
    raise ConfigError(f"Unknown boundary preset '{name}', known presets: {', '.join(PRESET_NAMES)}")


def boundary_from_json(data: dict) -> BoundaryMatrix:
    if not isinstance(data, dict) or set(data) != {"U"}:
        raise ConfigError('Boundary JSON must be an object with the single key "U"')
    rows = data["U"]
    if not isinstance(rows, list) or len(rows) != 2 or any(not isinstance(r, list) or len(r) != 4 for r in rows):
        raise ConfigError("Boundary matrix must be given as 2 rows of 4 complex entries")
    return BoundaryMatrix([[pair_to_complex(v) for v in row] for row in rows])


def read_boundary_matrix(source) -> BoundaryMatrix:
    """
    Reads boundary conditions from "preset:<name>", a path to a JSON file {"U": [[[re, im] x4] x2]} or an already
    parsed JSON object.
    :param source: Preset reference, file name or parsed JSON
    :type source: str | dict
    :return: Boundary matrix
    :rtype: BoundaryMatrix
    """
    if isinstance(source, dict):
        return boundary_from_json(source)
    if not isinstance(source, str):
        raise ConfigError(f"Invalid boundary condition source {source!r}")
    if source.startswith("preset:"):
        return preset(source[len("preset:"):])
    return boundary_from_json(load_json(source))
