"""
Potentials P = [[p1, p2], [p3, p4]] on [0, pi], integration meshes built from exact channel antiderivatives and the
gauge reduction to an off-diagonal potential.
"""
import math
import time
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

from .bcond import BoundaryMatrix, require_regular
from .error_handling import SingularPoint, ConfigError, print_debug
from .jsonio import load_json, pair_to_complex, complex_to_pair
from .settings import GLOBAL_DEBUG, DEFAULT_MESH_CELLS, DEFAULT_MESH_TOL, DEFAULT_REDUCED_SAMPLES

CHANNEL_NAMES = ("p1", "p2", "p3", "p4")


class Channel:
    """
    One entry of the potential matrix. Subclasses are immutable and hashable.
    """
    kind = ""

    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    def antiderivative(self, x) -> np.ndarray:
        """
        Integral of the channel from 0 to x.
        """
        raise NotImplementedError

    def conjugate(self) -> "Channel":
        raise NotImplementedError

    def params_json(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params_json()}

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def is_constant(self) -> bool:
        return False

    @property
    def singular_alpha(self) -> float:
        """
        Largest exponent alpha of an x^{-alpha} part, 0 for bounded channels.
        """
        return 0.0


def _as_x(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ZeroChannel(Channel):
    kind = "zero"

    def evaluate(self, x):
        return np.zeros_like(_as_x(x), dtype=complex)

    def antiderivative(self, x):
        return np.zeros_like(_as_x(x), dtype=complex)

    def conjugate(self):
        return self

    @property
    def is_zero(self):
        return True

    @property
    def is_constant(self):
        return True


ZERO = ZeroChannel()


@dataclass(frozen=True)
class ConstantChannel(Channel):
    value: complex
    kind = "constant"

    def evaluate(self, x):
        return np.full_like(_as_x(x), self.value, dtype=complex)

    def antiderivative(self, x):
        return self.value * _as_x(x).astype(complex)

    def conjugate(self):
        return ConstantChannel(complex(self.value).conjugate())

    def params_json(self):
        return {"value": complex_to_pair(self.value)}

    @property
    def is_zero(self):
        return self.value == 0

    @property
    def is_constant(self):
        return True


@dataclass(frozen=True)
class PolynomialChannel(Channel):
    """
    Polynomial sum_k coeffs[k] x^k.
    """
    coeffs: tuple[complex, ...]
    kind = "polynomial"

    @cached_property
    def _poly(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(np.array(self.coeffs, dtype=complex))

    def evaluate(self, x):
        return self._poly(_as_x(x)).astype(complex)

    def antiderivative(self, x):
        return self._poly.integ(lbnd=0)(_as_x(x)).astype(complex)

    def conjugate(self):
        return PolynomialChannel(tuple(complex(c).conjugate() for c in self.coeffs))

    def params_json(self):
        return {"coeffs": [complex_to_pair(c) for c in self.coeffs]}

    @property
    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    @property
    def is_constant(self):
        return all(c == 0 for c in self.coeffs[1:])


@dataclass(frozen=True)
class TrigChannel(Channel):
    """
    Trigonometric polynomial sum of amplitude * e^{i k x} over the (amplitude, k) terms.
    """
    terms: tuple[tuple[complex, int], ...]
    kind = "trig"

    def evaluate(self, x):
        x = _as_x(x)
        result = np.zeros_like(x, dtype=complex)
        for amplitude, k in self.terms:
            result += amplitude * np.exp(1j * k * x)
        return result

    def antiderivative(self, x):
        x = _as_x(x)
        result = np.zeros_like(x, dtype=complex)
        for amplitude, k in self.terms:
            if k == 0:
                result += amplitude * x
            else:
                result += amplitude * np.expm1(1j * k * x) / (1j * k)
        return result

    def conjugate(self):
        return TrigChannel(tuple((complex(a).conjugate(), -k) for a, k in self.terms))

    def params_json(self):
        return {"terms": [{"amplitude": complex_to_pair(a), "k": int(k)} for a, k in self.terms]}

    @property
    def is_zero(self):
        return all(a == 0 for a, _ in self.terms)

    @property
    def is_constant(self):
        return all(a == 0 or k == 0 for a, k in self.terms)


@dataclass(frozen=True)
class PowerChannel(Channel):
    """
    c * x^{-alpha} with 0 <= alpha < 1.
    """
    c: complex
    alpha: float
    kind = "power"

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ConfigError(f"Power channel needs 0 <= alpha < 1 to be integrable, got {self.alpha}")

    def evaluate(self, x):
        x = _as_x(x)
        if self.alpha > 0 and np.any(x <= 0):
            raise SingularPoint(f"x^(-{self.alpha}) evaluated at x = 0")
        return self.c * np.power(x, -self.alpha).astype(complex)

    def antiderivative(self, x):
        x = _as_x(x)
        return self.c * np.power(np.maximum(x, 0.0), 1 - self.alpha).astype(complex) / (1 - self.alpha)

    def conjugate(self):
        return PowerChannel(complex(self.c).conjugate(), self.alpha)

    def params_json(self):
        return {"c": complex_to_pair(self.c), "alpha": float(self.alpha)}

    @property
    def is_zero(self):
        return self.c == 0

    @property
    def is_constant(self):
        return self.alpha == 0 or self.c == 0

    @property
    def singular_alpha(self):
        return 0.0 if self.c == 0 else float(self.alpha)


def _pl_antiderivative(nodes: np.ndarray, values: np.ndarray, cumulative: np.ndarray, x: np.ndarray) -> np.ndarray:
    # exact integral of the piecewise linear interpolant from nodes[0] to x
    k = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
    f_x = np.interp(x, nodes, values.real) + 1j * np.interp(x, nodes, values.imag)
    return cumulative[k] + 0.5 * (x - nodes[k]) * (values[k] + f_x)


def _extended_nodes(xs: tuple[float, ...], values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.array(xs, dtype=float)
    if nodes[0] > 0:
        nodes = np.concatenate([[0.0], nodes])
        values = np.concatenate([[values[0]], values])
    if nodes[-1] < math.pi:
        nodes = np.concatenate([nodes, [math.pi]])
        values = np.concatenate([values, [values[-1]]])
    return nodes, values


@dataclass(frozen=True)
class SamplesChannel(Channel):
    """
    Piecewise linear interpolant of samples at increasing nodes in [0, pi], constant beyond the first and last node.
    """
    xs: tuple[float, ...]
    values: tuple[complex, ...]
    kind = "samples"

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        if len(xs) < 2 or len(xs) != len(self.values):
            raise ConfigError("Samples channel needs at least two nodes and one value per node")
        if np.any(np.diff(xs) <= 0) or xs[0] < 0 or xs[-1] > math.pi:
            raise ConfigError("Sample nodes must be strictly increasing inside [0, pi]")

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nodes, values = _extended_nodes(self.xs, np.array(self.values, dtype=complex))
        return nodes, values, cumulative_trapezoid(values, nodes, initial=0)

    def evaluate(self, x):
        nodes, values, _ = self._table
        x = _as_x(x)
        return np.interp(x, nodes, values.real) + 1j * np.interp(x, nodes, values.imag)

    def antiderivative(self, x):
        return _pl_antiderivative(*self._table, _as_x(x))

    def conjugate(self):
        return SamplesChannel(self.xs, tuple(complex(v).conjugate() for v in self.values))

    def params_json(self):
        return {"xs": list(self.xs), "values": [complex_to_pair(v) for v in self.values]}

    @property
    def is_zero(self):
        return all(v == 0 for v in self.values)

    @property
    def is_constant(self):
        return all(v == self.values[0] for v in self.values)


@dataclass(frozen=True)
class CombinationChannel(Channel):
    """
    Linear combination sum of coef * channel over the (coef, channel) terms.
    """
    terms: tuple[tuple[complex, Channel], ...]
    kind = "combination"

    def evaluate(self, x):
        x = _as_x(x)
        return sum((coef * channel.evaluate(x) for coef, channel in self.terms), np.zeros_like(x, dtype=complex))

    def antiderivative(self, x):
        x = _as_x(x)
        return sum((coef * channel.antiderivative(x) for coef, channel in self.terms), np.zeros_like(x, dtype=complex))

    def conjugate(self):
        return CombinationChannel(tuple((complex(c).conjugate(), ch.conjugate()) for c, ch in self.terms))

    def params_json(self):
        return {"terms": [{"coef": complex_to_pair(c), "channel": ch.to_json()} for c, ch in self.terms]}

    @property
    def is_zero(self):
        return all(c == 0 or ch.is_zero for c, ch in self.terms)

    @property
    def is_constant(self):
        return all(c == 0 or ch.is_constant for c, ch in self.terms)

    @property
    def singular_alpha(self):
        return max((ch.singular_alpha for c, ch in self.terms if c != 0), default=0.0)


@dataclass(frozen=True)
class ModulatedChannel(Channel):
    """
    base(x) * phase(x) with a piecewise linear sampled phase. Integrals use product integration: on every sample
    interval the phase is frozen at the interval midpoint and the exact antiderivative of the base is used.
    """
    base: Channel
    xs: tuple[float, ...]
    phase: tuple[complex, ...]
    kind = "modulated"

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nodes, phase = _extended_nodes(self.xs, np.array(self.phase, dtype=complex))
        mid_phase = self._phase_at(0.5 * (nodes[:-1] + nodes[1:]), nodes, phase)
        increments = mid_phase * np.diff(self.base.antiderivative(nodes))
        return nodes, phase, np.concatenate([[0j], np.cumsum(increments)])

    @staticmethod
    def _phase_at(x, nodes, phase):
        return np.interp(x, nodes, phase.real) + 1j * np.interp(x, nodes, phase.imag)

    def evaluate(self, x):
        nodes, phase, _ = self._table
        x = _as_x(x)
        return self.base.evaluate(x) * self._phase_at(x, nodes, phase)

    def antiderivative(self, x):
        nodes, phase, cumulative = self._table
        x = _as_x(x)
        k = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
        mid_phase = self._phase_at(0.5 * (nodes[k] + x), nodes, phase)
        return cumulative[k] + mid_phase * (self.base.antiderivative(x) - self.base.antiderivative(nodes[k]))

    def conjugate(self):
        return ModulatedChannel(self.base.conjugate(), self.xs, tuple(complex(v).conjugate() for v in self.phase))

    def params_json(self):
        return {"base": self.base.to_json(), "xs": list(self.xs), "phase": [complex_to_pair(v) for v in self.phase]}

    @property
    def is_zero(self):
        return self.base.is_zero

    @property
    def is_constant(self):
        return self.base.is_zero or (self.base.is_constant and all(v == self.phase[0] for v in self.phase))

    @property
    def singular_alpha(self):
        return self.base.singular_alpha


def combine(terms) -> Channel:
    """
    Linear combination of channels, simplified to zero or constant channels where possible.
    :param terms: Iterable of (coefficient, channel)
    :return: The combined channel
    :rtype: Channel
    """
    terms = tuple((complex(c), ch) for c, ch in terms if c != 0 and not ch.is_zero)
    if not terms:
        return ZERO
    if all(isinstance(ch, ConstantChannel) for _, ch in terms):
        return ConstantChannel(sum(c * ch.value for c, ch in terms))
    if len(terms) == 1 and terms[0][0] == 1:
        return terms[0][1]
    return CombinationChannel(terms)


@dataclass(frozen=True)
class PotentialSpec:
    p1: Channel = ZERO
    p2: Channel = ZERO
    p3: Channel = ZERO
    p4: Channel = ZERO

    @property
    def channels(self) -> tuple[Channel, Channel, Channel, Channel]:
        return self.p1, self.p2, self.p3, self.p4

    def channel(self, name) -> Channel:
        if name in (1, 2, 3, 4):
            return self.channels[name - 1]
        if name in CHANNEL_NAMES:
            return getattr(self, name)
        raise ConfigError(f"Unknown channel {name!r}")

    @property
    def is_zero(self) -> bool:
        return all(ch.is_zero for ch in self.channels)

    @property
    def is_constant(self) -> bool:
        return all(ch.is_constant for ch in self.channels)

    @property
    def is_off_diagonal(self) -> bool:
        return self.p1.is_zero and self.p4.is_zero

    @property
    def singular_alpha(self) -> float:
        return max(ch.singular_alpha for ch in self.channels)

    def evaluate(self, x) -> np.ndarray:
        """
        Matrix values at the points x, shape x.shape + (2, 2).
        """
        x = _as_x(x)
        out = np.empty(x.shape + (2, 2), dtype=complex)
        for k, ch in enumerate(self.channels):
            out[..., k // 2, k % 2] = ch.evaluate(x)
        return out

    def antiderivatives(self, x) -> np.ndarray:
        """
        Integrals of the four channels from 0 to x, shape x.shape + (4,).
        """
        x = _as_x(x)
        return np.stack([ch.antiderivative(x) for ch in self.channels], axis=-1)

    def adjoint(self) -> "PotentialSpec":
        return adjoint_potential(self)

    @classmethod
    def from_q_form(cls, q1: Channel = ZERO, q2: Channel = ZERO, q3: Channel = ZERO, q4: Channel = ZERO) -> "PotentialSpec":
        """
        Potential of the similar system B y' + P y for [[0,-1],[1,0]] u' + Q u with u = S y, S = 1/2 [[1,1],[i,-i]],
        that is P = S^{-1} Q S.
        """
        i = 1j
        return cls(p1=combine([(0.5, q1), (0.5 * i, q2), (-0.5 * i, q3), (0.5, q4)]),
                   p2=combine([(0.5, q1), (-0.5 * i, q2), (-0.5 * i, q3), (-0.5, q4)]),
                   p3=combine([(0.5, q1), (0.5 * i, q2), (0.5 * i, q3), (-0.5, q4)]),
                   p4=combine([(0.5, q1), (-0.5 * i, q2), (0.5 * i, q3), (0.5, q4)]))

    def to_json(self) -> dict:
        return {name: ch.to_json() for name, ch in zip(CHANNEL_NAMES, self.channels) if not isinstance(ch, ZeroChannel)}

    def __str__(self) -> str:
        parts = [f"{name}={ch.kind}" for name, ch in zip(CHANNEL_NAMES, self.channels) if not ch.is_zero]
        return "PotentialSpec(" + (", ".join(parts) if parts else "zero") + ")"


ZERO_POTENTIAL = PotentialSpec()


def eval_potential(P: PotentialSpec, x: float) -> np.ndarray:
    """
    Pointwise value of the potential matrix.
    :param P: Potential
    :type P: PotentialSpec
    :param x: Point in [0, pi], positive if a power channel is present
    :type x: float
    :return: 2x2 matrix
    :rtype: np.ndarray
    """
    return P.evaluate(float(x))


def channel_antiderivative(P: PotentialSpec, channel, x: float) -> complex:
    """
    Integral from 0 to x of one channel, exact for presets and for piecewise linear samples.
    :param P: Potential
    :type P: PotentialSpec
    :param channel: "p1".."p4" or 1..4
    :type channel: str | int
    :param x: Upper limit in [0, pi]
    :type x: float
    :return: Integral value
    :rtype: complex
    """
    return complex(P.channel(channel).antiderivative(float(x)))


def adjoint_potential(P: PotentialSpec) -> PotentialSpec:
    """
    Conjugate transpose P* = [[conj p1, conj p3], [conj p2, conj p4]].
    """
    return PotentialSpec(p1=P.p1.conjugate(), p2=P.p3.conjugate(), p3=P.p2.conjugate(), p4=P.p4.conjugate())


def l1_norms(P: PotentialSpec) -> tuple[float, float, float, float]:
    """
    L1 norms of the four channels on [0, pi], exact for zero, constant and power channels.
    """
    norms = []
    for ch in P.channels:
        if ch.is_zero:
            norms.append(0.0)
        elif isinstance(ch, ConstantChannel):
            norms.append(abs(ch.value) * math.pi)
        elif isinstance(ch, PowerChannel):
            norms.append(abs(ch.c) * math.pi ** (1 - ch.alpha) / (1 - ch.alpha))
        else:
            value, _ = quad(lambda t, channel=ch: abs(complex(channel.evaluate(t))), 0.0, math.pi, limit=400)
            norms.append(float(value))
    return tuple(norms)


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Cell boundaries 0 = x_0 < ... < x_m = pi and per-cell channel averages, shape (m, 4).
    """
    nodes: np.ndarray
    averages: np.ndarray
    potential: PotentialSpec = field(repr=False)

    @property
    def cells(self) -> int:
        return len(self.nodes) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def average_matrices(self) -> np.ndarray:
        """
        Cell averages as 2x2 matrices, shape (m, 2, 2).
        """
        return self.averages.reshape(-1, 2, 2)


def _graded_nodes(alpha: float, tol: float, cells: int) -> np.ndarray:
    uniform = math.pi / cells
    width = min(tol ** (1.0 / (1.0 - alpha)), uniform)
    nodes = [0.0]
    while width < uniform and nodes[-1] + width < math.pi:
        nodes.append(nodes[-1] + width)
        width *= 2
    start = nodes[-1]
    count = max(1, math.ceil((math.pi - start) / uniform - 1e-9))
    return np.concatenate([np.array(nodes[:-1]), np.linspace(start, math.pi, count + 1)])


@lru_cache(maxsize=64)
def build_mesh(P: PotentialSpec, tol: float = DEFAULT_MESH_TOL, cells: int = DEFAULT_MESH_CELLS, debug: bool = GLOBAL_DEBUG) -> Mesh:
    """
    Integration mesh with exact cell averages. Constant potentials get a single cell, bounded potentials a uniform
    mesh and potentials with an x^{-alpha} part a mesh graded geometrically (ratio 2) toward 0 whose first cell has
    width tol^{1/(1-alpha)}.
    :param P: Potential
    :type P: PotentialSpec
    :param tol: Grading parameter, must be positive
    :type tol: float
    :param cells: Number of uniform cells
    :type cells: int
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: The mesh
    :rtype: Mesh
    """
    if tol <= 0 or cells < 1:
        raise ConfigError(f"Mesh needs tol > 0 and at least one cell, got tol={tol}, cells={cells}")
    if debug:
        start_time = time.perf_counter()
    if P.is_constant:
        nodes = np.array([0.0, math.pi])
    elif P.singular_alpha > 0:
        nodes = _graded_nodes(P.singular_alpha, tol, cells)
    else:
        nodes = np.linspace(0.0, math.pi, cells + 1)
    values = P.antiderivatives(nodes)
    averages = np.diff(values, axis=0) / np.diff(nodes)[:, None]
    nodes.setflags(write=False)
    averages.setflags(write=False)
    if debug:
        print_debug(f"Mesh with {len(nodes) - 1} cells built in {(time.perf_counter() - start_time):.6f} seconds")
    return Mesh(nodes=nodes, averages=averages, potential=P)


def adjoint_mesh(mesh: Mesh) -> Mesh:
    """
    Mesh of the adjoint potential on the same cells: averages of P* are the conjugate transposed averages of P.
    """
    averages = np.conj(mesh.averages[:, [0, 2, 1, 3]])
    averages.setflags(write=False)
    return Mesh(nodes=mesh.nodes, averages=averages, potential=adjoint_potential(mesh.potential))


@dataclass(frozen=True)
class GaugeResult:
    potential: PotentialSpec
    boundary: BoundaryMatrix
    gamma: complex


def gauge_reduce(P: PotentialSpec, U: BoundaryMatrix, samples: int = DEFAULT_REDUCED_SAMPLES) -> GaugeResult:
    """
    Similarity y = diag(e^{i phi}, e^{i psi}) y~ with phi = gamma x - int p1, psi = int p4 - gamma x removes the
    diagonal of P: the operator for (P, U) equals the one for (P~, U~) shifted by gamma = (1/2pi) int (p1 + p4).
    p2~ = p2 e^{i(psi - phi)}, p3~ = p3 e^{i(phi - psi)}, U~ = (C, e^{(i/2) int (p4 - p1)} D).
    :param P: Potential
    :type P: PotentialSpec
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param samples: Number of samples of the phase psi - phi for non-constant diagonals
    :type samples: int
    :return: Reduced potential, reduced boundary matrix and shift
    :rtype: GaugeResult
    """
    require_regular(U)
    if P.is_off_diagonal:
        return GaugeResult(potential=P, boundary=U, gamma=0j)
    int1 = complex(P.p1.antiderivative(math.pi))
    int4 = complex(P.p4.antiderivative(math.pi))
    gamma = (int1 + int4) / (2 * math.pi)
    boundary = U.scale_d(np.exp(0.5j * (int4 - int1)))
    if P.p1.is_constant and P.p4.is_constant:
        reduced = PotentialSpec(p2=P.p2, p3=P.p3)
    else:
        xs = np.linspace(0.0, math.pi, samples)
        theta = P.p4.antiderivative(xs) + P.p1.antiderivative(xs) - 2 * gamma * xs
        xs_t = tuple(float(v) for v in xs)
        p2 = P.p2 if P.p2.is_zero else ModulatedChannel(P.p2, xs_t, tuple(complex(v) for v in np.exp(1j * theta)))
        p3 = P.p3 if P.p3.is_zero else ModulatedChannel(P.p3, xs_t, tuple(complex(v) for v in np.exp(-1j * theta)))
        reduced = PotentialSpec(p2=p2, p3=p3)
    return GaugeResult(potential=reduced, boundary=boundary, gamma=gamma)


def channel_from_json(data: dict) -> Channel:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"Channel description must be an object with a 'kind', got {data!r}")
    kind = data["kind"]
    allowed = {"zero": set(), "constant": {"value"}, "polynomial": {"coeffs"}, "trig": {"terms"},
               "power": {"c", "alpha"}, "samples": {"xs", "values"}, "combination": {"terms"},
               "modulated": {"base", "xs", "phase"}}
    if kind not in allowed:
        raise ConfigError(f"Unknown channel kind '{kind}'")
    keys = set(data) - {"kind"}
    if keys != allowed[kind]:
        raise ConfigError(f"Channel of kind '{kind}' needs keys {sorted(allowed[kind])}, got {sorted(keys)}")
    try:
        if kind == "zero":
            return ZERO
        if kind == "constant":
            return ConstantChannel(pair_to_complex(data["value"]))
        if kind == "polynomial":
            return PolynomialChannel(tuple(pair_to_complex(c) for c in data["coeffs"]))
        if kind == "trig":
            return TrigChannel(tuple((pair_to_complex(t["amplitude"]), int(t["k"])) for t in data["terms"]))
        if kind == "power":
            return PowerChannel(pair_to_complex(data["c"]), float(data["alpha"]))
        if kind == "samples":
            return SamplesChannel(tuple(float(v) for v in data["xs"]), tuple(pair_to_complex(v) for v in data["values"]))
        if kind == "combination":
            return CombinationChannel(tuple((pair_to_complex(t["coef"]), channel_from_json(t["channel"])) for t in data["terms"]))
        return ModulatedChannel(channel_from_json(data["base"]), tuple(float(v) for v in data["xs"]),
                                tuple(pair_to_complex(v) for v in data["phase"]))
    except (TypeError, KeyError) as e:
        raise ConfigError(f"Malformed channel of kind '{kind}': {e}") from None


def potential_from_json(data: dict) -> PotentialSpec:
    if not isinstance(data, dict):
        raise ConfigError("Potential description must be a JSON object")
    unknown = set(data) - set(CHANNEL_NAMES)
    if unknown:
        raise ConfigError(f"Unknown potential keys {sorted(unknown)}")
    return PotentialSpec(**{name: channel_from_json(value) for name, value in data.items()})


POTENTIAL_PRESETS = {
    "zero": ZERO_POTENTIAL,
    "offdiag-one": PotentialSpec(p2=ConstantChannel(1 + 0j), p3=ConstantChannel(1 + 0j)),
    "inverse-sqrt": PotentialSpec(p2=PowerChannel(1 + 0j, 0.5)),
    "inverse-sqrt-both": PotentialSpec(p2=PowerChannel(1 + 0j, 0.5), p3=PowerChannel(1 + 0j, 0.5)),
    "smooth": PotentialSpec(p2=TrigChannel(((0.5 + 0j, 1), (0.5 + 0j, -1))), p3=PolynomialChannel((0j, 1 + 0j))),
    "diagonal-one": PotentialSpec(p1=ConstantChannel(1 + 0j)),
}


def read_potential(source) -> PotentialSpec:
    """
    Reads a potential from "preset:<name>", a path to a JSON file or an already parsed JSON object.
    Omitted channels are zero.
    :param source: Preset reference, file name or parsed JSON
    :type source: str | dict | None
    :return: Potential
    :rtype: PotentialSpec
    """
    if source is None:
        return ZERO_POTENTIAL
    if isinstance(source, dict):
        return potential_from_json(source)
    if not isinstance(source, str):
        raise ConfigError(f"Invalid potential source {source!r}")
    if source.startswith("preset:"):
        name = source[len("preset:"):]
        if name not in POTENTIAL_PRESETS:
            raise ConfigError(f"Unknown potential preset '{name}', known presets: {', '.join(POTENTIAL_PRESETS)}")
        return POTENTIAL_PRESETS[name]
    return potential_from_json(load_json(source))
