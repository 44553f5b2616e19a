"""
Eigenvalues as zeros of the characteristic determinant, localized by the argument principle around the unperturbed
lattice lambda_n^0, refined by Newton's method and numbered like the lattice.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bcond import BoundaryMatrix, ModelSpectrum, unperturbed_spectrum, require_regular, adjoint_bc
from .chardet import char_det_batch, delta_scale
from .error_handling import (ZeroOnContour, NonConvergedWinding, CountMismatch, ConfigError, DiracError,
                             print_debug, print_warning)
from .potential import PotentialSpec, Mesh, build_mesh, gauge_reduce, adjoint_mesh, adjoint_potential
from .settings import (GLOBAL_DEBUG, ZERO_ON_CONTOUR_TOL, WINDING_INTEGER_TOL, MAX_CONTOUR_NODES, MIN_CONTOUR_NODES,
                       NEWTON_MAX_ITERS, NEWTON_STEP_TOL, NEWTON_RESIDUAL_TOL, MULTIPLICITY_RADIUS, MAX_SWEEP_GROUPS)

CSV_HEADER = ["n", "re", "im", "re0", "im0", "mult", "residual", "distance"]


@dataclass(frozen=True)
class EigenvalueRecord:
    n: int
    lam: complex
    lam0: complex
    multiplicity: int
    residual: float

    @property
    def distance(self) -> float:
        return abs(self.lam - self.lam0)

    def to_row(self) -> list:
        return [self.n, self.lam.real, self.lam.imag, self.lam0.real, self.lam0.imag, self.multiplicity,
                self.residual, self.distance]

    def to_json(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "lambda0": self.lam0, "multiplicity": self.multiplicity,
                "residual": self.residual}


class Contour:
    def __init__(self, kind: str, center: complex = 0j, radius: float = 0.0,
                 corners: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0), nodes: int = MIN_CONTOUR_NODES):
        """
        Closed, positively oriented contour: a circle or an axis-parallel rectangle.
        :param kind: "circle" or "rectangle"
        :type kind: str
        :param center: Circle center
        :type center: complex
        :param radius: Circle radius
        :type radius: float
        :param corners: Rectangle (re0, re1, im0, im1)
        :type corners: tuple[float, float, float, float]
        :param nodes: Initial number of nodes
        :type nodes: int
        """
        if kind == "circle" and radius <= 0:
            raise ConfigError(f"Circle needs a positive radius, got {radius}")
        if kind == "rectangle" and not (corners[0] < corners[1] and corners[2] < corners[3]):
            raise ConfigError(f"Rectangle needs re0 < re1 and im0 < im1, got {corners}")
        if kind not in ("circle", "rectangle"):
            raise ConfigError(f"Unknown contour kind '{kind}'")
        self.kind = kind
        self.center = complex(center)
        self.radius = float(radius)
        self.corners = tuple(float(c) for c in corners)
        self.nodes = int(nodes)

    @classmethod
    def circle(cls, center: complex, radius: float, nodes: int = MIN_CONTOUR_NODES) -> "Contour":
        return cls("circle", center=center, radius=radius, nodes=nodes)

    @classmethod
    def rectangle(cls, re0: float, re1: float, im0: float, im1: float, nodes: int = MIN_CONTOUR_NODES) -> "Contour":
        return cls("rectangle", corners=(re0, re1, im0, im1), nodes=nodes)

    def points(self, t) -> np.ndarray:
        """
        Points at curve parameters t in [0, 1), counterclockwise.
        """
        t = np.asarray(t, dtype=float)
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * t)
        re0, re1, im0, im1 = self.corners
        w, h = re1 - re0, im1 - im0
        s = t * 2 * (w + h)
        return np.select([s < w, s < w + h, s < 2 * w + h],
                         [re0 + s + 1j * im0, re1 + 1j * (im0 + s - w), re1 - (s - w - h) + 1j * im1],
                         re0 + 1j * (im1 - (s - 2 * w - h)))

    def contains(self, z: complex) -> bool:
        if self.kind == "circle":
            return abs(z - self.center) < self.radius
        re0, re1, im0, im1 = self.corners
        return re0 < z.real < re1 and im0 < z.imag < im1

    def __str__(self) -> str:
        if self.kind == "circle":
            return f"circle(center={self.center:.6g}, radius={self.radius:.6g})"
        return "rectangle(re=[{:.6g}, {:.6g}], im=[{:.6g}, {:.6g}])".format(*self.corners)


class DeltaFunction:
    """
    Delta(lam) of a fixed operator, evaluated in batches.
    """

    def __init__(self, U: BoundaryMatrix, P: PotentialSpec, mesh: Mesh, residual_tol: float = NEWTON_RESIDUAL_TOL):
        self.U = U
        self.P = P
        self.mesh = mesh
        self.residual_tol = residual_tol  # relative to delta_scale
        self.evaluations = 0

    def __call__(self, lams, with_derivative: bool = False):
        lams = np.asarray(lams, dtype=complex)
        self.evaluations += lams.size
        delta, d_delta, _ = char_det_batch(self.U, self.P, lams, self.mesh, with_derivative)
        return delta, d_delta

    def scale(self, lams) -> np.ndarray:
        return delta_scale(self.U, lams)


def winding_numbers(delta: DeltaFunction, contours: list[Contour]) -> list:
    """
    Zero counts inside several contours by phase accumulation of Delta. The node count of each contour is doubled
    until every phase increment is below pi/2. Failures are returned in place of the count.
    :param delta: Delta of the operator
    :type delta: DeltaFunction
    :param contours: Contours
    :type contours: list[Contour]
    :return: Zero count or the raised DiracError per contour
    :rtype: list[int | DiracError]
    """
    if not contours:
        return []
    results: list = [None] * len(contours)
    counts = [c.nodes for c in contours]
    flat, _ = delta(np.concatenate([c.points(np.arange(k) / k) for c, k in zip(contours, counts)]))
    values = np.split(flat, np.cumsum(counts)[:-1])
    active = list(range(len(contours)))
    while active:
        refine = []
        for i in active:
            v = values[i]
            magnitude = np.abs(v)
            if np.min(magnitude) < ZERO_ON_CONTOUR_TOL * np.max(magnitude):
                results[i] = ZeroOnContour(f"Delta vanishes numerically on {contours[i]}")
                continue
            increments = np.angle(np.roll(v, -1) / v)
            if np.max(np.abs(increments)) < math.pi / 2:
                winding = float(np.sum(increments)) / (2 * math.pi)
                if abs(winding - round(winding)) > WINDING_INTEGER_TOL:
                    results[i] = NonConvergedWinding(f"Winding {winding} on {contours[i]} is not an integer")
                else:
                    results[i] = int(round(winding))
                continue
            if 2 * counts[i] > MAX_CONTOUR_NODES:
                results[i] = NonConvergedWinding(f"More than {MAX_CONTOUR_NODES} nodes needed on {contours[i]}")
                continue
            refine.append(i)
        if not refine:
            break
        new_points = [contours[i].points((2 * np.arange(counts[i]) + 1) / (2 * counts[i])) for i in refine]
        flat, _ = delta(np.concatenate(new_points))
        new_values = np.split(flat, np.cumsum([len(p) for p in new_points])[:-1])
        for i, odd in zip(refine, new_values):
            merged = np.empty(2 * counts[i], dtype=complex)
            merged[0::2] = values[i]
            merged[1::2] = odd
            values[i] = merged
            counts[i] *= 2
        active = refine
    return results


def count_zeros(U: BoundaryMatrix, P: PotentialSpec, contour: Contour, mesh: Mesh | None = None) -> int:
    """
    Number of eigenvalues (with multiplicity) inside the contour.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param contour: Contour without eigenvalues on it
    :type contour: Contour
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :return: Zero count
    :rtype: int
    """
    require_regular(U)
    result = winding_numbers(DeltaFunction(U, P, build_mesh(P) if mesh is None else mesh), [contour])[0]
    if isinstance(result, DiracError):
        raise result
    return result


def newton(delta: DeltaFunction, starts, multiplicity: int = 1, deflate=None, max_iter: int = NEWTON_MAX_ITERS):
    """
    Damped Newton iteration on Delta for many starting points at once. With deflate, the iteration runs on
    Delta(z) / (z - deflate) instead. The step is halved whenever the residual grows.
    :return: (zeros, converged mask)
    :rtype: tuple[np.ndarray, np.ndarray]
    """
    z = np.array(starts, dtype=complex).reshape(-1)
    w = None if deflate is None else np.array(deflate, dtype=complex).reshape(-1)
    converged = np.zeros(z.size, dtype=bool)
    failed = np.zeros(z.size, dtype=bool)

    def residual(values, d_values, points, index):
        if w is None:
            return values, d_values
        shift = points - w[index]
        g = values / shift
        return g, (d_values - g) / shift

    f, df = delta(z, with_derivative=True)
    for _ in range(max_iter):
        index = np.flatnonzero(~converged & ~failed)
        if index.size == 0:
            break
        g, dg = residual(f[index], df[index], z[index], index)
        exact = g == 0
        converged[index[exact]] = True
        index, g, dg = index[~exact], g[~exact], dg[~exact]
        bad = (dg == 0) | ~np.isfinite(dg) | ~np.isfinite(g)
        failed[index[bad]] = True
        index, g, dg = index[~bad], g[~bad], dg[~bad]
        if index.size == 0:
            break
        step = multiplicity * g / dg
        trial = z[index] - step
        f_trial, df_trial = delta(trial, with_derivative=True)
        g_trial, _ = residual(f_trial, df_trial, trial, index)
        worse = np.abs(g_trial) > np.abs(g)
        if np.any(worse):
            step[worse] *= 0.5
            trial[worse] = z[index[worse]] - step[worse]
            f_half, df_half = delta(trial[worse], with_derivative=True)
            f_trial[worse], df_trial[worse] = f_half, df_half
        z[index] = trial
        f[index], df[index] = f_trial, df_trial
        small_step = np.abs(step) < NEWTON_STEP_TOL * (1 + np.abs(trial))
        # near the deflated zero Delta itself is small, only the step decides there
        small_residual = (np.abs(f_trial) <= delta.residual_tol * delta.scale(trial)) if w is None else False
        converged[index[small_step | small_residual]] = True
    return z, converged


def muller(delta: DeltaFunction, center: complex, radius: float, max_iter: int = 100) -> complex | None:
    """
    Muller's method started on three points around center; returns None without convergence.
    """
    points = [center - radius / 2, center + radius / 2, center + 0.5j * radius]
    values = list(delta(np.array(points))[0])
    for _ in range(max_iter):
        x0, x1, x2 = points
        f0, f1, f2 = values
        h1, h2 = x1 - x0, x2 - x1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            return None
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        root = np.sqrt(b * b - 4 * f2 * a)
        denominator = b + root if abs(b + root) >= abs(b - root) else b - root
        if denominator == 0:
            return None
        step = -2 * f2 / denominator
        x3 = x2 + step
        points = [x1, x2, x3]
        values = [f1, f2, complex(delta(np.array([x3]))[0][0])]
        if abs(step) < NEWTON_STEP_TOL * (1 + abs(x3)) or abs(values[-1]) <= delta.residual_tol * float(delta.scale(x3)):
            return complex(x3)
    return None


@dataclass
class _Group:
    gid: int
    indices: tuple[int, ...]
    center: complex
    radius: float
    zeros: list[complex] = field(default_factory=list)
    good: bool = False


class _Lattice:
    """
    Groups of unperturbed eigenvalues: index pairs (2g, 2g+1) when both series coincide, single indices otherwise.
    """

    def __init__(self, model: ModelSpectrum, gamma: complex):
        self.model = model
        self.gamma = gamma
        self.doubled = model.doubled

    def lam0(self, n: int) -> complex:
        return self.model.lambda0(n) + self.gamma

    def group_id(self, n: int) -> int:
        return n // 2 if self.doubled else n

    def indices(self, gid: int) -> tuple[int, ...]:
        return (2 * gid, 2 * gid + 1) if self.doubled else (gid,)

    def center(self, gid: int) -> complex:
        return self.lam0(self.indices(gid)[0])

    def radius(self, gid: int) -> float:
        c = self.center(gid)
        gap = min(abs(c - self.center(gid - 1)), abs(c - self.center(gid + 1)), 2.0)
        return min(0.25, gap / 4)


def lattice_for(U: BoundaryMatrix, P: PotentialSpec) -> tuple[ModelSpectrum, complex]:
    """
    Unperturbed spectrum guiding the search and the shift gamma: for potentials with a diagonal part the lattice of
    the gauge-reduced boundary conditions, shifted by gamma.
    """
    if P.is_off_diagonal:
        return unperturbed_spectrum(U), 0j
    reduced = gauge_reduce(P, U)
    return unperturbed_spectrum(reduced.boundary), reduced.gamma


class SpectrumSolver:
    def __init__(self, U: BoundaryMatrix, P: PotentialSpec, mesh: Mesh, residual_tol: float = NEWTON_RESIDUAL_TOL,
                 debug: bool = GLOBAL_DEBUG):
        """
        Keeps the localized groups of one operator so that successive index ranges reuse earlier work.
        """
        require_regular(U)
        self.delta = DeltaFunction(U, P, mesh, residual_tol)
        model, gamma = lattice_for(U, P)
        self.lattice = _Lattice(model, gamma)
        self.groups: dict[int, _Group] = {}
        self.assigned: dict[int, complex] = {}
        self.debug = debug

    # disk counts and refinement

    def ensure_groups(self, gids) -> None:
        new = [g for g in gids if g not in self.groups]
        if not new:
            return
        for g in new:
            self.groups[g] = _Group(gid=g, indices=self.lattice.indices(g), center=self.lattice.center(g),
                                    radius=self.lattice.radius(g))
        pending = list(new)
        counts: dict[int, int] = {}
        for factor in (1.0, 0.9, 0.8):
            if not pending:
                break
            contours = [Contour.circle(self.groups[g].center, factor * self.groups[g].radius) for g in pending]
            results = winding_numbers(self.delta, contours)
            retry = []
            for g, result, contour in zip(pending, results, contours):
                if isinstance(result, ZeroOnContour):
                    retry.append(g)
                elif isinstance(result, DiracError):
                    raise result
                else:
                    counts[g] = result
                    self.groups[g].radius = contour.radius
            pending = retry
        good = [g for g in new if counts.get(g) == len(self.groups[g].indices)]
        self._refine([self.groups[g] for g in good])
        for g in good:
            group = self.groups[g]
            if group.good:
                for n, z in zip(group.indices, group.zeros):
                    self.assigned[n] = z
        if self.debug:
            bad = [g for g in new if not self.groups[g].good]
            print_debug(f"{len(new)} groups localized, {len(bad)} need the central sweep: {bad}")

    def _inside(self, group: _Group, z: complex) -> bool:
        return abs(z - group.center) < group.radius

    def _refine(self, groups: list[_Group]) -> None:
        if not groups:
            return
        first, ok = newton(self.delta, [g.center for g in groups])
        for group, z, converged in zip(groups, first, ok):
            if not (converged and self._inside(group, z)):
                z = muller(self.delta, group.center, group.radius / 2)
                if z is None or not self._inside(group, z):
                    located = self._locate(self._square(group.center, group.radius), len(group.indices))
                    if located and self._inside(group, located[0][0]):
                        z = located[0][0]
                    else:
                        continue
            group.zeros = [complex(z)]
        singles = [g for g in groups if len(g.indices) == 1 and g.zeros]
        for group in singles:
            group.good = True
        pairs = [g for g in groups if len(g.indices) == 2 and g.zeros]
        if not pairs:
            return
        tiny = [Contour.circle(g.zeros[0], MULTIPLICITY_RADIUS) for g in pairs]
        tiny_counts = winding_numbers(self.delta, tiny)
        doubles = [g for g, c in zip(pairs, tiny_counts) if c == 2]
        if doubles:
            polished, ok = newton(self.delta, [g.zeros[0] for g in doubles], multiplicity=2)
            for group, z, converged in zip(doubles, polished, ok):
                if converged and abs(z - group.zeros[0]) < MULTIPLICITY_RADIUS:
                    group.zeros[0] = complex(z)
                group.zeros.append(group.zeros[0])
                group.good = True
        split = [g for g, c in zip(pairs, tiny_counts) if c != 2]
        if not split:
            return
        starts = []
        for g in split:
            offset = g.center - g.zeros[0]
            starts.append(g.center + offset if abs(offset) > g.radius / 10 else g.center + g.radius / 2)
        second, ok = newton(self.delta, starts, deflate=[g.zeros[0] for g in split])
        for group, z, converged in zip(split, second, ok):
            if converged and self._inside(group, z) and abs(z - group.zeros[0]) > 1e-10:
                group.zeros.append(complex(z))
            else:
                located = self._locate(self._square(group.center, group.radius), 2)
                zeros = [z for z, mult in located for _ in range(mult)]
                if len(zeros) != 2 or not all(self._inside(group, z) for z in zeros):
                    continue
                group.zeros = zeros
            group.zeros.sort(key=lambda v: (v.real, v.imag))
            group.good = True

    @staticmethod
    def _square(center: complex, radius: float) -> tuple[float, float, float, float]:
        return center.real - radius, center.real + radius, center.imag - radius, center.imag + radius

    # quadrisection

    def _locate(self, rect: tuple[float, float, float, float], count: int, depth: int = 0) -> list[tuple[complex, int]]:
        """
        Zeros inside a rectangle known to contain count zeros, by recursive quadrisection and Newton's method.
        """
        if count <= 0:
            return []
        re0, re1, im0, im1 = rect
        size = max(re1 - re0, im1 - im0)
        center = complex(0.5 * (re0 + re1), 0.5 * (im0 + im1))
        if count == 1 and size < 0.05:
            z, ok = newton(self.delta, [center])
            if ok[0] and re0 <= z[0].real <= re1 and im0 <= z[0].imag <= im1:
                return [(complex(z[0]), 1)]
        if size < 1e-9 or depth > 60:
            z, ok = newton(self.delta, [center], multiplicity=count)
            return [(complex(z[0]) if ok[0] else center, count)]
        for shift in (0.0, 0.013, -0.017, 0.029, -0.031):
            mid_re = 0.5 * (re0 + re1) + shift * (re1 - re0)
            mid_im = 0.5 * (im0 + im1) + shift * (im1 - im0)
            parts = [(re0, mid_re, im0, mid_im), (mid_re, re1, im0, mid_im),
                     (re0, mid_re, mid_im, im1), (mid_re, re1, mid_im, im1)]
            results = winding_numbers(self.delta, [Contour.rectangle(*p) for p in parts])
            if all(isinstance(r, int) for r in results) and sum(results) == count:
                found = []
                for part, sub_count in zip(parts, results):
                    found.extend(self._locate(part, sub_count, depth + 1))
                return found
        raise CountMismatch(f"Quadrisection of {rect} could not separate {count} zeros")

    # central sweep

    def _rectangle_count(self, re0: float, re1: float, alpha: float):
        for attempt, shift in enumerate((0.0, 0.05, -0.05, 0.1, -0.1, 0.15)):
            a = alpha * (1 + 0.01 * attempt)
            rect = (re0 - shift, re1 + shift, -a, a)
            result = winding_numbers(self.delta, [Contour.rectangle(*rect)])[0]
            if isinstance(result, int):
                return result, rect
            if not isinstance(result, ZeroOnContour):
                raise result
        raise ZeroOnContour(f"Sweep rectangle re=[{re0}, {re1}] always meets a zero")

    def _stable_count(self, re0: float, re1: float, alpha: float):
        count, rect = self._rectangle_count(re0, re1, alpha)
        while True:
            if alpha > 64:
                raise CountMismatch(f"Zero count in the central strip did not stabilize up to |Im| = {alpha}")
            wider, wider_rect = self._rectangle_count(re0, re1, 2 * alpha)
            if wider == count:
                return count, rect
            alpha *= 2
            count, rect = wider, wider_rect

    def resolve_bad(self, gids) -> None:
        bad = sorted(g for g in gids if not self.groups[g].good)
        runs: list[list[int]] = []
        for g in bad:
            if runs and runs[-1][-1] == g - 1:
                runs[-1].append(g)
            else:
                runs.append([g])
        for run in runs:
            if all(self.groups[g].good for g in run):
                continue
            self._sweep(run[0], run[-1])

    def _sweep(self, left: int, right: int) -> None:
        base_alpha = 1.0 + max(abs(self.lattice.center(g).imag) for g in range(left - 1, right + 2))
        for _ in range(MAX_SWEEP_GROUPS):
            self.ensure_groups([left - 1, right + 1])
            while not self.groups[left - 1].good:
                left -= 1
                self.ensure_groups([left - 1])
            while not self.groups[right + 1].good:
                right += 1
                self.ensure_groups([right + 1])
            re0 = 0.5 * (self.lattice.center(left - 1) + self.lattice.center(left)).real
            re1 = 0.5 * (self.lattice.center(right) + self.lattice.center(right + 1)).real
            span = [self.groups[g] for g in range(left, right + 1)]
            bad_indices = sorted(n for g in span if not g.good for n in g.indices)
            good_zeros = [z for g in span if g.good for z in g.zeros]
            total, rect = self._stable_count(re0, re1, base_alpha)
            if total - len(good_zeros) == len(bad_indices):
                self._assign_sweep(rect, total, bad_indices, good_zeros)
                for g in span:
                    g.good = True
                return
            if self.debug:
                print_debug(f"Sweep over groups {left}..{right}: {total} zeros for {len(bad_indices)} free indices, growing")
            left -= 1
            right += 1
        raise CountMismatch(f"Central sweep did not match the zero count after {MAX_SWEEP_GROUPS} groups")

    def _assign_sweep(self, rect, total: int, bad_indices: list[int], good_zeros: list[complex]) -> None:
        located = [z for z, mult in self._locate(rect, total) for _ in range(mult)]
        remaining = list(good_zeros)
        leftovers = []
        for z in located:
            match = next((k for k, w in enumerate(remaining) if abs(w - z) < 1e-6 * (1 + abs(z))), None)
            if match is None:
                leftovers.append(z)
            else:
                remaining.pop(match)
        if len(leftovers) != len(bad_indices):
            raise CountMismatch(f"{len(leftovers)} located zeros for {len(bad_indices)} indices in {rect}")
        leftovers.sort(key=lambda v: (v.real, v.imag))
        for n, z in zip(bad_indices, leftovers):
            self.assigned[n] = z
            group = self.groups[self.lattice.group_id(n)]
            group.zeros = [self.assigned[k] for k in group.indices if k in self.assigned]

    # records

    def records(self, n_min: int, n_max: int) -> list[EigenvalueRecord]:
        indices = list(range(n_min, n_max + 1))
        lams = np.array([self.assigned[n] for n in indices], dtype=complex)
        distinct: list[complex] = []
        for z in lams:
            if not any(abs(z - w) <= 1e-10 * (1 + abs(z)) for w in distinct):
                distinct.append(z)
        results = winding_numbers(self.delta, [Contour.circle(z, MULTIPLICITY_RADIUS) for z in distinct])
        multiplicity = {}
        for z, result in zip(distinct, results):
            if isinstance(result, int) and result > 0:
                multiplicity[z] = result
            else:
                print_warning(f"Multiplicity of {z:.6g} could not be counted ({result}), assuming 1")
                multiplicity[z] = 1
        residuals, _ = self.delta(lams)
        records = []
        for n, z, res in zip(indices, lams, np.abs(residuals)):
            key = next(w for w in distinct if abs(z - w) <= 1e-10 * (1 + abs(z)))
            records.append(EigenvalueRecord(n=n, lam=complex(z), lam0=complex(self.lattice.lam0(n)),
                                            multiplicity=multiplicity[key], residual=float(res)))
        return records


def compute_spectrum(U: BoundaryMatrix, P: PotentialSpec, n_min: int, n_max: int, mesh: Mesh | None = None,
                     debug: bool = GLOBAL_DEBUG, residual_tol: float = NEWTON_RESIDUAL_TOL) -> list[EigenvalueRecord]:
    """
    Eigenvalues lambda_n for n_min <= n <= n_max, numbered like the unperturbed lattice. Zeros are counted in the
    disk of radius min(1/4, gap/4) around each lattice group and refined by Newton's method (Muller and
    quadrisection as fallbacks). Groups whose disk count does not match are resolved by a sweep over a central
    rectangle, where leftover zeros are numbered by increasing real, then imaginary part.
    :param U: Regular boundary matrix
    :type U: BoundaryMatrix
    :param P: Potential
    :type P: PotentialSpec
    :param n_min: Smallest index
    :type n_min: int
    :param n_max: Largest index
    :type n_max: int
    :param mesh: Mesh for P, built with the defaults if omitted
    :type mesh: Mesh | None
    :param debug: True if debug information should be printed
    :type debug: bool
    :param residual_tol: Newton stops once |Delta| is below residual_tol times the scale of Delta
    :type residual_tol: float
    :return: One record per index
    :rtype: list[EigenvalueRecord]
    """
    if n_min > n_max:
        raise ConfigError(f"Empty index range [{n_min}, {n_max}]")
    if debug:
        start_time = time.perf_counter()
    mesh = build_mesh(P) if mesh is None else mesh
    solver = SpectrumSolver(U, P, mesh, residual_tol, debug=debug)
    gids = range(solver.lattice.group_id(n_min), solver.lattice.group_id(n_max) + 1)
    solver.ensure_groups(gids)
    solver.resolve_bad(gids)
    records = solver.records(n_min, n_max)
    if debug:
        print_debug(f"{len(records)} eigenvalues computed in {(time.perf_counter() - start_time):.6f} seconds "
                    f"with {solver.delta.evaluations} evaluations of Delta")
    return records


def adjoint_spectrum(U: BoundaryMatrix, P: PotentialSpec, n_min: int, n_max: int, mesh: Mesh | None = None,
                     debug: bool = GLOBAL_DEBUG, residual_tol: float = NEWTON_RESIDUAL_TOL) -> list[EigenvalueRecord]:
    """
    Spectrum of the adjoint operator with potential P* and boundary matrix U*. A mesh given for P is carried over
    to P* cell by cell.
    """
    mesh = build_mesh(adjoint_potential(P)) if mesh is None else adjoint_mesh(mesh)
    return compute_spectrum(adjoint_bc(U), mesh.potential, n_min, n_max, mesh, debug, residual_tol)


def strip_width(records: list[EigenvalueRecord]) -> float:
    """
    Width alpha_0 of the smallest strip |Im lam| <= alpha_0 containing all computed eigenvalues.
    """
    return max((abs(r.lam.imag) for r in records), default=0.0)


def windowed_sup(records: list[EigenvalueRecord], low: int, high: int) -> float:
    """
    sup of |lambda_n - lambda_n^0| over low <= |n| <= high.
    """
    values = [r.distance for r in records if low <= abs(r.n) <= high]
    if not values:
        raise ConfigError(f"No eigenvalues with {low} <= |n| <= {high}")
    return max(values)


def pairing_decay(records: list[EigenvalueRecord], inner: tuple[int, int] = (5, 15),
                  outer: tuple[int, int] = (30, 60)) -> tuple[float, float]:
    """
    Windowed sups of |lambda_n - lambda_n^0| over an inner and an outer index window.
    """
    return windowed_sup(records, *inner), windowed_sup(records, *outer)


def group_of(U: BoundaryMatrix, P: PotentialSpec, n: int) -> tuple[tuple[int, ...], complex, float]:
    """
    Indices, center and disk radius of the lattice group labelled n: the pair (2n, 2n+1) when the unperturbed
    eigenvalues are double, the single index n otherwise.
    """
    model, gamma = lattice_for(U, P)
    lattice = _Lattice(model, gamma)
    return lattice.indices(n), lattice.center(n), lattice.radius(n)
