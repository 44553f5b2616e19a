import cmath
import math

import numpy as np
import pytest

from diracspec.bcond import adjoint_bc, boundary_residual, preset
from diracspec.error_handling import ConfigError, NearEigenvalue
from diracspec.potential import POTENTIAL_PRESETS, ZERO_POTENTIAL, adjoint_mesh, adjoint_potential
from diracspec.resolvent import (GridFunction, apply_resolvent, green_kernel, green_kernel_super, green_rows,
                                 kernel_matrix, make_grid, offset_grids, operator_residual, projector_deviation,
                                 spectral_projector)


def exact_solution(x):
    return np.array([np.sin(x), x * (math.pi - x)], dtype=complex)


def exact_rhs(x):
    # (l_P - i) y for p2 = p3 = 1 and y = exact_solution
    return np.array([-1j * np.cos(x) + x * (math.pi - x) - 1j * np.sin(x),
                     1j * (math.pi - 2 * x) + np.sin(x) - 1j * x * (math.pi - x)])


@pytest.mark.parametrize("kind, nodes", [("trapezoid", 17), ("simpson", 17), ("gauss", 12), ("midpoint", 9),
                                         ("trapezoid", None), ("simpson", None)])
def test_grid_weights_integrate_constants(kind, nodes):
    grid = make_grid(kind, nodes)
    assert np.sum(grid.weights) == pytest.approx(math.pi)
    assert np.all((grid.nodes >= 0) & (grid.nodes <= math.pi))


def test_grid_errors():
    with pytest.raises(ConfigError):
        make_grid("trapezoid", 1)
    with pytest.raises(ConfigError):
        make_grid("simpson", 16)
    with pytest.raises(ConfigError):
        make_grid("chebyshev", 8)


def test_offset_grids_never_coincide():
    t_grid, x_grid = offset_grids(33)
    assert t_grid.size == 33 and x_grid.size == 32
    assert np.min(np.abs(t_grid.nodes[:, None] - x_grid.nodes[None, :])) == pytest.approx(math.pi / 64)


def test_grid_function_norm():
    grid = make_grid("gauss", 16)
    f = GridFunction.from_callable(lambda x: np.array([np.ones_like(x), np.zeros_like(x)]), grid)
    assert f.norm() == pytest.approx(math.sqrt(math.pi))
    assert (2 * f).norm() == pytest.approx(2 * math.sqrt(math.pi))
    with pytest.raises(ConfigError):
        GridFunction(grid, np.zeros((2, 15), dtype=complex))


def test_green_kernel_value(separated):
    G = green_kernel(separated, ZERO_POTENTIAL, 0.5, math.pi / 4, math.pi / 2)
    assert G[0, 0] == pytest.approx(-cmath.exp(-3j * math.pi / 8) / 2, abs=1e-12)


@pytest.mark.parametrize("t, x", [(0.3, 2.0), (2.5, 1.0), (math.pi, 0.0)])
def test_minor_formula_agrees(t, x, smooth, smooth_mesh):
    for U in (preset("separated"), preset("quasiperiodic:0.3")):
        G = green_kernel(U, smooth, 0.5 + 0.3j, t, x, smooth_mesh)
        S = green_kernel_super(U, smooth, 0.5 + 0.3j, t, x, smooth_mesh)
        assert np.allclose(G, S, atol=1e-9)


@pytest.mark.parametrize("t, x", [(0.4, 1.9), (2.8, 0.6)])
def test_adjoint_kernel_is_conjugate_transpose(t, x, smooth):
    U = preset("quasiperiodic:0.3")
    lam = 1.3 - 0.4j
    G = green_kernel(U, smooth, lam, t, x)
    G_star = green_kernel(adjoint_bc(U), adjoint_potential(smooth), lam.conjugate(), x, t)
    assert np.allclose(G_star, G.conj().T, atol=1e-9)


def test_green_symmetry_at_random_points(smooth, smooth_mesh, rng):
    U = preset("quasiperiodic:0.3")
    U_star, P_star, mesh_star = adjoint_bc(U), adjoint_potential(smooth), adjoint_mesh(smooth_mesh)
    for _ in range(100):
        t, x = rng.uniform(0, math.pi, size=2)
        lam = complex(rng.uniform(-6, 6), rng.choice([-1, 1]) * rng.uniform(0.5, 1.5))
        G = green_kernel(U, smooth, lam, t, x, smooth_mesh)
        G_star = green_kernel(U_star, P_star, lam.conjugate(), x, t, mesh_star)
        scale = max(1.0, float(np.max(np.abs(G))))
        assert np.allclose(G_star, G.conj().T, atol=1e-8 * scale)
        assert np.allclose(green_kernel_super(U, smooth, lam, t, x, smooth_mesh), G, atol=1e-8 * scale)


def test_kernel_at_eigenvalue_is_refused(separated):
    with pytest.raises(NearEigenvalue):
        green_kernel(separated, ZERO_POTENTIAL, 1.0, 0.5, 1.0)


def test_kernel_matrix_layout(separated, smooth, smooth_mesh):
    t_grid, x_grid = offset_grids(9)
    kernel = kernel_matrix(separated, smooth, 0.5j, t_grid, x_grid, smooth_mesh)
    assert kernel.blocks.shape == (8, 9, 2, 2)
    assert np.allclose(kernel.blocks[3, 5], green_kernel(separated, smooth, 0.5j, t_grid.nodes[5], x_grid.nodes[3],
                                                         smooth_mesh), atol=1e-12)
    rows = green_rows(kernel)
    assert len(rows) == 72 and all(len(row) == 10 for row in rows)
    assert rows[1][:2] == pytest.approx([t_grid.nodes[1], x_grid.nodes[0]])


def test_resolvent_solves_boundary_value_problem(separated, offdiag_one):
    f = GridFunction.from_callable(exact_rhs, make_grid("trapezoid", 512))
    y = apply_resolvent(separated, offdiag_one, 1j, f)
    expected = GridFunction.from_callable(exact_solution, f.grid)
    assert (y - expected).norm() < 1e-6 * expected.norm()


def test_resolvent_residual_in_sup_norm(separated, offdiag_one):
    for grid in (make_grid("trapezoid", 512), make_grid("simpson", 513)):
        f = GridFunction.from_callable(exact_rhs, grid)
        y = apply_resolvent(separated, offdiag_one, 1j, f)
        assert operator_residual(offdiag_one, 1j, y, f).sup_norm() <= 1e-6 * f.sup_norm()


def test_operator_residual_of_exact_solution(offdiag_one):
    grid = make_grid("trapezoid", 256)
    y = GridFunction.from_callable(exact_solution, grid)
    f = GridFunction.from_callable(exact_rhs, grid)
    assert operator_residual(offdiag_one, 1j, y, f).sup_norm() < 1e-8
    short = make_grid("trapezoid", 5)
    with pytest.raises(ConfigError):
        operator_residual(offdiag_one, 1j, GridFunction.from_callable(exact_solution, short),
                          GridFunction.from_callable(exact_rhs, short))


@pytest.mark.parametrize("name", ["separated", "periodic", "quasiperiodic:0.3"])
def test_resolvent_satisfies_boundary_conditions(name, smooth, smooth_mesh):
    U = preset(name)
    f = GridFunction.from_callable(lambda x: np.array([np.cos(3 * x), x ** 2]), make_grid("trapezoid", 257))
    y = apply_resolvent(U, smooth, 0.5 + 1j, f, smooth_mesh)
    assert np.allclose(boundary_residual(U, y.values[:, 0], y.values[:, -1]), 0, atol=1e-8 * y.sup_norm())


def test_resolvent_by_kernel_quadrature(separated, offdiag_one):
    f = GridFunction.from_callable(exact_rhs, make_grid("gauss", 256))
    y = apply_resolvent(separated, offdiag_one, 1j, f)
    expected = GridFunction.from_callable(exact_solution, f.grid)
    # the jump of the kernel at t = x limits the quadrature to first order
    assert (y - expected).sup_norm() < 2e-2 * expected.sup_norm()


def test_projector_of_zero_potential(separated, separated_eigenfunction):
    grid = make_grid("gauss", 32)
    kernel = spectral_projector(separated, ZERO_POTENTIAL, 2, grid)
    y = separated_eigenfunction(2, grid.nodes)
    expected = np.einsum("aj,bi->jiab", y, np.conj(y))
    assert np.allclose(kernel.blocks, expected, atol=1e-7)
    assert kernel.meta["indices"] == [2]
    assert kernel.weighted_trace() == pytest.approx(1, abs=1e-7)
    assert kernel.norm() == pytest.approx(1, abs=1e-6)


def test_projector_of_constant_potential(separated, offdiag_one):
    grid = make_grid("gauss", 64)
    kernel = spectral_projector(separated, offdiag_one, 3, grid)
    assert kernel.meta["eigenvalues"][0] == pytest.approx(math.sqrt(10), abs=1e-8)
    assert kernel.weighted_trace() == pytest.approx(1, abs=1e-7)
    assert np.allclose(kernel.compose(kernel).blocks, kernel.blocks, atol=1e-7)
    # self-adjoint: P(t, x) = P(x, t)^H
    assert np.allclose(kernel.blocks, np.conj(kernel.blocks.transpose(1, 0, 3, 2)), atol=1e-7)


def test_projector_of_double_eigenvalue(periodic):
    kernel = spectral_projector(periodic, ZERO_POTENTIAL, 1, make_grid("gauss", 32))
    assert kernel.meta["indices"] == [2, 3]
    assert kernel.meta["center"] == pytest.approx(2)
    assert kernel.weighted_trace() == pytest.approx(2, abs=1e-7)
    assert np.allclose(kernel.compose(kernel).blocks, kernel.blocks, atol=1e-7)


@pytest.mark.slow
@pytest.mark.parametrize("bc, name", [("separated", "smooth"), ("separated", "offdiag-one"),
                                      ("periodic", "inverse-sqrt"), ("periodic", "inverse-sqrt-both")])
def test_projectors_approach_unperturbed(bc, name):
    U, P = preset(bc), POTENTIAL_PRESETS[name]
    # periodic group 40 sits near lambda = 80
    grid = make_grid("gauss", 256)
    assert projector_deviation(U, P, 40, grid) < projector_deviation(U, P, 10, grid)


def test_projector_commutes_with_resolvent(separated, offdiag_one):
    grid = make_grid("simpson", 257)
    lam = 0.5 + 1j
    projector = spectral_projector(separated, offdiag_one, 3, grid)
    f = GridFunction.from_callable(lambda x: np.array([np.cos(x), x ** 2]), grid)
    left = projector.apply(apply_resolvent(separated, offdiag_one, lam, f))
    right = apply_resolvent(separated, offdiag_one, lam, projector.apply(f))
    assert (left - right).sup_norm() <= 1e-6 * f.sup_norm()
    # on the range of a simple projector R acts as 1 / (lambda_3 - lam)
    expected = projector.apply(f) * (1 / (math.sqrt(10) - lam))
    assert (right - expected).sup_norm() <= 1e-6 * f.sup_norm()


@pytest.mark.parametrize("name, first, second", [("separated", 3, 4), ("separated", -3, 3), ("periodic", 1, 2)])
def test_projectors_of_disjoint_groups_annihilate(name, first, second, offdiag_one):
    U = preset(name)
    grid = make_grid("gauss", 48)
    P_first = spectral_projector(U, offdiag_one, first, grid)
    P_second = spectral_projector(U, offdiag_one, second, grid)
    assert P_first.compose(P_second).norm() <= 1e-6
    assert P_second.compose(P_first).norm() <= 1e-6
