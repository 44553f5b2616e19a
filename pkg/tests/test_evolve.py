import math

import numpy as np
import pytest

from diracspec.error_handling import DeterminantDrift
from diracspec.evolve import (det2, fundamental_matrix, fundamental_matrix_batch, fundamental_matrix_grid,
                              liouville_det, oracle_const_E, propagate_grid, transfer_matrix)
from diracspec.potential import POTENTIAL_PRESETS, ZERO_POTENTIAL, PotentialSpec, PowerChannel, build_mesh

STRIP_LAMBDAS = [complex(re, im) for re in (-7.5, -1.0, 0.0, 2.5, 11.0) for im in (-2.0, -0.5, 0.5, 2.0)]


def test_zero_potential_is_diagonal_exponential(free_exponential):
    mesh = build_mesh(ZERO_POTENTIAL)
    for lam in (0.0, 1.5, 2 - 1j):
        for x in (0.0, 0.7, math.pi):
            E = fundamental_matrix(ZERO_POTENTIAL, mesh, lam, x).E
            assert np.allclose(E, free_exponential(lam, x), atol=1e-13)


@pytest.mark.parametrize("lam", [0.3 + 0.2j, 1.0, -4.0 + 1.5j, 20.0])
@pytest.mark.parametrize("x", [0.25, 1.2, math.pi])
def test_constant_potential_matches_closed_form(offdiag_one, lam, x):
    E = fundamental_matrix(offdiag_one, build_mesh(offdiag_one), lam, x).E
    assert np.allclose(E, oracle_const_E(1, 1, lam, x), rtol=1e-12, atol=1e-12)


def test_closed_form_at_resonance():
    # omega = 0 for lam^2 = ab
    E = oracle_const_E(1, 1, 1.0, 0.5)
    A = np.array([[1j, -1j], [1j, -1j]])
    assert np.allclose(E, np.eye(2) + 0.5 * A)


@pytest.mark.parametrize("name", ["offdiag-one", "inverse-sqrt", "inverse-sqrt-both", "smooth"])
def test_determinant_is_one_for_off_diagonal_potentials(name):
    P = POTENTIAL_PRESETS[name]
    mesh = build_mesh(P, cells=256)
    xs = np.linspace(0, math.pi, 64)
    E, _ = propagate_grid(P, mesh, STRIP_LAMBDAS, xs)
    drift = np.abs(det2(E) - 1)
    inner = np.abs(np.imag(STRIP_LAMBDAS)) <= 1
    assert np.max(drift[inner]) < 1e-10
    # rounding of the entries is amplified by |E|^2 away from the real axis
    size = np.max(np.abs(E), axis=(-2, -1)) ** 2
    assert np.all(drift <= 1e-12 * np.maximum(size, 100.0))


def test_determinant_of_square_root_power_potential():
    P = PotentialSpec(p2=PowerChannel(1 + 0j, 0.5), p3=PowerChannel(-2 + 0j, 0.5))
    mesh = build_mesh(P, cells=256)
    lams = [lam for lam in STRIP_LAMBDAS if abs(lam.imag) <= 1]
    E, _ = propagate_grid(P, mesh, lams, np.linspace(0, math.pi, 64))
    assert np.max(np.abs(det2(E) - 1)) < 1e-10


def test_diagonal_potential_follows_liouville():
    P = POTENTIAL_PRESETS["diagonal-one"]
    mesh = build_mesh(P)
    lam, x = 0.7 - 0.3j, 2.0
    E = fundamental_matrix(P, mesh, lam, x).E
    expected = np.diag([np.exp(1j * (lam - 1) * x), np.exp(-1j * lam * x)])
    assert np.allclose(E, expected, atol=1e-13)
    assert det2(E) == pytest.approx(complex(liouville_det(P, x)), abs=1e-13)
    assert complex(liouville_det(P, x)) == pytest.approx(np.exp(-1j * x))


def test_grid_agrees_with_pointwise(smooth, smooth_mesh):
    xs = np.array([0.0, 0.3, 1.0, 2.2, math.pi])
    lam = 1.5 + 0.5j
    E, _ = fundamental_matrix_grid(smooth, smooth_mesh, lam, xs)
    for k, x in enumerate(xs):
        assert np.allclose(E[k], fundamental_matrix(smooth, smooth_mesh, lam, x).E, atol=1e-12)


def test_batch_shape_and_values(smooth, smooth_mesh):
    lams = np.array([[0.0, 1.0], [2.0 + 1j, -3.0]])
    E, dE = fundamental_matrix_batch(smooth, smooth_mesh, lams, with_derivative=True)
    assert E.shape == (2, 2, 2, 2) and dE.shape == (2, 2, 2, 2)
    assert np.allclose(E[1, 0], fundamental_matrix(smooth, smooth_mesh, 2.0 + 1j, math.pi).E, atol=1e-12)


@pytest.mark.parametrize("x", [1.3, math.pi])
def test_derivative_matches_finite_difference(smooth, smooth_mesh, x):
    lam, h = 1.1 + 0.4j, 1e-5
    result = fundamental_matrix(smooth, smooth_mesh, lam, x, with_derivative=True)
    plus = fundamental_matrix(smooth, smooth_mesh, lam + h, x).E
    minus = fundamental_matrix(smooth, smooth_mesh, lam - h, x).E
    assert np.allclose(result.dE, (plus - minus) / (2 * h), rtol=1e-6, atol=1e-7)


def test_mesh_refinement_converges(smooth):
    lam = 3.0 + 0.5j
    reference = fundamental_matrix(smooth, build_mesh(smooth, cells=4096), lam, math.pi).E
    coarse = fundamental_matrix(smooth, build_mesh(smooth, cells=64), lam, math.pi).E
    fine = fundamental_matrix(smooth, build_mesh(smooth, cells=512), lam, math.pi).E
    assert np.max(np.abs(fine - reference)) < np.max(np.abs(coarse - reference)) / 10


def test_transfer_matrix(smooth, smooth_mesh):
    lam = 0.5 + 0.5j
    E_a = fundamental_matrix(smooth, smooth_mesh, lam, 1.0).E
    E_x = fundamental_matrix(smooth, smooth_mesh, lam, 2.0).E
    T = transfer_matrix(E_a, E_x)
    assert np.allclose(T @ E_a, E_x, atol=1e-12)
    with pytest.raises(DeterminantDrift):
        transfer_matrix(2 * np.eye(2), E_x)


@pytest.mark.parametrize("lam", [0.5 + 0.5j, -3.0 - 1.0j, 7.0])
def test_transfer_matrices_compose(smooth, smooth_mesh, lam):
    r, s, x = 0.4, 1.3, 2.9
    E_r, E_s, E_x = (fundamental_matrix(smooth, smooth_mesh, lam, point).E for point in (r, s, x))
    T_sr, T_xs, T_xr = transfer_matrix(E_r, E_s), transfer_matrix(E_s, E_x), transfer_matrix(E_r, E_x)
    assert np.allclose(T_xs @ T_sr, T_xr, atol=1e-10 * np.max(np.abs(T_xr)))
    assert np.allclose(T_xs @ E_s, E_x, atol=1e-10 * np.max(np.abs(E_x)))


@pytest.mark.parametrize("s, x", [(0.5, 2.0), (1.0, math.pi), (0.0, 1.7)])
def test_transfer_matrix_of_constant_potential_is_a_shift(offdiag_one, s, x):
    # constant coefficients: E(x) = E(x - s) E(s)
    mesh = build_mesh(offdiag_one)
    lam = 1.5 - 0.5j
    E_s = fundamental_matrix(offdiag_one, mesh, lam, s).E
    E_x = fundamental_matrix(offdiag_one, mesh, lam, x).E
    assert np.allclose(transfer_matrix(E_s, E_x), oracle_const_E(1, 1, lam, x - s), atol=1e-11)
    assert np.allclose(oracle_const_E(1, 1, lam, x - s) @ E_s, E_x, atol=1e-11)
