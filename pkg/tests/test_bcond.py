import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from diracspec.bcond import (BcKind, BoundaryMatrix, adjoint_bc, boundary_from_json, boundary_residual, classify,
                             delta0, lagrange_form, minors, model_eigenfunction, preset, read_boundary_matrix,
                             require_regular, unperturbed_spectrum)
from diracspec.chardet import char_det
from diracspec.error_handling import ConfigError, NonRegularInput, RankDeficient
from diracspec.potential import ZERO_POTENTIAL


def test_minors_of_separated(separated):
    J = minors(separated)
    assert (J.J12, J.J34) == (0, 0)
    assert (J.J13, J.J14, J.J23, J.J24) == (1, 1, 1, 1)
    assert J.J(3, 2) == -J.J23
    assert J.plucker() == 0


def test_minors_of_periodic(periodic):
    J = minors(periodic)
    assert (J.J12, J.J34, J.J14, J.J23) == (1, 1, -1, 1)
    assert (J.J13, J.J24) == (0, 0)


@pytest.mark.parametrize("name, kind", [
    ("separated", BcKind.STRONGLY_REGULAR),
    ("periodic", BcKind.REGULAR_NOT_STRONG),
    ("antiperiodic", BcKind.REGULAR_NOT_STRONG),
    ("quasiperiodic:0.5", BcKind.STRONGLY_REGULAR),
    ("initial", BcKind.NON_REGULAR),
])
def test_classify_presets(name, kind):
    assert classify(preset(name)).kind is kind


def test_classify_periodic_json(periodic):
    assert classify(periodic).to_json() == {"kind": "RegularNotStrong", "discriminant": [0.0, 0.0]}


def test_require_regular_rejects_initial_conditions():
    with pytest.raises(NonRegularInput):
        require_regular(preset("initial"))


def test_rank_deficient_matrix():
    with pytest.raises(RankDeficient):
        BoundaryMatrix([[1, 0, 0, 0], [2, 0, 0, 0]])


def test_wrong_shape():
    with pytest.raises(ConfigError):
        BoundaryMatrix([[1, 0, 0], [0, 1, 0]])


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("dirichlet")


def test_separated_lattice_is_integers(separated):
    model = unperturbed_spectrum(separated)
    assert not model.doubled
    for n in range(-7, 8):
        assert model.lambda0(n) == pytest.approx(n, abs=1e-12)
    assert np.allclose(model.lambda0_array(range(-3, 4)), np.arange(-3, 4), atol=1e-12)


def test_periodic_lattice_is_doubled(periodic):
    model = unperturbed_spectrum(periodic)
    assert model.doubled
    for k in range(-5, 6):
        assert model.lambda0(2 * k) == pytest.approx(2 * k, abs=1e-12)
        assert model.lambda0(2 * k + 1) == pytest.approx(2 * k, abs=1e-12)


def test_antiperiodic_lattice_is_doubled_odd(antiperiodic):
    model = unperturbed_spectrum(antiperiodic)
    assert model.doubled
    for k in range(-5, 6):
        assert model.lambda0(2 * k) == pytest.approx(2 * k + 1, abs=1e-12)
        assert model.lambda0(2 * k + 1) == pytest.approx(2 * k + 1, abs=1e-12)


def test_quasiperiodic_lattice_is_shifted():
    model = unperturbed_spectrum(preset("quasiperiodic:0.5"))
    for n in range(-4, 5):
        assert model.lambda0(n) == pytest.approx(n - 0.5, abs=1e-12)


@pytest.mark.parametrize("name", ["separated", "periodic", "antiperiodic", "quasiperiodic:0.3"])
def test_delta0_vanishes_on_lattice(name):
    U = preset(name)
    model = unperturbed_spectrum(U)
    for n in range(-6, 7):
        assert abs(delta0(U, model.lambda0(n))) < 1e-12


@pytest.mark.parametrize("name", ["separated", "periodic", "quasiperiodic:0.3"])
def test_delta0_matches_determinant_of_zero_potential(name):
    U = preset(name)
    for lam in (0.3 + 0.2j, -1.7 - 0.5j, 4.1):
        assert char_det(U, ZERO_POTENTIAL, lam).delta == pytest.approx(delta0(U, lam), abs=1e-12)


def test_adjoint_of_periodic_is_periodic(periodic):
    adjoint = adjoint_bc(periodic)
    assert np.allclose(minors(adjoint).values(), -minors(periodic).values())
    assert classify(adjoint).kind is BcKind.REGULAR_NOT_STRONG


def test_adjoint_of_separated_is_separated(separated):
    assert adjoint_bc(separated) == separated


def test_separated_model_eigenfunction(separated):
    (y,) = model_eigenfunction(separated, 2)
    assert np.allclose(y.omega, np.array([1, -1]) / math.sqrt(2 * math.pi))
    assert np.allclose(boundary_residual(separated, y(0.0), y(math.pi)), 0, atol=1e-14)


def test_periodic_model_eigenspace_is_two_dimensional(periodic):
    functions = model_eigenfunction(periodic, 4)
    assert len(functions) == 2
    for y in functions:
        assert np.allclose(boundary_residual(periodic, y(0.0), y(math.pi)), 0, atol=1e-14)


def test_lagrange_identity_for_zero_potential():
    # f = (x, x^2), g = (1, x); l f = B f' with B = diag(-i, i)
    def integrand(x, part):
        lf = np.array([-1j, 2j * x])
        f = np.array([x, x * x])
        g = np.array([1, x])
        lg = np.array([0, 1j])
        value = np.sum(lf * np.conj(g)) - np.sum(f * np.conj(lg))
        return value.real if part == "re" else value.imag

    difference = complex(quad(integrand, 0, math.pi, args=("re",))[0], quad(integrand, 0, math.pi, args=("im",))[0])
    boundary = lagrange_form([0, 0], [math.pi, math.pi ** 2], [1, 0], [1, math.pi])
    assert boundary == pytest.approx(difference, abs=1e-10)
    assert boundary == pytest.approx(-1j * math.pi + 1j * math.pi ** 3, abs=1e-10)


def test_q_form_dirichlet_is_separated():
    U = BoundaryMatrix.from_q_form([[1, 0], [0, 0]], [[0, 0], [1, 0]])
    assert classify(U).kind is BcKind.STRONGLY_REGULAR
    assert np.allclose(minors(U).values() / minors(U).J14, minors(preset("separated")).values())


def test_scale_d_keeps_regularity(periodic):
    scaled = periodic.scale_d(1j)
    assert np.allclose(scaled.D, -1j * np.eye(2))
    assert classify(scaled).is_regular


def test_boundary_json_round_trip(separated):
    assert boundary_from_json(separated.to_json()) == separated
    assert read_boundary_matrix({"U": [[[1, 0], [1, 0], 0, 0], [0, 0, 1, "1+0i"]]}) == separated


def test_read_boundary_matrix_from_preset_and_file(tmp_path):
    path = tmp_path / "bc.json"
    path.write_text('{"U": [[1, 0, -1, 0], [0, 1, 0, -1]]}')
    assert read_boundary_matrix(str(path)) == read_boundary_matrix("preset:periodic")


def test_quasiperiodic_preset_entries():
    U = preset("quasiperiodic:0.25")
    assert np.allclose(U.D, -cmath.exp(0.25j * math.pi) * np.eye(2))
    with pytest.raises(ConfigError):
        preset("quasiperiodic:abc")


def test_nearly_degenerate_quasiperiodic_lattice_is_doubled():
    U = preset("quasiperiodic:1e-6")
    assert classify(U).kind is BcKind.REGULAR_NOT_STRONG
    model = unperturbed_spectrum(U)
    assert model.doubled
    assert model.to_json()["doubled"]
    for k in range(-3, 4):
        assert model.lambda0(2 * k) == pytest.approx(2 * k, abs=2e-6)
        assert model.lambda0(2 * k + 1) == pytest.approx(2 * k, abs=2e-6)


def test_quasiperiodic_lattice_away_from_degeneracy_is_simple():
    assert not unperturbed_spectrum(preset("quasiperiodic:0.5")).doubled


def random_invertible(rng):
    while True:
        T = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(T)) > 0.1:
            return T


@pytest.mark.parametrize("name", ["separated", "periodic", "antiperiodic", "quasiperiodic:0.3", "initial"])
def test_classify_is_invariant_under_row_operations(name, rng):
    U = preset(name)
    for _ in range(5):
        T = random_invertible(rng)
        assert classify(BoundaryMatrix(T @ U.u)).kind is classify(U).kind


def test_row_operations_scale_the_discriminant(rng):
    U = preset("quasiperiodic:0.3")
    T = random_invertible(rng)
    scaled = classify(BoundaryMatrix(T @ U.u)).discriminant
    assert scaled == pytest.approx(np.linalg.det(T) ** 2 * classify(U).discriminant, rel=1e-10)


def test_adjoint_preserves_regularity_kind(rng):
    matrices = [rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4)) for _ in range(10)]
    for name in ("periodic", "antiperiodic"):
        matrices += [random_invertible(rng) @ preset(name).u for _ in range(5)]
    for u in matrices:
        U = BoundaryMatrix(u)
        assert classify(adjoint_bc(U)).kind is classify(U).kind
