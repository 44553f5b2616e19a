import math

import numpy as np
import pytest

from diracspec.bcond import classify, preset, BcKind
from diracspec.error_handling import ConfigError, MeshMismatch
from diracspec.evolve import fundamental_matrix
from diracspec.potential import (POTENTIAL_PRESETS, ZERO_POTENTIAL, ConstantChannel, ModulatedChannel,
                                 PolynomialChannel, PotentialSpec, PowerChannel, SamplesChannel, TrigChannel,
                                 adjoint_mesh, adjoint_potential, build_mesh, channel_antiderivative, combine,
                                 eval_potential, gauge_reduce, l1_norms, potential_from_json, read_potential)


def test_eval_offdiagonal_preset(offdiag_one):
    assert np.array_equal(eval_potential(offdiag_one, 0.5), np.array([[0, 1], [1, 0]]))


@pytest.mark.parametrize("channel, x, expected", [
    (PowerChannel(1 + 0j, 0.5), math.pi, 2 * math.sqrt(math.pi)),
    (TrigChannel(((0.5 + 0j, 1), (0.5 + 0j, -1))), math.pi / 2, 1.0),
    (PolynomialChannel((0j, 1 + 0j)), 2.0, 2.0),
    (SamplesChannel((0.0, math.pi), (0j, math.pi + 0j)), math.pi, math.pi ** 2 / 2),
    (ConstantChannel(2j), 1.5, 3j),
])
def test_channel_antiderivatives(channel, x, expected):
    assert complex(channel.antiderivative(x)) == pytest.approx(expected, abs=1e-12)


def test_samples_are_constant_beyond_the_nodes():
    channel = SamplesChannel((1.0, 2.0), (1 + 0j, 3 + 0j))
    assert complex(channel.evaluate(0.5)) == pytest.approx(1)
    assert complex(channel.evaluate(3.0)) == pytest.approx(3)
    assert complex(channel.antiderivative(math.pi)) == pytest.approx(1 + 2 + 3 * (math.pi - 2))


def test_power_channel_needs_integrable_exponent():
    with pytest.raises(ConfigError):
        PowerChannel(1 + 0j, 1.0)


def test_samples_need_increasing_nodes():
    with pytest.raises(ConfigError):
        SamplesChannel((1.0, 0.5), (0j, 1 + 0j))


def test_channel_antiderivative_by_name():
    P = POTENTIAL_PRESETS["inverse-sqrt"]
    assert channel_antiderivative(P, "p2", math.pi) == pytest.approx(2 * math.sqrt(math.pi))
    assert channel_antiderivative(P, 3, math.pi) == 0


def test_adjoint_swaps_and_conjugates():
    P = PotentialSpec(p1=ConstantChannel(1j), p2=ConstantChannel(1j), p3=ConstantChannel(2 + 0j))
    adjoint = adjoint_potential(P)
    assert adjoint.p1 == ConstantChannel(-1j)
    assert adjoint.p2 == ConstantChannel(2 + 0j)
    assert adjoint.p3 == ConstantChannel(-1j)
    assert adjoint_potential(adjoint) == P


def test_trig_conjugate_flips_frequencies():
    channel = TrigChannel(((1j, 2),))
    x = np.linspace(0, math.pi, 7)
    assert np.allclose(channel.conjugate().evaluate(x), np.conj(channel.evaluate(x)))


def test_q_form_conversion():
    P = PotentialSpec.from_q_form(q1=ConstantChannel(1 + 0j), q4=ConstantChannel(-1 + 0j))
    assert P.p1.is_zero and P.p4.is_zero
    assert complex(P.p2.evaluate(1.0)) == pytest.approx(1)
    assert complex(P.p3.evaluate(1.0)) == pytest.approx(1)


def test_combine_simplifies():
    assert combine([(1.0, ConstantChannel(1 + 0j)), (2.0, ConstantChannel(1j))]) == ConstantChannel(1 + 2j)
    assert combine([(0.0, ConstantChannel(1 + 0j))]).is_zero


def test_l1_norms():
    assert l1_norms(POTENTIAL_PRESETS["inverse-sqrt"]) == pytest.approx((0, 2 * math.sqrt(math.pi), 0, 0))
    assert l1_norms(POTENTIAL_PRESETS["offdiag-one"]) == pytest.approx((0, math.pi, math.pi, 0))
    assert l1_norms(POTENTIAL_PRESETS["smooth"])[2] == pytest.approx(math.pi ** 2 / 2, rel=1e-8)


def test_constant_potential_gets_one_cell(offdiag_one):
    assert build_mesh(offdiag_one).cells == 1


def test_smooth_potential_gets_uniform_mesh(smooth):
    mesh = build_mesh(smooth, cells=128)
    assert mesh.cells == 128
    assert np.allclose(mesh.widths, math.pi / 128)


def test_singular_potential_gets_graded_mesh():
    P = POTENTIAL_PRESETS["inverse-sqrt"]
    mesh = build_mesh(P, tol=1e-8, cells=256)
    assert mesh.nodes[0] == 0 and mesh.nodes[-1] == pytest.approx(math.pi)
    assert mesh.nodes[1] == pytest.approx(1e-16)
    assert np.all(np.diff(mesh.nodes) > 0)
    assert np.sum(mesh.widths * mesh.averages[:, 1]) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)


def test_mesh_rejects_bad_parameters(smooth):
    with pytest.raises(ConfigError):
        build_mesh(smooth, tol=0.0)
    with pytest.raises(ConfigError):
        build_mesh(smooth, cells=0)


def test_mesh_of_other_potential_is_rejected(smooth, offdiag_one):
    with pytest.raises(MeshMismatch):
        fundamental_matrix(smooth, build_mesh(offdiag_one), 1.0, 1.0)


def test_adjoint_mesh_keeps_the_cells(smooth_mesh, smooth):
    adjoint = adjoint_mesh(smooth_mesh)
    assert adjoint.potential == adjoint_potential(smooth)
    assert np.array_equal(adjoint.nodes, smooth_mesh.nodes)
    expected = build_mesh(adjoint_potential(smooth), cells=256)
    assert np.allclose(adjoint.averages, expected.averages, atol=1e-13)


def test_gauge_reduction_of_constant_diagonal(periodic):
    result = gauge_reduce(POTENTIAL_PRESETS["diagonal-one"], periodic)
    assert result.gamma == pytest.approx(0.5)
    assert result.potential.is_zero
    assert np.allclose(result.boundary.C, np.eye(2))
    assert np.allclose(result.boundary.D, 1j * np.eye(2))
    assert classify(result.boundary).kind is BcKind.STRONGLY_REGULAR


def test_gauge_reduction_keeps_off_diagonal_potentials(separated, smooth):
    result = gauge_reduce(smooth, separated)
    assert result.potential is smooth
    assert result.boundary is separated
    assert result.gamma == 0


@pytest.mark.parametrize("name", ["separated", "periodic", "quasiperiodic:0.4"])
def test_gauge_reduction_keeps_regularity(name):
    P = PotentialSpec(p1=PolynomialChannel((0j, 1 + 0j)), p2=ConstantChannel(1 + 0j), p4=ConstantChannel(0.3j))
    result = gauge_reduce(P, preset(name))
    assert classify(result.boundary).is_regular
    assert result.potential.is_off_diagonal
    assert isinstance(result.potential.p2, ModulatedChannel)
    assert result.gamma == pytest.approx((math.pi ** 2 / 2 + 0.3j * math.pi) / (2 * math.pi))


def test_read_potential_presets_and_json(tmp_path):
    assert read_potential(None) is ZERO_POTENTIAL
    assert read_potential("preset:zero") is ZERO_POTENTIAL
    assert read_potential({"p2": {"kind": "power", "c": [1, 0], "alpha": 0.5}}) == POTENTIAL_PRESETS["inverse-sqrt"]
    path = tmp_path / "potential.json"
    path.write_text('{"p2": {"kind": "constant", "value": 1}, "p3": {"kind": "constant", "value": [1, 0]}}')
    assert read_potential(str(path)) == POTENTIAL_PRESETS["offdiag-one"]


@pytest.mark.parametrize("source", ["preset:nothing", {"p5": {"kind": "zero"}}, {"p1": {"kind": "spline"}},
                                    {"p1": {"kind": "constant"}}])
def test_read_potential_rejects_invalid_input(source):
    with pytest.raises(ConfigError):
        read_potential(source)


@pytest.mark.parametrize("name", sorted(POTENTIAL_PRESETS))
def test_potential_json_round_trip(name):
    P = POTENTIAL_PRESETS[name]
    assert potential_from_json(P.to_json()) == P
