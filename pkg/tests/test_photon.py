import math

import numpy as np
import pytest

from sharpqm.bohm import Trajectory, VelocityField
from sharpqm.electrostatics import ChargeConfiguration
from sharpqm.errors import DomainError, NodeProximityError, UnsupportedError
from sharpqm.photon import (
    LPhotonProduct,
    WeberField,
    integrate_photon,
    lphoton_energy,
    photon_velocity,
    single_photon_residual,
    whole_space_norm2,
)
from sharpqm.radiation import SourceContext
from sharpqm.units import C_LIGHT

PAIR = ChargeConfiguration([(1.0, 0.0, 0.0)], [(0.0, 0.0, 0.0)], [1.0], 0.1)


@pytest.mark.parametrize("helicity", [1, -1])
def test_plane_wave_moves_at_c_along_k(helicity):
    k = np.array([0.2, -0.4, 0.9])
    pw = WeberField.plane_wave(0.8, k, helicity)
    v = photon_velocity(pw(0.3, np.random.default_rng(1).normal(size=(50, 3))))
    assert np.allclose(v, C_LIGHT * k / np.linalg.norm(k), rtol=1e-12)
    path = integrate_photon(pw, [0.0, 0.0, 0.0], None, (0.0, 1.0))
    end = path.trajectory.position(1.0).reshape(3)
    assert np.allclose(end, C_LIGHT * k / np.linalg.norm(k), rtol=1e-8)
    assert abs(path.max_speed / C_LIGHT - 1) < 1e-10


def test_speed_bound_and_scaling():
    rng = np.random.default_rng(2)
    psi = rng.normal(size=(2000, 3)) + 1j * rng.normal(size=(2000, 3))
    v = photon_velocity(psi)
    assert np.max(np.linalg.norm(v, axis=-1)) <= C_LIGHT * (1 + 1e-12)
    lam = (rng.normal(size=(2000, 1)) + 1j * rng.normal(size=(2000, 1))) * 30
    assert np.allclose(photon_velocity(lam * psi), v, rtol=0, atol=1e-12 * C_LIGHT)
    # real Psi (pure electric field) gives a photon at rest
    assert np.allclose(photon_velocity(psi.real + 0j), 0.0)


def test_node_rejected():
    with pytest.raises(NodeProximityError):
        photon_velocity(np.zeros((1, 3), complex))


def test_plane_wave_validation():
    with pytest.raises(DomainError):
        WeberField.plane_wave(1.0, [0, 0, 0])
    with pytest.raises(DomainError):
        WeberField.plane_wave(1.0, [0, 0, 1], helicity=2)


def test_whole_space_norm_of_gaussian_field():
    f = WeberField.from_fields(lambda t, s, q: s * np.exp(-np.sum(s * s, -1))[..., None])
    exact = 4 * math.pi * 3 * math.sqrt(math.pi) / (8 * 2**2.5)
    assert whole_space_norm2(f) == pytest.approx(exact, rel=1e-8)


def test_lphoton_energies_agree_for_identical_factors():
    wf = WeberField.coulomb(PAIR)
    for L in (1, 2, 3):
        st = LPhotonProduct((wf,) * L)
        assert lphoton_energy(st, "per-factor") == pytest.approx(11.0, abs=1e-9)
        assert lphoton_energy(st, "geometric") == pytest.approx(11.0, abs=1e-9)
    mix = {1: LPhotonProduct((wf,)), 2: LPhotonProduct((wf, wf))}
    assert lphoton_energy(mix, "weighted", weights={1: 0.25, 2: 0.75}) == pytest.approx(11.0, abs=1e-9)


def test_lphoton_value_is_outer_product():
    pw = WeberField.plane_wave(1.0, [0, 0, 1])
    st = LPhotonProduct((pw, pw))
    pts = np.array([[0.1, 0.2, 0.3], [0.0, -1.0, 2.0]])
    a, b = pw(0.5, pts[:1])[0], pw(0.5, pts[1:])[0]
    assert np.allclose(st.value(0.5, pts), np.outer(a, b))


def test_lphoton_rejections():
    wf = WeberField.coulomb(PAIR)
    with pytest.raises(UnsupportedError):
        lphoton_energy(LPhotonProduct((wf, wf), entangled=True))
    with pytest.raises(DomainError):
        LPhotonProduct(())
    with pytest.raises(DomainError):
        lphoton_energy({1: LPhotonProduct((wf,))}, "weighted", weights={1: 0.7})
    with pytest.raises(DomainError):
        lphoton_energy({1: LPhotonProduct((wf,))}, "weighted")
    with pytest.raises(DomainError):
        lphoton_energy(LPhotonProduct((wf,)), "bogus")


@pytest.mark.parametrize("point", [(0.4, 0.3, -0.2), (0.02, 0.03, 0.0), (1.01, 0.04, 0.0)])
def test_static_coulomb_residuals(point):
    # outside the balls, inside the nucleus, inside the electron
    wf = WeberField.coulomb(PAIR)
    rest = VelocityField(lambda t, q: np.zeros(3), tag="rest")
    r = single_photon_residual(wf, rest, PAIR, 1.0, point, [(1.0, 0.0, 0.0)])
    assert r.converged
    # c times a roundoff-level curl
    assert r.evolution_norm < 1e-7 and r.divergence_abs < 1e-6


def test_radiating_source_residuals_small():
    c = 1.0
    traj = Trajectory.from_functions(
        lambda t: np.stack([0.3 * np.sin(t), 0 * t, 0 * t], -1),
        lambda t: np.stack([0.3 * np.cos(t), 0 * t, 0 * t], -1),
        0,
        6,
    )
    wf = WeberField.radiation(SourceContext(traj, 0.0, c))
    vf = VelocityField(lambda t, q: traj.velocity(t).reshape(3), tag="traj")
    cfg = ChargeConfiguration([], [(0, 0, 0)], [1], 0.05)
    s = [1.5, 0.5, 0.3]
    r = single_photon_residual(wf, vf, cfg, 3.0, s, traj.position(3.0).reshape(1, 3), h=1e-2, c=c)
    size = np.linalg.norm(wf(3.0, np.array([s]), traj.position(3.0))[0])
    assert r.evolution_norm < 1e-4 * size and r.divergence_abs < 1e-4 * size
