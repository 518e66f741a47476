import math

import numpy as np
import pytest

from sharpqm.electrostatics import (
    BallCharge,
    ChargeConfiguration,
    ExternalStaticField,
    ball_field,
    ball_potential,
    config_field,
    external_momentum_coupling,
    field_energy,
    field_energy_components,
    field_energy_quadrature,
    field_energy_with_external,
    pair_interaction,
    sample_laplacian,
    self_energy,
)
from sharpqm.errors import DomainError, PreconditionError
from sharpqm.quadrature import sphere_product_rule


def test_hydrogen_pair_closed_form():
    cfg = ChargeConfiguration([(1.0, 0, 0)], [(0, 0, 0)], [1.0], 0.1)
    comps = field_energy_components(cfg)
    assert comps["electron_self"] == pytest.approx(6.0, rel=1e-15)
    assert comps["nucleus_electron"] == pytest.approx(-1.0, rel=1e-15)
    assert field_energy(cfg) == pytest.approx(11.0, abs=1e-12)


def test_self_energy():
    assert self_energy(0.2) == pytest.approx(3.0, rel=1e-15)
    assert self_energy(0.5, 2.0) == pytest.approx(4.8, rel=1e-15)


def test_overlapping_pair_matches_quadrature():
    # separations inside 2a exercise the overlap branch of the kernel
    for d in (0.03, 0.1, 0.17, 0.25):
        cfg = ChargeConfiguration([(d, 0, 0)], [(0, 0, 0)], [1.0], 0.1)
        assert field_energy_quadrature(cfg) == pytest.approx(field_energy(cfg), rel=1e-10)


def test_four_charge_configuration():
    cfg = ChargeConfiguration([(0.7, 0.2, 0), (-0.5, 0.4, 0.3), (0.1, -0.6, 0.05)], [(0, 0, 0)], [3.0], 0.12)
    q = field_energy_quadrature(cfg)
    assert q == pytest.approx(field_energy(cfg), rel=1e-10)


def test_potential_continuous_and_gauss_law():
    b = BallCharge((0.3, -0.2, 0.1), 0.2, -1.0)
    u = np.array([0.6, 0.0, 0.8])
    inner = ball_potential(b, b.c + (0.2 - 1e-12) * u)
    outer = ball_potential(b, b.c + (0.2 + 1e-12) * u)
    assert inner == pytest.approx(outer, rel=1e-9)
    dirs, w = sphere_product_rule(12, 24)
    R = 0.7
    flux = R**2 * np.sum(w * np.sum(ball_field(b, b.c + R * dirs) * dirs, axis=1))
    assert flux == pytest.approx(4 * math.pi * b.charge, rel=1e-12)


def test_poisson_inside_ball():
    b = BallCharge((0, 0, 0), 0.5, 1.0)
    p = np.array([[0.1, 0.05, -0.1]])
    lap = sample_laplacian(lambda s: ball_potential(b, s), p, h=1e-3)
    rho = 1.0 / (4 / 3 * math.pi * 0.5**3)
    assert lap[0] == pytest.approx(-4 * math.pi * rho, rel=1e-6)


def test_pair_interaction_far_field():
    a, b = BallCharge((0, 0, 0), 0.1, 1.0), BallCharge((3, 0, 0), 0.1, -1.0)
    assert pair_interaction(a, b) == pytest.approx(-1 / 3, rel=1e-14)


def test_external_fields():
    cfg = ChargeConfiguration([(0.5, 0, 0)], [(0, 0, 0)], [1.0], 0.1)
    ext = ExternalStaticField.uniform_E((0.0, 0.0, 0.01))
    comps = field_energy_with_external(cfg, ext)
    assert comps["external_field_energy"] is None
    assert comps["electron_external"] == pytest.approx(0.0, abs=1e-15)
    extB = ExternalStaticField.uniform_B((0, 0, 2.0))
    P = external_momentum_coupling(cfg, extB, c=10.0)
    assert np.allclose(P, [[0.0, -0.05, 0.0]])
    mp = ExternalStaticField.multipole([(1, 0, "+", 1.0)], source_free_radius=0.3)
    with pytest.raises(PreconditionError):
        field_energy_with_external(cfg, mp)
    with pytest.raises(DomainError):
        ExternalStaticField("bogus")


def test_configuration_validation():
    with pytest.raises(DomainError):
        ChargeConfiguration([], [(0, 0, 0)], [1.0, 2.0], 0.1)
    with pytest.raises(DomainError):
        ChargeConfiguration([], [], [], 0.0)
    cfg = ChargeConfiguration([(1.0, 0, 0)], [(0, 0, 0)], [1.0], 0.1)
    assert np.allclose(config_field(cfg, [[0.0, 5.0, 0.0]])[0, 1], 1 / 25 - 5 / 26**1.5)
