import pytest

from sharpqm.errors import PreconditionError
from sharpqm.hartree import RadialGrid, RadialState, energy_relations, functional_F, scf_ground_state

# frozen from the converged default run (radial log grid, 4000 nodes to r = 60)
E_G = -0.046222
F_MIN = -0.243965


@pytest.fixture(scope="module")
def scf():
    return scf_ground_state(1.0)


def test_scf_energies(scf):
    assert scf.converged
    assert scf.E_g == pytest.approx(E_G, abs=2e-6)
    assert scf.F == pytest.approx(F_MIN, abs=2e-6)


def test_relations(scf):
    rel = energy_relations(scf)
    assert rel["all_ok"]
    assert rel["ratio_F_over_E1"] == pytest.approx(0.48793, abs=1e-5)
    assert rel["ratio_2F_over_E1"] == pytest.approx(0.97586, abs=1e-5)
    assert abs(rel["virial_residual"]) < 1e-6
    assert scf.E_g > scf.F > -0.5


def test_hydrogenic_trial_above_minimum(scf):
    grid = RadialGrid()
    for zeta in (0.5, 0.6, 0.8):
        st = RadialState.hydrogenic(grid, zeta).normalized()
        assert functional_F(st, 1.0) > scf.F


def test_variational_estimate_matches_closed_form():
    # for a 1s trial of exponent zeta: T = zeta^2/2, V = -Z zeta, U = (5/8) zeta
    grid = RadialGrid()
    st = RadialState.hydrogenic(grid, 0.7).normalized()
    expect = 0.5 * 0.49 - 0.7 + 0.5 * (5 / 8) * 0.7
    assert functional_F(st, 1.0) == pytest.approx(expect, abs=1e-7)


def test_precondition():
    with pytest.raises(PreconditionError):
        scf_ground_state(0.5)
