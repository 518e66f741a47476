import math

import pytest
from scipy.integrate import quad

from sharpqm.errors import PreconditionError
from sharpqm.hydrogen import QuantumNumbers
from sharpqm.perturbation import (
    amplitude_evolution,
    asymptotic_amplitude,
    cauchy_schwarz_bound,
    default_basis,
    matrix_element,
    rotating_terms,
    suppression_report,
)
from sharpqm.pulse import LYMAN_ALPHA, GaussianPulse

S100, S210, S211 = (QuantumNumbers.parse(s) for s in ("100+", "210+", "211+"))


def test_dipole_matrix_element_closed_form():
    # -<d_x psi_100|psi_2px> = (1/(3 sqrt 2)) int r^3 exp(-3r/2) dr
    exact = 6 / 1.5**4 / (3 * math.sqrt(2))
    assert matrix_element(S100, S211, None) == pytest.approx(exact, rel=1e-8)
    assert matrix_element(S211, S100, None) == pytest.approx(-exact, rel=1e-8)
    assert abs(matrix_element(S100, S210, None)) < 1e-12


def test_matrix_element_bounded():
    p = GaussianPulse.desk_scale()
    t = p.flight_time()
    me = matrix_element(S100, S211, p, t)
    assert 0 < abs(me) <= cauchy_schwarz_bound(S100, S211, p)
    # far from the atom the pulse has not arrived yet
    assert abs(matrix_element(S100, S211, p, 0.0)) < 1e-20


def test_default_basis():
    labels = [b.label for b in default_basis(4)]
    assert len(labels) == 30 and len(set(labels)) == 30


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_rotating_terms_against_quadrature(x):
    sigma = x * 137.036 / LYMAN_ALPHA
    p = GaussianPulse(1.0, sigma, -12 * sigma)
    kappa, nu = p.omega / p.c, LYMAN_ALPHA / p.c
    env = lambda xi: math.exp(-xi * xi / (2 * sigma**2))  # noqa: E731
    lim = 12 * sigma
    co = quad(lambda xi: env(xi) * math.cos((kappa - nu) * xi), -lim, lim, limit=400)[0] / 2
    counter = quad(lambda xi: env(xi) * math.cos((kappa + nu) * xi), -lim, lim, limit=400)[0] / 2
    got = rotating_terms(p, LYMAN_ALPHA)
    assert got[0] == pytest.approx(co, rel=1e-9)
    assert got[1] == pytest.approx(counter, rel=1e-7, abs=1e-14 * sigma)
    assert got[1] / got[0] == pytest.approx(math.exp(-2 * x * x), rel=1e-9)


def test_suppression_report_laboratory():
    rep = suppression_report(GaussianPulse.laboratory_preset())
    assert not rep["ratio_representable"] and rep["ratio"] == 0.0
    assert rep["log_ratio"] == pytest.approx(-2 * rep["sigma_omega_over_c"] ** 2, rel=1e-12)


def test_evolution_matches_closed_form():
    p = GaussianPulse.desk_scale()
    out = amplitude_evolution(S211, p, basis=[S100])
    closed = asymptotic_amplitude(S211, S100, p)
    assert abs(out.final("100+") - closed) <= 1e-6 * abs(closed)
    co, counter = asymptotic_amplitude(S211, S100, p, split=True)
    assert abs(co + counter - closed) < 1e-15 and abs(counter) < abs(co)
    assert abs(out.probabilities()[0, 0]) == 0.0
    assert not out.flags


def test_polarization_selection():
    p = GaussianPulse.desk_scale()
    out = amplitude_evolution(S210, p, basis=[S100])
    assert abs(out.final("100+")) < 1e-14


def test_pulse_must_start_far_away():
    p = GaussianPulse.desk_scale(z0_in_sigmas=-5.0)
    with pytest.raises(PreconditionError):
        amplitude_evolution(S211, p, basis=[S100])
