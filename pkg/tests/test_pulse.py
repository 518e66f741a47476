import math

import numpy as np
import pytest
from scipy.integrate import quad

from sharpqm.errors import DomainError
from sharpqm.pulse import LYMAN_ALPHA, GaussianPulse
from sharpqm.units import C_LIGHT, DEFAULT_SCALE, PhysicalScale


@pytest.mark.parametrize("sk", [0.0, 0.5, 3.0, 40.0])
def test_profile_integral_against_quad(sk):
    p = GaussianPulse(1.0, 2.0, -30.0, sk / 2.0 * C_LIGHT, C_LIGHT)
    for a, b in [(-5.0, 1.0), (0.3, 7.0), (-50.0, 50.0)]:
        ref = quad(lambda u: math.exp(-u * u / 8), a, b, weight="cos", wvar=p.omega / p.c, limit=400, epsabs=1e-15)[0]
        assert p.profile_integral(a, b) == pytest.approx(ref, abs=1e-13)


def test_presets():
    d = GaussianPulse.desk_scale()
    assert d.coupling == pytest.approx(1e-4)
    assert abs(d.z0) >= 10 * d.sigma_z
    lab = GaussianPulse.laboratory_preset()
    assert lab.sigma_z * lab.omega / lab.c == pytest.approx(707.0)
    assert lab.suppression_exponent == pytest.approx(-2 * 707.0**2)
    with pytest.raises(DomainError):
        GaussianPulse(1.0, 0.0, -10.0)


def test_vector_potential_shape_and_peak():
    d = GaussianPulse.desk_scale()
    A = d.vector_potential(d.flight_time(), np.array([0.0]))
    assert A.shape == (1, 3)
    assert A[0, 0] == pytest.approx(d.amplitude)
    assert LYMAN_ALPHA == 0.375


def test_units():
    s = DEFAULT_SCALE
    assert s.unit_si("energy") == pytest.approx(4.3597447222e-18, rel=1e-6)
    assert s.unit_si("length") == pytest.approx(5.29177210903e-11, rel=1e-6)
    assert s.unit_si("time") == pytest.approx(2.4188843265857e-17, rel=1e-6)
    assert s.unit_si("velocity") / 299792458.0 == pytest.approx(1 / 137.036, rel=1e-6)
    with pytest.raises(ValueError):
        PhysicalScale(0.0)
