"""Gaussian plane-wave radiation pulse, polarized along x and moving along +z."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import wofz

from .errors import DomainError
from .hydrogen import transition_frequency
from .units import C_LIGHT

LYMAN_ALPHA = transition_frequency(2, 1)
LYMAN_ALPHA_WAVELENGTH = 2 * math.pi * C_LIGHT / LYMAN_ALPHA


@dataclass(frozen=True)
class GaussianPulse:
    """A(t, z) = x_hat * amplitude * exp(-xi^2/2 sigma^2) cos(omega xi / c), xi = z - z0 - c t.

    Attributes:
        amplitude: Peak vector potential in atomic units.  The dimensionless
            coupling strength is amplitude / c (the peak of A/c).
        sigma_z: Longitudinal spread (Bohr).
        z0: Pulse center at t = 0 (Bohr).
        omega: Carrier angular frequency.
        c: Speed of light in atomic units.
    """

    amplitude: float
    sigma_z: float
    z0: float
    omega: float = LYMAN_ALPHA
    c: float = C_LIGHT

    def __post_init__(self):
        if not self.sigma_z > 0:
            raise DomainError("sigma_z must be positive")

    @property
    def polarization(self) -> np.ndarray:
        return np.array([1.0, 0.0, 0.0])

    @property
    def propagation(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0])

    @property
    def coupling(self) -> float:
        """Peak of |A|/c, i.e. the dimensionless strength epsilon."""
        return self.amplitude / self.c

    @property
    def suppression_exponent(self) -> float:
        """Exponent -2 sigma^2 omega^2 / c^2 of the counter-rotating factor."""
        return -2.0 * (self.sigma_z * self.omega / self.c) ** 2

    def flight_time(self) -> float:
        """Time for the pulse center to travel from z0 to the origin."""
        return -self.z0 / self.c

    def profile(self, t, z) -> np.ndarray:
        """Scalar profile exp(-xi^2/2 sigma^2) cos(omega xi/c)."""
        xi = np.asarray(z, float) - self.z0 - self.c * np.asarray(t, float)
        return np.exp(-0.5 * (xi / self.sigma_z) ** 2) * np.cos(self.omega * xi / self.c)

    def vector_potential(self, t, z) -> np.ndarray:
        prof = self.amplitude * self.profile(t, z)
        out = np.zeros(np.shape(prof) + (3,))
        out[..., 0] = prof
        return out

    def profile_integral(self, xi1, xi2) -> np.ndarray:
        """int_{xi1}^{xi2} exp(-xi^2/2 sigma^2) cos(kappa xi) dxi, kappa = omega/c.

        Closed form through the Faddeeva function, stable for any sigma*kappa.
        """
        return _gauss_cos_antiderivative(xi2, self.sigma_z, self.omega / self.c) - _gauss_cos_antiderivative(
            xi1, self.sigma_z, self.omega / self.c
        )

    @classmethod
    def desk_scale(cls, coupling: float = 1e-4, sigma_in_wavelengths: float = 80.0, z0_in_sigmas: float = -12.0) -> "GaussianPulse":
        """Lyman-alpha pulse of resolvable size that starts well away from the atom."""
        sigma = sigma_in_wavelengths * LYMAN_ALPHA_WAVELENGTH
        return cls(coupling * C_LIGHT, sigma, z0_in_sigmas * sigma, LYMAN_ALPHA, C_LIGHT)

    @classmethod
    def laboratory_preset(cls, coupling: float = 1e-4) -> "GaussianPulse":
        """Laboratory-scale beam: sigma_z with sigma*omega/c about 707, z0 = -1 m.

        Only closed-form quantities are meaningful at this scale.
        """
        bohr_per_metre = 1.0 / 5.29177210903e-11
        sigma = 707.0 * C_LIGHT / LYMAN_ALPHA
        return cls(coupling * C_LIGHT, sigma, -1.0 * bohr_per_metre, LYMAN_ALPHA, C_LIGHT)


def _gauss_cos_antiderivative(xi, sigma: float, kappa: float) -> np.ndarray:
    """G(xi) = int_0^xi exp(-u^2/2 sigma^2) cos(kappa u) du (odd in xi)."""
    xi = np.asarray(xi, float)
    sgn = np.sign(xi)
    x = np.abs(xi) / (sigma * math.sqrt(2.0))
    y = sigma * kappa / math.sqrt(2.0)
    z = y + 1j * x
    val = math.exp(-y * y) - np.exp(-x * x + 2j * x * y) * wofz(z)
    return sgn * sigma * math.sqrt(math.pi / 2.0) * np.real(val)
