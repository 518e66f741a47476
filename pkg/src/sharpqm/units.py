"""Hartree atomic units and conversion to SI at the I/O boundary."""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _sc

ALPHA = 1.0 / 137.036
C_LIGHT = 1.0 / ALPHA


@dataclass(frozen=True)
class PhysicalScale:
    """Fine-structure parameter and the unit system it induces.

    Inside the library e = hbar = m_e = 1 and c = 1/alpha_s.  The SI values of
    the atomic units follow from m_e, c, hbar and alpha_s:

        energy unit = alpha_s**2 * m_e * c**2
        length unit = hbar / (m_e * c * alpha_s)
        time unit   = hbar / (m_e * c**2 * alpha_s**2)
    """

    alpha_s: float = ALPHA

    def __post_init__(self):
        if not self.alpha_s > 0:
            raise ValueError("alpha_s must be positive")

    @property
    def c(self) -> float:
        return 1.0 / self.alpha_s

    @property
    def energy_unit_si(self) -> float:
        return self.alpha_s**2 * _sc.m_e * _sc.c**2

    @property
    def length_unit_si(self) -> float:
        return _sc.hbar / (_sc.m_e * _sc.c * self.alpha_s)

    @property
    def time_unit_si(self) -> float:
        return _sc.hbar / (_sc.m_e * _sc.c**2 * self.alpha_s**2)

    def unit_si(self, kind: str) -> float:
        """SI value of one atomic unit of ``kind``.

        Args:
            kind: One of "energy", "length", "time", "frequency", "velocity",
                "dimensionless".
        """
        table = {
            "energy": self.energy_unit_si,
            "length": self.length_unit_si,
            "time": self.time_unit_si,
            "frequency": 1.0 / self.time_unit_si,
            "velocity": self.length_unit_si / self.time_unit_si,
            "dimensionless": 1.0,
        }
        try:
            return table[kind]
        except KeyError:
            raise ValueError(f"unknown quantity kind {kind!r}") from None

    def to_si(self, value, kind: str):
        return value * self.unit_si(kind)

    def from_si(self, value, kind: str):
        return value / self.unit_si(kind)


DEFAULT_SCALE = PhysicalScale()
