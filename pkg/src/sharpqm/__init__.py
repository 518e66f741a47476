"""Numerical laboratory for sharp-field quantum mechanics of hydrogen-like atoms.

Internal computations use Hartree atomic units throughout (e = hbar = m_e = 1,
c = 1/alpha).  Unit conversion happens only at the command-line boundary.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .units import PhysicalScale, DEFAULT_SCALE, C_LIGHT, ALPHA  # noqa: E402

__all__ = ["PhysicalScale", "DEFAULT_SCALE", "C_LIGHT", "ALPHA", "__version__"]
