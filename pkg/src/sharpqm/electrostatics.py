"""Ball-regularized charges, their Coulomb fields, and electrostatic field energies.

Charges are in units of e, lengths in Bohr, energies in Hartree.  A ball
charge is a uniform distribution of total charge q on a ball of radius a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .hydrogen import as_points, solid_harmonic
from .units import C_LIGHT


@dataclass(frozen=True)
class BallCharge:
    """Uniformly charged ball with total charge ``charge`` (units of e)."""

    center: tuple
    radius: float
    charge: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)


@dataclass(frozen=True)
class ChargeConfiguration:
    """N electrons (charge -1) and K nuclei (charges +Z_k), one common radius a."""

    electrons: tuple = ()
    nuclei: tuple = ()
    Z: tuple = ()
    radius: float = 0.1

    def __post_init__(self):
        el = tuple(tuple(float(v) for v in np.asarray(q, float).reshape(3)) for q in self.electrons)
        nu = tuple(tuple(float(v) for v in np.asarray(q, float).reshape(3)) for q in self.nuclei)
        Z = tuple(float(z) for z in self.Z) if self.Z else tuple(1.0 for _ in nu)
        if len(Z) != len(nu):
            raise DomainError("need one Z per nucleus")
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        object.__setattr__(self, "electrons", el)
        object.__setattr__(self, "nuclei", nu)
        object.__setattr__(self, "Z", Z)

    @property
    def N(self) -> int:
        return len(self.electrons)

    @property
    def K(self) -> int:
        return len(self.nuclei)

    def balls(self) -> list[BallCharge]:
        a = self.radius
        out = [BallCharge(q, a, z) for q, z in zip(self.nuclei, self.Z)]
        out += [BallCharge(q, a, -1.0) for q in self.electrons]
        return out

    def translated(self, shift) -> "ChargeConfiguration":
        s = np.asarray(shift, float)
        return ChargeConfiguration(
            tuple(np.asarray(q) + s for q in self.electrons),
            tuple(np.asarray(q) + s for q in self.nuclei),
            self.Z,
            self.radius,
        )


def ball_potential(b: BallCharge, s) -> np.ndarray:
    """Electrostatic potential of a ball charge.

    q/r outside, q (3a^2 - r^2)/(2a^3) inside.
    """
    pts = as_points(s)
    r = np.linalg.norm(pts - b.c, axis=-1)
    a = b.radius
    with np.errstate(divide="ignore"):
        outside = b.charge / np.where(r > 0, r, 1.0)
    inside = b.charge * (3 * a * a - r * r) / (2 * a**3)
    return np.where(r >= a, outside, inside)


def ball_field(b: BallCharge, s) -> np.ndarray:
    """Electric field -grad(ball_potential)."""
    pts = as_points(s)
    d = pts - b.c
    r = np.linalg.norm(d, axis=-1)
    a = b.radius
    r3 = np.where(r >= a, r, a) ** 3
    return b.charge * d / r3[..., None]


def config_potential(cfg: ChargeConfiguration, s) -> np.ndarray:
    pts = as_points(s)
    return sum((ball_potential(b, pts) for b in cfg.balls()), np.zeros(pts.shape[:-1]))


def config_field(cfg: ChargeConfiguration, s) -> np.ndarray:
    pts = as_points(s)
    return sum((ball_field(b, pts) for b in cfg.balls()), np.zeros(pts.shape))


def ball_ball_kernel(d, a: float) -> np.ndarray:
    """Interaction energy of two unit uniform balls of radius a at distance d.

    1/d for d >= 2a, otherwise the convolution polynomial
    (1/a)(6/5 - x^2/2 + 3x^3/16 - x^5/160) with x = d/a.
    """
    d = np.asarray(d, dtype=float)
    x = d / a
    poly = (1.2 - 0.5 * x**2 + 0.1875 * x**3 - x**5 / 160.0) / a
    with np.errstate(divide="ignore"):
        coul = 1.0 / np.where(d > 0, d, 1.0)
    return np.where(x >= 2.0, coul, poly)


def pair_interaction(b1: BallCharge, b2: BallCharge) -> float:
    """Mollified Coulomb interaction q1 q2 W(d) of two equal-radius balls."""
    if not math.isclose(b1.radius, b2.radius, rel_tol=1e-12):
        raise PreconditionError("pair_interaction requires equal radii")
    d = float(np.linalg.norm(b1.c - b2.c))
    return float(b1.charge * b2.charge * ball_ball_kernel(d, b1.radius))


def self_energy(a: float, charge: float = 1.0) -> float:
    """Field energy (3/5) q^2 / a of an isolated uniform ball."""
    return 0.6 * charge * charge / a


def field_energy_components(cfg: ChargeConfiguration) -> dict:
    """Labelled parts of the electrostatic field energy (1/8pi) int |E|^2."""
    a = cfg.radius
    nuc = [BallCharge(q, a, z) for q, z in zip(cfg.nuclei, cfg.Z)]
    el = [BallCharge(q, a, -1.0) for q in cfg.electrons]
    nn = sum(pair_interaction(nuc[i], nuc[j]) for i in range(len(nuc)) for j in range(i + 1, len(nuc)))
    ne = sum(pair_interaction(x, y) for x in nuc for y in el)
    ee = sum(pair_interaction(el[i], el[j]) for i in range(len(el)) for j in range(i + 1, len(el)))
    comps = {
        "electron_self": self_energy(a) * cfg.N,
        "nuclear_self": sum(self_energy(a, z) for z in cfg.Z),
        "nucleus_nucleus": float(nn),
        "nucleus_electron": float(ne),
        "electron_electron": float(ee),
    }
    comps["total"] = sum(comps.values())
    return comps


def field_energy(cfg: ChargeConfiguration) -> float:
    """E_self + all pair interactions, E_self = (3/5a)(N + sum Z_k^2)."""
    return field_energy_components(cfg)["total"]


# --------------------------------------------------------------------------
# static external fields


@dataclass(frozen=True)
class ExternalStaticField:
    """Closed-form laboratory field.

    Attributes:
        kind: "zero", "uniform_E", "uniform_B", or "multipole".
        vector: Field vector for the uniform kinds.
        terms: For "multipole": (l, m, parity, coefficient) of regular solid
            harmonics r^l Y_lm, summed into phi_ext.
        source_free_radius: Radius of the ball about the origin that is free
            of laboratory sources (inf for uniform fields).
    """

    kind: str = "zero"
    vector: tuple = (0.0, 0.0, 0.0)
    terms: tuple = ()
    source_free_radius: float = math.inf

    def __post_init__(self):
        if self.kind not in ("zero", "uniform_E", "uniform_B", "multipole"):
            raise DomainError(f"unsupported external field kind {self.kind!r}")
        object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))

    @classmethod
    def uniform_E(cls, E0) -> "ExternalStaticField":
        return cls("uniform_E", tuple(E0))

    @classmethod
    def uniform_B(cls, B0) -> "ExternalStaticField":
        return cls("uniform_B", tuple(B0))

    @classmethod
    def multipole(cls, terms, source_free_radius: float) -> "ExternalStaticField":
        return cls("multipole", (0.0, 0.0, 0.0), tuple(tuple(t) for t in terms), float(source_free_radius))

    def phi(self, s) -> np.ndarray:
        pts = as_points(s)
        if self.kind == "uniform_E":
            return -pts @ np.array(self.vector)
        if self.kind == "multipole":
            out = np.zeros(pts.shape[:-1])
            for l, m, par, coef in self.terms:
                out = out + coef * solid_harmonic(int(l), int(m), par, pts)[0]
            return out
        return np.zeros(pts.shape[:-1])

    def E(self, s) -> np.ndarray:
        pts = as_points(s)
        if self.kind == "uniform_E":
            return np.broadcast_to(np.array(self.vector), pts.shape).copy()
        if self.kind == "multipole":
            out = np.zeros(pts.shape)
            for l, m, par, coef in self.terms:
                out = out - coef * solid_harmonic(int(l), int(m), par, pts, grad=True)[1]
            return out
        return np.zeros(pts.shape)

    def A(self, s) -> np.ndarray:
        """Coulomb-gauge vector potential (1/2) B x s for uniform B."""
        pts = as_points(s)
        if self.kind == "uniform_B":
            return 0.5 * np.cross(np.array(self.vector), pts)
        return np.zeros(pts.shape)

    def B(self, s) -> np.ndarray:
        pts = as_points(s)
        if self.kind == "uniform_B":
            return np.broadcast_to(np.array(self.vector), pts.shape).copy()
        return np.zeros(pts.shape)

    def energy_in_ball(self, radius: float) -> float | None:
        """(1/8pi) int (|E|^2+|B|^2) over a ball about the origin.

        Closed form for uniform fields; None for the multipole kind.
        """
        if self.kind == "zero":
            return 0.0
        if self.kind in ("uniform_E", "uniform_B"):
            v2 = float(np.dot(self.vector, self.vector))
            return v2 * radius**3 / 6.0
        return None


def _check_supports(cfg: ChargeConfiguration, ext: ExternalStaticField):
    for q in list(cfg.electrons) + list(cfg.nuclei):
        if np.linalg.norm(q) + cfg.radius >= ext.source_free_radius:
            raise PreconditionError("charge support overlaps the external source region")


def field_energy_with_external(cfg: ChargeConfiguration, ext: ExternalStaticField) -> dict:
    """Field energy with a static laboratory field, as labelled components.

    The configuration-dependent part is the electrostatic energy of the
    charges plus the coupling sum_j q_j phi_ext(q_j); the laboratory field
    energy itself is infinite for uniform fields and reported as None.
    """
    _check_supports(cfg, ext)
    comps = field_energy_components(cfg)
    el = np.array(cfg.electrons).reshape(-1, 3)
    nu = np.array(cfg.nuclei).reshape(-1, 3)
    comps["electron_external"] = float(-np.sum(ext.phi(el))) if cfg.N else 0.0
    comps["nucleus_external"] = float(np.dot(cfg.Z, ext.phi(nu))) if cfg.K else 0.0
    comps["external_field_energy"] = 0.0 if ext.kind == "zero" else None
    comps["total"] = (
        comps["electron_self"]
        + comps["nuclear_self"]
        + comps["nucleus_nucleus"]
        + comps["nucleus_electron"]
        + comps["electron_electron"]
        + comps["electron_external"]
        + comps["nucleus_external"]
    )
    return comps


def external_momentum_coupling(cfg: ChargeConfiguration, ext: ExternalStaticField, c: float = C_LIGHT) -> np.ndarray:
    """P_n = -(e/c) A_ext(q_n) for every electron, shape (N, 3)."""
    el = np.array(cfg.electrons, dtype=float).reshape(-1, 3)
    return -ext.A(el) / c


def ball_average(fn: Callable, center, a: float) -> np.ndarray:
    """Average of fn over the ball of radius a (degree-5 exact rule)."""
    from .quadrature import ball_rule

    off, w = ball_rule()
    pts = np.asarray(center, float) + a * off
    vals = np.asarray(fn(pts))
    return np.tensordot(w, vals, axes=(0, 0))


def sample_laplacian(fn: Callable, s, h: float = 1e-3) -> np.ndarray:
    """Fourth-order finite-difference Laplacian of a scalar field."""
    pts = as_points(s)
    out = -3 * 2.5 * fn(pts)
    for e in np.eye(3):
        out = out + (
            -fn(pts + 2 * h * e) + 16 * fn(pts + h * e) + 16 * fn(pts - h * e) - fn(pts - 2 * h * e)
        ) / 12.0
    return out / h**2


def charges_from_spec(electrons: Sequence, nuclei: Sequence, Z: Sequence, a: float) -> ChargeConfiguration:
    return ChargeConfiguration(tuple(electrons), tuple(nuclei), tuple(Z), a)


# --------------------------------------------------------------------------
# quadrature of the field energy


def _radial_tail(r0: float, n: int):
    """Gauss nodes for int_{r0}^inf f(r) dr via r = r0/u."""
    from .quadrature import gauss_legendre

    u, w = gauss_legendre(0.0, 1.0, n)
    return r0 / u, w * r0 / u**2


def _pair_overlap_integral(a: float, d: float, n: int = 48) -> float:
    """int s.(s - d e_z) / (max(r,a)^3 max(rho,a)^3) d^3s, rho = |s - d e_z|.

    Axisymmetric (r, mu) product rule in coordinates about the first center,
    with radial breaks at the ball radii and the mu break on the second
    ball's surface, so that every kink sits on a panel edge.
    """
    from .quadrature import gl_panels

    def integrand(r, mu):
        rho = np.sqrt(np.maximum(r * r + d * d - 2 * r * d * mu, 0.0))
        dot = r * r - r * d * mu
        return dot / (np.maximum(r, a) ** 3 * np.maximum(rho, a) ** 3)

    def mu_integral(r):
        breaks = [-1.0, 1.0]
        if abs(d - a) < r < d + a and d > 0:
            breaks.insert(1, (r * r + d * d - a * a) / (2 * r * d))
        # crowd nodes toward mu = 1 where the second center sits
        extra = [1.0 - 2.0 * 0.5**k for k in range(1, 8)]
        brk = np.unique(np.clip(np.array(breaks + extra), -1.0, 1.0))
        mu, w = gl_panels(brk, n // 2)
        return float(np.sum(w * integrand(r, mu)))

    edges = sorted({0.0, a, abs(d - a), d + a, 2 * (d + a)})
    edges = [e for e in edges if e >= 0]
    fine = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        fine.extend(np.linspace(lo, hi, 5)[:-1])
    fine.append(edges[-1])
    r, wr = gl_panels(np.array(fine), n)
    total = sum(w * ri * ri * mu_integral(ri) for ri, w in zip(r, wr))
    rt, wt = _radial_tail(edges[-1], n)
    total += sum(w * ri * ri * mu_integral(ri) for ri, w in zip(rt, wt))
    return 2 * math.pi * total


def field_energy_quadrature(cfg: ChargeConfiguration, n: int = 48) -> float:
    """(1/8pi) int |E|^2 by direct quadrature.

    |E|^2 is expanded into self and cross terms of the ball fields, each
    integrated over all space with a rule adapted to its two centers.
    """
    from .quadrature import gl_panels

    a = cfg.radius
    balls = cfg.balls()
    # self term: 4 pi q^2 int r^2 f(r)^2 dr with f = r/a^3 inside, 1/r^2 outside
    r, w = gl_panels(np.array([0.0, a]), n)
    inner = float(np.sum(w * r**4)) / a**6
    rt, wt = _radial_tail(a, n)
    outer = float(np.sum(wt / rt**2))
    total = sum(4 * math.pi * b.charge**2 * (inner + outer) for b in balls)
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            d = float(np.linalg.norm(balls[j].c - balls[i].c))
            total += 2 * balls[i].charge * balls[j].charge * _pair_overlap_integral(a, d, n)
    return total / (8 * math.pi)
