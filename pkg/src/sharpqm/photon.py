"""Weber vector Psi = E + iB, the photon guiding law, and L-photon energies.

The photon velocity field is v = c Im(Psi* x Psi) / (Psi* . Psi).  By
Cauchy-Schwarz |Im(Psi* x Psi)| <= |Psi|^2, so |v| <= c, with equality for
null fields (|E| = |B|, E.B = 0) such as circularly polarized plane waves.

In Weber form the single-photon equations read

    D Psi = -i c curl Psi + 4 pi e v delta^(a)_{q_el},   D = d_t + v . grad_q_el
    div Psi = 4 pi (Z delta^(a)_0 - sum_n delta^(a)_{q_n})
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .bohm import Trajectory, VelocityField
from .electrostatics import ChargeConfiguration, config_field, field_energy_quadrature
from .errors import DomainError, NodeProximityError, PreconditionError, UnsupportedError
from .hydrogen import as_points
from .quadrature import gl_panels, sphere_product_rule
from .units import C_LIGHT

EPS_NODE = 1e-24


@dataclass(frozen=True)
class WeberField:
    """Evaluator (t, s[..., 3], q_el[N, 3]) -> complex Psi[..., 3].

    Attributes:
        fn: The evaluator.
        tag: Source description ("plane_wave", "coulomb", "radiation", ...).
        config: Static charge configuration for Coulomb fields (electron
            positions are replaced by q_el at evaluation time).
    """

    fn: Callable
    tag: str = "synthetic"
    config: ChargeConfiguration | None = None

    def __call__(self, t: float, s, q_el=None) -> np.ndarray:
        return np.asarray(self.fn(t, as_points(s), q_el), complex)

    def fields(self, t: float, s, q_el=None) -> tuple[np.ndarray, np.ndarray]:
        """(E, B) = (Re Psi, Im Psi)."""
        psi = self(t, s, q_el)
        return psi.real.copy(), psi.imag.copy()

    @classmethod
    def from_fields(cls, E: Callable, B: Callable | None = None, tag: str = "fields") -> "WeberField":
        """Psi = E + iB from real evaluators E(t, s, q_el), B(t, s, q_el)."""

        def fn(t, s, q):
            out = np.asarray(E(t, s, q), complex)
            if B is not None:
                out = out + 1j * np.asarray(B(t, s, q))
            return out

        return cls(fn, tag)

    @classmethod
    def plane_wave(cls, amplitude: float, k, helicity: int = 1, c: float = C_LIGHT, phase: float = 0.0) -> "WeberField":
        """Circularly polarized vacuum plane wave along k."""
        k = np.asarray(k, float)
        kn = float(np.linalg.norm(k))
        if kn == 0:
            raise DomainError("wave vector must be nonzero")
        if helicity not in (1, -1):
            raise DomainError("helicity must be +1 or -1")
        kh = k / kn
        e1 = np.cross(kh, [1.0, 0.0, 0.0] if abs(kh[0]) < 0.9 else [0.0, 1.0, 0.0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(kh, e1)

        def fn(t, s, q):
            ph = s @ k - kn * c * t + phase
            cp, sp = np.cos(ph)[..., None], np.sin(ph)[..., None]
            E = amplitude * (e1 * cp - helicity * e2 * sp)
            B = amplitude * (e2 * cp + helicity * e1 * sp)
            return E + 1j * B

        return cls(fn, "plane_wave")

    @classmethod
    def coulomb(cls, cfg: ChargeConfiguration) -> "WeberField":
        """Electrostatic Psi of the ball charges; electrons follow q_el when given."""

        def fn(t, s, q):
            conf = cfg if q is None else ChargeConfiguration(tuple(np.asarray(q, float).reshape(-1, 3)), cfg.nuclei, cfg.Z, cfg.radius)
            return config_field(conf, s).astype(complex)

        return cls(fn, "coulomb", cfg)

    @classmethod
    def radiation(cls, ctx, Z: float = 1.0, h_t: float = 1e-3, h_s: float = 1e-3) -> "WeberField":
        """Point-source Coulomb field of the electron at q_el plus nucleus, plus radiation E and B.

        The radiation part comes from the position-space vector potential of
        ``ctx`` (see the radiation module) by finite differences.
        """
        from .radiation import apot_position

        e = ctx.charge

        def fn(t, s, q):
            pts = as_points(s)
            qe = ctx.trajectory.position(t) if q is None else np.asarray(q, float).reshape(3)
            out = np.zeros(pts.shape, complex)
            for i, p in np.ndenumerate(np.empty(pts.shape[:-1])):
                si = pts[i]
                d = si - qe
                coul = -e * d / np.linalg.norm(d) ** 3 + Z * si / np.linalg.norm(si) ** 3
                A = lambda tt, ss: apot_position(ctx, tt, ss)  # noqa: E731
                dA = (-A(t + 2 * h_t, si) + 8 * A(t + h_t, si) - 8 * A(t - h_t, si) + A(t - 2 * h_t, si)) / (12 * h_t)
                J = np.zeros((3, 3))
                for j, ej in enumerate(np.eye(3)):
                    J[:, j] = (
                        -A(t, si + 2 * h_s * ej) + 8 * A(t, si + h_s * ej) - 8 * A(t, si - h_s * ej) + A(t, si - 2 * h_s * ej)
                    ) / (12 * h_s)
                B = np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])
                out[i] = coul - dA / ctx.c + 1j * B
            return out

        return cls(fn, "radiation")


# --------------------------------------------------------------------------
# guiding law


def photon_velocity(psi, c: float = C_LIGHT, eps_node: float = EPS_NODE) -> np.ndarray:
    """c Im(psi* x psi) / (psi* . psi) for psi of shape (..., 3).

    Raises:
        NodeProximityError: |psi|^2 <= eps_node.
    """
    psi = np.asarray(psi, complex)
    n2 = np.sum(np.abs(psi) ** 2, axis=-1)
    if np.any(n2 <= eps_node):
        raise NodeProximityError("Weber vector vanishes; photon velocity undefined")
    cr = np.imag(np.cross(np.conj(psi), psi))
    return c * cr / n2[..., None]


@dataclass
class PhotonPath:
    trajectory: Trajectory
    times: np.ndarray
    speeds: np.ndarray

    @property
    def max_speed(self) -> float:
        return float(self.speeds.max()) if self.speeds.size else 0.0


def integrate_photon(
    field: WeberField,
    start,
    electron_traj: Trajectory | None,
    t_span: tuple,
    c: float = C_LIGHT,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    samples: int = 201,
) -> PhotonPath:
    """Integrate dq_ph/dt = photon_velocity(Psi(t, q_ph; q_el(t))).

    The speed log records |v| at ``samples`` uniform times.
    """
    t0, t1 = map(float, t_span)

    def q_el(t):
        return None if electron_traj is None else electron_traj.position(t)

    def rhs(t, y):
        return photon_velocity(field(t, y[None, :], q_el(t))[0], c)

    sol = solve_ivp(rhs, (t0, t1), np.asarray(start, float).reshape(3), method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise PreconditionError(f"photon integration failed: {sol.message}")
    ts = np.linspace(t0, t1, samples)
    pos = sol.sol(ts).T
    speeds = np.array([np.linalg.norm(rhs(t, p)) for t, p in zip(ts, pos)])
    dense = sol.sol

    def vel(tau, _d=dense):
        tau = np.atleast_1d(np.asarray(tau, float))
        return np.array([rhs(t, p) for t, p in zip(tau, _d(tau).T)])

    traj = Trajectory.from_functions(lambda tau: dense(np.asarray(tau, float)).T, vel, t0, t1, samples=samples)
    return PhotonPath(traj, ts, speeds)


# --------------------------------------------------------------------------
# single-photon residuals


def _delta_ball(s, center, a: float) -> np.ndarray:
    r = np.linalg.norm(as_points(s) - np.asarray(center, float), axis=-1)
    return np.where(r <= a, 3.0 / (4 * math.pi * a**3), 0.0)


def _residuals_at(field, vfield, cfg, t, s, q_el, h, e, c):
    q_el = np.asarray(q_el, float).reshape(-1, 3)
    v = np.array([vfield(t, q) for q in q_el]).reshape(-1, 3)
    f = lambda tt, ss, qq: field(tt, np.asarray(ss, float).reshape(1, 3), qq)[0]  # noqa: E731
    D = (
        -f(t + 2 * h, s, q_el + 2 * h * v)
        + 8 * f(t + h, s, q_el + h * v)
        - 8 * f(t - h, s, q_el - h * v)
        + f(t - 2 * h, s, q_el - 2 * h * v)
    ) / (12 * h)
    J = np.zeros((3, 3), complex)
    for j, ej in enumerate(np.eye(3)):
        J[:, j] = (-f(t, s + 2 * h * ej, q_el) + 8 * f(t, s + h * ej, q_el) - 8 * f(t, s - h * ej, q_el) + f(t, s - 2 * h * ej, q_el)) / (12 * h)
    curl = np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])
    div = np.trace(J)
    a = cfg.radius
    src = sum(4 * math.pi * e * vn * float(_delta_ball(s, qn, a)) for vn, qn in zip(v, q_el))
    ev = D + 1j * c * curl - src
    rho = sum(z * float(_delta_ball(s, R, a)) for z, R in zip(cfg.Z, cfg.nuclei)) - sum(float(_delta_ball(s, qn, a)) for qn in q_el)
    dv = div - 4 * math.pi * rho
    scale = max(float(np.linalg.norm(D)), c * float(np.linalg.norm(curl)), float(np.abs(J).max()), 1.0)
    return ev, dv, scale


@dataclass(frozen=True)
class PhotonResidual:
    evolution: np.ndarray
    divergence: complex
    evolution_norm: float
    divergence_abs: float
    converged: bool
    h: float


def single_photon_residual(
    field: WeberField,
    vfield: VelocityField,
    cfg: ChargeConfiguration,
    t: float,
    q_ph,
    q_el,
    h: float = 1e-3,
    c: float | None = None,
    e: float = 1.0,
    floor: float = 1e-9,
) -> PhotonResidual:
    """Residuals of both single-photon equations by 4th-order stencils.

    The stencil is evaluated at h and h/2; ``converged`` requires the
    residual to change by less than 10%, to drop at the stencil order, or both to be below ``floor``
    times the size of the individual terms (roundoff level).

    Raises:
        PreconditionError: the stencil reaches t < 0 or straddles a ball surface.
    """
    c = C_LIGHT if c is None else c
    s = np.asarray(q_ph, float).reshape(3)
    if t - 2 * h < 0:
        raise PreconditionError("time stencil reaches t < 0")
    centers = list(cfg.nuclei) + list(np.asarray(q_el, float).reshape(-1, 3))
    for cen in centers:
        r = np.linalg.norm(s - np.asarray(cen))
        if abs(r - cfg.radius) < 2 * h * math.sqrt(3):
            raise PreconditionError("stencil straddles a charge surface")
    ev1, dv1, sc = _residuals_at(field, vfield, cfg, t, s, q_el, h, e, c)
    ev2, dv2, _ = _residuals_at(field, vfield, cfg, t, s, q_el, h / 2, e, c)
    n1, n2 = float(np.linalg.norm(ev1)), float(np.linalg.norm(ev2))
    d1, d2 = abs(dv1), abs(dv2)

    def settled(x1, x2):
        small = x1 < floor * sc and x2 < floor * sc
        # a residual that vanishes in the limit shrinks at the stencil order
        return small or abs(x1 - x2) <= 0.1 * max(x1, x2) or x2 <= x1 / 8

    return PhotonResidual(ev2, dv2, n2, d2, settled(n1, n2) and settled(d1, d2), h / 2)


# --------------------------------------------------------------------------
# L-photon energies


@dataclass(frozen=True)
class LPhotonProduct:
    """Hartree product of L single-photon Weber fields.

    Only product states are represented; ``entangled`` marks a symmetrized
    non-product state, which the energy functionals reject.
    """

    factors: tuple
    entangled: bool = False

    def __post_init__(self):
        if len(self.factors) < 1:
            raise DomainError("an L-photon state needs L >= 1 factors")

    @property
    def L(self) -> int:
        return len(self.factors)

    def value(self, t: float, points, q_el=None) -> np.ndarray:
        """Psi^L(q_1, ..., q_L) as a tensor of shape (3,)*L; points has shape (L, 3)."""
        pts = np.asarray(points, float).reshape(self.L, 3)
        out = np.ones(())
        for f, p in zip(self.factors, pts):
            out = np.multiply.outer(out, f(t, p[None, :], q_el)[0])
        return out


def whole_space_norm2(field: WeberField, t: float = 0.0, q_el=None, center=(0.0, 0.0, 0.0), r_inner: float = 20.0, panels: int = 40, n: int = 16, n_theta: int = 24, n_phi: int = 48) -> float:
    """int |Psi|^2 d^3s over R^3.

    Coulomb fields use the exact pair-adapted rule of the electrostatics
    module; other fields a spherical product rule plus a mapped tail.
    """
    if field.tag == "coulomb" and field.config is not None:
        cfg = field.config
        if q_el is not None:
            cfg = ChargeConfiguration(tuple(np.asarray(q_el, float).reshape(-1, 3)), cfg.nuclei, cfg.Z, cfg.radius)
        return 8 * math.pi * field_energy_quadrature(cfg)
    from .quadrature import gauss_legendre

    dirs, wa = sphere_product_rule(n_theta, n_phi)
    r, wr = gl_panels(np.linspace(0.0, r_inner, panels + 1), n)
    u, wu = gauss_legendre(0.0, 1.0, 4 * n)
    rt, wt = r_inner / u, wu * r_inner / u**2
    rr = np.concatenate([r, rt])
    ww = np.concatenate([wr, wt]) * rr**2
    total = 0.0
    c0 = np.asarray(center, float)
    for ri, wi in zip(rr, ww):
        psi = field(t, c0 + ri * dirs, q_el)
        total += wi * float(np.sum(wa * np.sum(np.abs(psi) ** 2, axis=-1)))
    return total


def lphoton_energy(state, variant: str = "per-factor", t: float = 0.0, q_el=None, weights: dict | None = None) -> float:
    """Field energy of an L-photon Hartree product.

    variants:
        per-factor: (1/8 pi L) sum_l int |Pi_l Psi^L|^2 (Pi_l picks factor l);
        geometric:  (1/8 pi) (int |Psi^L|^2 d^{3L}q)^{1/L};
        weighted:   sum_L w_L * per-factor(L), with ``state`` a dict {L: product}
                    or a list of products and ``weights`` {L: w_L}.

    Raises:
        UnsupportedError: entangled (non-product) state.
        DomainError: invalid weights or unknown variant.
    """
    if variant == "weighted":
        states = state if isinstance(state, dict) else {s.L: s for s in state}
        if weights is None:
            raise DomainError("weighted variant needs weights")
        w = {int(k): float(v) for k, v in weights.items()}
        if any(v < 0 for v in w.values()) or not math.isclose(sum(w.values()), 1.0, abs_tol=1e-12):
            raise DomainError("weights must be non-negative and sum to 1")
        return sum(wl * lphoton_energy(states[L], "per-factor", t, q_el) for L, wl in w.items() if wl > 0)
    if getattr(state, "entangled", False):
        raise UnsupportedError("only Hartree-product L-photon states are supported")
    norms = [whole_space_norm2(f, t, q_el) for f in state.factors]
    if variant == "per-factor":
        return sum(norms) / (8 * math.pi * state.L)
    if variant == "geometric":
        # the 3L-dimensional integral of a product factorizes
        log_total = sum(math.log(nm) for nm in norms)
        return math.exp(log_total / state.L) / (8 * math.pi)
    raise DomainError(f"unknown variant {variant!r}")
