"""Energy-momentum audits of sharp fields averaged over the Born density.

With <f>(t) = int f(t, q) rho(t, q) d^3q, v the guiding velocity and
{[F]}_a(t, q) the average of F(t, s; q) over the ball |s - q| <= a, fields
obeying the sharp field equations satisfy

    d<E>/dt           = e < {[E]}_a . v >
    d<P>/dt           = e ( <{[E]}_a> + < v x {[B]}_a / c > )
    d<|P|^2 / 2>/dt   = e ( <P . {[E]}_a> + < P . (v x {[B]}_a / c)> )

Each audit returns both sides and their difference, so that fields which do
not solve the field equations can still be checked side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError, UnsupportedError
from .hydrogen import BoundSuperposition, QuantumNumbers, density_current
from .quadrature import ball_rule, spherical_volume_rule
from .units import C_LIGHT

Q_RADIUS = 40.0


def q_grid(n_r: int = 8, n_theta: int = 10, n_phi: int = 20, r_max: float = Q_RADIUS):
    """Spherical product rule over the atomic ball, radially graded toward the nucleus."""
    breaks = r_max * np.linspace(0.0, 1.0, 13) ** 2
    return spherical_volume_rule(breaks, n_r, n_theta, n_phi)


@dataclass
class ExpectationContext:
    """State plus field evaluators for Born-density averages.

    Attributes:
        state: Bound superposition supplying rho and v.
        a: Ball radius for {[.]}_a (must be > 0).
        E, B: Field evaluators (t, s[..., 3], q[..., 3]) -> (..., 3).
        energy: Field energy evaluator (t, q[M, 3]) -> (M,).
        momentum: Field momentum evaluator (t, q[M, 3]) -> (M, 3).
        velocity: Optional override (t, q[M, 3]) -> (M, 3) of J/rho.
        grid: (points, weights) in q; default ``q_grid()``.
        e: Charge unit.
        c: Speed of light.
    """

    state: BoundSuperposition
    a: float
    E: Callable | None = None
    B: Callable | None = None
    energy: Callable | None = None
    momentum: Callable | None = None
    velocity: Callable | None = None
    grid: tuple | None = None
    e: float = 1.0
    c: float = C_LIGHT

    def __post_init__(self):
        if not self.a > 0:
            raise UnsupportedError("the ball average {[.]}_a is only defined for a > 0")
        if self.grid is None:
            self.grid = q_grid()
        mass = self.mass(0.0)
        if not 0.999 <= mass <= 1.0 + 1e-9:
            raise PreconditionError(f"q-grid captures probability {mass:.6f}, outside [0.999, 1]")

    @property
    def points(self) -> np.ndarray:
        return self.grid[0]

    def rho_v(self, t: float):
        rho, J = density_current(self.state, t, self.points)
        if self.velocity is not None:
            return rho, np.asarray(self.velocity(t, self.points), float)
        safe = np.where(rho > 1e-300, rho, 1.0)
        v = np.where((rho > 1e-300)[:, None], J / safe[:, None], 0.0)
        return rho, v

    def mass(self, t: float) -> float:
        rho, _ = density_current(self.state, t, self.points)
        return float(np.sum(self.grid[1] * rho))

    def expect(self, t: float, values) -> np.ndarray:
        rho, _ = density_current(self.state, t, self.points)
        w = self.grid[1] * rho
        return np.tensordot(w, np.asarray(values), axes=(0, 0))

    def ball_average(self, F: Callable, t: float) -> np.ndarray:
        off, w = ball_rule()
        q = self.points
        s = q[:, None, :] + self.a * off[None, :, :]
        vals = np.asarray(F(t, s, np.broadcast_to(q[:, None, :], s.shape)), float)
        return np.einsum("k,mkj->mj", w, vals)


def _ddt(f: Callable, t: float, dt: float):
    if t - 2 * dt < 0:
        raise PreconditionError("time stencil reaches t < 0")
    return (-f(t + 2 * dt) + 8 * f(t + dt) - 8 * f(t - dt) + f(t - 2 * dt)) / (12 * dt)


@dataclass(frozen=True)
class IdentityReport:
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(np.asarray(self.lhs) - np.asarray(self.rhs))))

    def as_dict(self) -> dict:
        return {"lhs": np.asarray(self.lhs).tolist(), "rhs": np.asarray(self.rhs).tolist(), "residual": self.residual}


def energy_identity_residual(ctx: ExpectationContext, t: float, dt: float = 1e-3) -> IdentityReport:
    """d<E>/dt versus e <{[E]}_a . v>."""
    if ctx.energy is None or ctx.E is None:
        raise DomainError("energy audit needs energy and E evaluators")
    lhs = _ddt(lambda tt: float(ctx.expect(tt, ctx.energy(tt, ctx.points))), t, dt)
    _, v = ctx.rho_v(t)
    Ea = ctx.ball_average(ctx.E, t)
    rhs = ctx.e * float(ctx.expect(t, np.sum(Ea * v, axis=-1)))
    return IdentityReport(np.asarray(lhs), np.asarray(rhs))


def momentum_identity_residuals(ctx: ExpectationContext, t: float, dt: float = 1e-3) -> tuple[IdentityReport, IdentityReport]:
    """Vector identity for d<P>/dt and scalar identity for d<|P|^2/2>/dt."""
    if ctx.momentum is None or ctx.E is None:
        raise DomainError("momentum audit needs momentum and E evaluators")
    P_of = lambda tt: ctx.momentum(tt, ctx.points)  # noqa: E731
    lhs_v = _ddt(lambda tt: ctx.expect(tt, P_of(tt)), t, dt)
    lhs_s = _ddt(lambda tt: float(ctx.expect(tt, 0.5 * np.sum(P_of(tt) ** 2, axis=-1))), t, dt)
    _, v = ctx.rho_v(t)
    Ea = ctx.ball_average(ctx.E, t)
    force = Ea.copy()
    if ctx.B is not None:
        force = force + np.cross(v, ctx.ball_average(ctx.B, t)) / ctx.c
    P = np.asarray(P_of(t), float)
    rhs_v = ctx.e * ctx.expect(t, force)
    rhs_s = ctx.e * float(ctx.expect(t, np.sum(P * force, axis=-1)))
    return IdentityReport(lhs_v, rhs_v), IdentityReport(np.asarray(lhs_s), np.asarray(rhs_s))


# --------------------------------------------------------------------------
# Jensen gap


def s_grid(r_max: float = 30.0, n_r: int = 8, n_theta: int = 8, n_phi: int = 16):
    breaks = r_max * np.linspace(0.0, 1.0, 9) ** 2
    return spherical_volume_rule(breaks, n_r, n_theta, n_phi)


@dataclass(frozen=True)
class JensenReport:
    expected_energy: float
    energy_of_mean: float
    gap: float

    def as_dict(self) -> dict:
        return {"expected_energy": self.expected_energy, "energy_of_mean": self.energy_of_mean, "gap": self.gap}


def jensen_gap(ctx: ExpectationContext, t: float, sgrid=None, qgrid=None) -> JensenReport:
    """<E> - (1/8pi) int (|<E>_rho|^2 + |<B>_rho|^2) on one shared discrete grid.

    The q weights are normalized to unit mass, which makes the discrete gap
    a sum of non-negative variances that vanishes for q-independent fields.  Both grids default to
    coarser rules than the identity audits, since the cost is their product.
    """
    if ctx.E is None:
        raise DomainError("Jensen gap needs the E evaluator")
    s_pts, s_w = s_grid() if sgrid is None else sgrid
    q_pts, q_w = q_grid(4, 6, 12) if qgrid is None else qgrid
    rho, _ = density_current(ctx.state, t, q_pts)
    wq = q_w * rho
    wq = wq / float(wq.sum())
    exp_e = 0.0
    mean_e = 0.0
    fields = [ctx.E] + ([ctx.B] if ctx.B is not None else [])
    for F in fields:
        sq = np.zeros(len(s_pts))
        mean = np.zeros((len(s_pts), 3))
        keep = np.nonzero(wq > 0)[0]
        for b0 in range(0, len(keep), 32):
            idx = keep[b0 : b0 + 32]
            q = q_pts[idx][:, None, :]
            vals = np.asarray(F(t, np.broadcast_to(s_pts, (len(idx),) + s_pts.shape), np.broadcast_to(q, (len(idx),) + s_pts.shape)), float)
            sq += wq[idx] @ np.sum(vals**2, axis=-1)
            mean += np.einsum("m,msj->sj", wq[idx], vals)
        exp_e += float(np.sum(s_w * sq))
        mean_e += float(np.sum(s_w * np.sum(mean**2, axis=-1)))
    exp_e /= 8 * math.pi
    mean_e /= 8 * math.pi
    return JensenReport(exp_e, mean_e, exp_e - mean_e)


# --------------------------------------------------------------------------
# commutator diagnostic


def basis_n_le(n_max: int = 3) -> list[QuantumNumbers]:
    from .hydrogen import labels

    return list(labels(n_max))


def state_coefficients(state: BoundSuperposition, t: float, basis: list[QuantumNumbers]) -> np.ndarray:
    """Coefficients of ``state`` at time t in ``basis`` (labels outside it are an error)."""
    lab = [b.label for b in basis]
    coeffs = state.coefficients(t)
    out = np.zeros(len(basis), complex)
    for (qn, _), c in zip(state.terms, coeffs):
        if qn.label not in lab:
            raise PreconditionError(f"state component {qn.label} outside the n <= 3 basis")
        out[lab.index(qn.label)] += c
    return out


def pulse_interaction_matrix(pulse, t: float, basis: list[QuantumNumbers], c: float | None = None) -> np.ndarray:
    """Matrix of H_int = -(i/c) A(t, z) d/dx between basis states."""
    from .perturbation import reduced_matrix_density

    c = pulse.c if c is None else c
    n = len(basis)
    M = np.zeros((n, n), complex)
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            d = reduced_matrix_density(bi, bj)
            M[i, j] = -1j / c * pulse.amplitude * d.weighted(pulse.profile(t, d.z))
    return M


def commutator_diagnostic(state: BoundSuperposition, interaction: Callable | np.ndarray | None, t: float, basis=None, h_rad: float = 0.0) -> float:
    """<(1/i)[H_hyd, H_int + H_rad]> in the truncated eigenbasis.

    Args:
        state: Superposition within the basis (default n <= 3).
        interaction: Hermitian matrix of H_int over ``basis`` or a callable
            t -> matrix; None for H_int = 0.
        h_rad: H_rad as a constant number (commutes with everything).
    """
    basis = basis_n_le(3) if basis is None else basis
    cvec = state_coefficients(state, t, basis)
    E = np.array([b.energy for b in basis])
    V = np.zeros((len(basis), len(basis)), complex)
    if interaction is not None:
        V = V + (interaction(t) if callable(interaction) else np.asarray(interaction, complex))
    V = V + h_rad * np.eye(len(basis))
    comm = (E[:, None] - E[None, :]) * V
    val = -1j * np.conj(cvec) @ comm @ cvec
    return float(val.real)


def commutator_series(state: BoundSuperposition, interaction, times, basis=None) -> np.ndarray:
    return np.array([commutator_diagnostic(state, interaction, float(t), basis) for t in times])
