"""Radiation part of the sharp field along a characteristic.

Along a characteristic Q(tau) with velocity V(tau) the Fourier transformed
radiation fields obey forced oscillator equations.  With vanishing initial
data and G(tau) = P_perp(k) V(tau) delta_hat(a, k, Q(tau)) the solutions are

    E_hat(t, k) = 4 pi e  int_0^t cos(kc(t - tau)) G(tau) dtau
    B_hat(t, k) = -4 pi i e  k_hat x int_0^t sin(kc(t - tau)) G(tau) dtau
    A_hat(t, k) = -(4 pi e / |k|) int_0^t sin(kc(t - tau)) G(tau) dtau

so that B_hat = i k x A_hat and E_hat = -(1/c) dA_hat/dt.  In position space
the Coulomb-gauge vector potential of a point source splits into a retarded
term and a term supported outside the light cone:

    A(t, s) = -e V_perp(t_r) / (R (c + n.V))|_{t_r}
              + e int (V_perp - 2 V_par) c (t - tau) / R^3 1{R > c(t - tau)} dtau

with R = |Q(tau) - s|, n = (Q - s)/R and the projections taken along n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from .bohm import Trajectory
from .errors import DomainError, InvariantError, PreconditionError, SharpQMError
from .pulse import GaussianPulse
from .quadrature import ball_rule, gauss_legendre, gl_panels, sphere_product_rule
from .units import C_LIGHT

E_CHARGE = 1.0


# --------------------------------------------------------------------------
# form factor


def delta_hat(a: float, k, q) -> np.ndarray:
    """Fourier transform (2 pi)^{-3/2} int delta^(a)_q(s) e^{-i k.s} ds.

    Equals (3/4pi)(a|k|)^{-3/2} J_{3/2}(a|k|) e^{-i k.q}, evaluated as
    (2pi)^{-3/2} 3 j_1(x)/x e^{-ik.q} with a series for small x = a|k|.
    """
    if a < 0:
        raise DomainError("radius must be non-negative")
    k = np.asarray(k, float)
    q = np.asarray(q, float)
    phase = np.exp(-1j * np.sum(k * q, axis=-1))
    return form_factor(a, np.linalg.norm(k, axis=-1)) * phase


def form_factor(a: float, kmag) -> np.ndarray:
    """Modulus of delta_hat: (2pi)^{-3/2} * 3 j_1(a k)/(a k)."""
    x = a * np.asarray(kmag, float)
    small = x < 1e-2
    xs = np.where(small, 1.0, x)
    big = 3.0 * (np.sin(xs) - xs * np.cos(xs)) / xs**3
    x2 = x * x
    series = 1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2**3 / 15120.0
    return (2 * math.pi) ** -1.5 * np.where(small, series, big)


# --------------------------------------------------------------------------
# oscillator reduction


@dataclass(frozen=True)
class OscillatorSolution:
    """Solution of f + omega^2 int_0^t int_0^tau f = g with g(0) = 0.

    f(t) = int_0^t g'(tau) cos(omega (t - tau)) dtau, with g' from a
    Chebyshev interpolant of g on [0, T].
    """

    omega: float
    T: float
    g_cheb: np.ndarray
    degree: int

    def _map(self, t):
        return 2.0 * np.asarray(t, float) / self.T - 1.0

    def g(self, t) -> np.ndarray:
        return C.chebval(self._map(t), self.g_cheb)

    def dg(self, t) -> np.ndarray:
        return C.chebval(self._map(t), C.chebder(self.g_cheb)) * (2.0 / self.T)

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, float))
        n = self.degree + int(abs(self.omega) * self.T / 2) + 24
        x, w = gauss_legendre(0.0, 1.0, n)
        tau = t[:, None] * x[None, :]
        vals = self.dg(tau) * np.cos(self.omega * (t[:, None] - tau))
        return (vals * w[None, :]).sum(axis=1) * t

    def residual(self, t) -> np.ndarray:
        """f(t) + omega^2 int_0^t (t - s) f(s) ds - g(t) by nested quadrature."""
        t = np.atleast_1d(np.asarray(t, float))
        n = self.degree + int(abs(self.omega) * self.T / 2) + 24
        x, w = gauss_legendre(0.0, 1.0, n)
        out = np.empty_like(t)
        for i, ti in enumerate(t):
            s = ti * x
            inner = np.sum(w * (ti - s) * self(s)) * ti
            out[i] = self(np.array([ti]))[0] + self.omega**2 * inner - self.g(ti)
        return out


def oscillator_solve(g, omega: float, t_max: float, tol: float = 1e-6, max_degree: int = 1024) -> OscillatorSolution:
    """Solve the twice-integrated forced oscillator f + omega^2 iint f = g.

    Args:
        g: Callable forcing with g(0) = 0, or a pair (times, values) of
            samples on [0, t_max] (fitted by least squares in Chebyshev form).
        omega: Frequency (omega = 0 gives f = g).
        t_max: Right end of the interval of interest.
        tol: Refinement threshold; degree doubles until f changes by < tol.

    Raises:
        PreconditionError: g(0) != 0.
        SharpQMError: refinement did not settle below max_degree.
    """
    if not t_max > 0:
        raise PreconditionError("t_max must be positive")
    if callable(g):
        if abs(float(g(np.array(0.0)))) > 1e-12:
            raise PreconditionError("forcing must vanish at t = 0")

        def fit(deg):
            nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
            return C.chebfit(nodes, np.asarray(g(0.5 * t_max * (nodes + 1.0)), float), deg)

    else:
        ts, vs = (np.asarray(a, float) for a in g)
        if abs(vs[np.argmin(np.abs(ts))]) > 1e-12 or ts.min() > 1e-12:
            raise PreconditionError("forcing must vanish at t = 0")

        def fit(deg):
            deg = min(deg, len(ts) - 1)
            return C.chebfit(2.0 * ts / t_max - 1.0, vs, deg)

    probe = np.linspace(0.0, t_max, 65)
    deg = 16
    prev = OscillatorSolution(omega, t_max, fit(deg), deg)
    prev_vals = prev(probe)
    while True:
        deg *= 2
        cur = OscillatorSolution(omega, t_max, fit(deg), deg)
        cur_vals = cur(probe)
        if np.max(np.abs(cur_vals - prev_vals)) < tol:
            return cur
        if deg >= max_degree:
            raise SharpQMError("oscillator forcing not resolved by Chebyshev refinement")
        prev, prev_vals = cur, cur_vals


# --------------------------------------------------------------------------
# Fourier-space fields


@dataclass(frozen=True)
class SourceContext:
    """Characteristic of the emitting generic electron.

    Attributes:
        trajectory: Path covering [0, t] for every query.
        a: Ball radius of the source (0 for the point limit).
        c: Speed of light (defaults to 1/alpha).
        charge: Source charge magnitude e.
    """

    trajectory: Trajectory
    a: float = 0.0
    c: float = C_LIGHT
    charge: float = E_CHARGE

    def check_coverage(self, t: float):
        if not self.trajectory.covers(0.0, t):
            raise PreconditionError(f"trajectory does not cover [0, {t}]")


@dataclass(frozen=True)
class FourierRadiationSample:
    """Fourier fields at (t, k) with their transversality residuals."""

    t: float
    k: np.ndarray
    E: np.ndarray
    B: np.ndarray
    A: np.ndarray

    def _rel(self, F):
        kn = np.linalg.norm(self.k, axis=-1)
        num = np.abs(np.sum(self.k * F, axis=-1))
        den = kn * np.linalg.norm(F, axis=-1)
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    @property
    def div_E(self):
        return self._rel(self.E)

    @property
    def div_B(self):
        return self._rel(self.B)

    @property
    def div_A(self):
        return self._rel(self.A)


def perp(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Projection of v perpendicular to k (k and v broadcast)."""
    kk = np.sum(k * k, axis=-1, keepdims=True)
    kv = np.sum(k * v, axis=-1, keepdims=True)
    return v - np.where(kk > 0, kv / np.where(kk > 0, kk, 1.0), 0.0) * k


def _tau_rule(ctx: SourceContext, t: float, kmax: float, per_period: int = 12, n: int = 16):
    vmax = float(np.max(np.linalg.norm(ctx.trajectory.velocity(np.linspace(0, t, 64)), axis=-1)))
    rate = kmax * (ctx.c + vmax)
    panels = max(4, int(math.ceil(rate * t / (2 * math.pi) * per_period / n)))
    return gl_panels(np.linspace(0.0, t, panels + 1), n)


def fourier_fields(ctx: SourceContext, t: float, k, tau_rule=None) -> FourierRadiationSample:
    """Sourced radiation fields E_hat, B_hat, A_hat at time t for wave vectors k.

    Args:
        ctx: Source context.
        t: Time (>= 0).
        k: Wave vectors of shape (..., 3), nonzero.
        tau_rule: Optional (nodes, weights) on [0, t]; by default Gauss panels
            resolving the fastest phase kc + k.V.
    """
    ctx.check_coverage(t)
    k = np.asarray(k, float)
    shape = k.shape
    kf = k.reshape(-1, 3)
    kn = np.linalg.norm(kf, axis=-1)
    if np.any(kn == 0):
        raise DomainError("k = 0 is excluded")
    if t == 0:
        z = np.zeros(shape, complex)
        return FourierRadiationSample(t, k, z, z.copy(), z.copy())
    tau, w = tau_rule if tau_rule is not None else _tau_rule(ctx, t, float(kn.max()))
    Q = ctx.trajectory.position(tau)
    V = ctx.trajectory.velocity(tau)
    khat = kf / kn[:, None]
    ff = form_factor(ctx.a, kn)
    E = np.zeros((len(kf), 3), complex)
    S = np.zeros((len(kf), 3), complex)
    block = max(1, 2_000_000 // max(1, len(tau)))
    for b0 in range(0, len(kf), block):
        sl = slice(b0, b0 + block)
        kb = kf[sl]
        phase = np.exp(-1j * (kb @ Q.T))  # (nk, ntau)
        arg = ctx.c * kn[sl, None] * (t - tau[None, :])
        Vp = V[None, :, :] - (khat[sl] @ V.T)[:, :, None] * khat[sl, None, :]
        wc = (w[None, :] * np.cos(arg) * phase)[:, :, None]
        ws = (w[None, :] * np.sin(arg) * phase)[:, :, None]
        E[sl] = np.sum(wc * Vp, axis=1)
        S[sl] = np.sum(ws * Vp, axis=1)
    pref = 4 * math.pi * ctx.charge * ff[:, None]
    E *= pref
    S *= pref
    # re-project to remove rounding in the transverse direction
    E = perp(kf, E)
    S = perp(kf, S)
    B = -1j * np.cross(khat, S)
    A = -S / kn[:, None]
    return FourierRadiationSample(t, k, E.reshape(shape), B.reshape(shape), A.reshape(shape))


@dataclass(frozen=True)
class KGrid:
    """Spherical product grid in k space.

    Radial Gauss-Legendre nodes on [0, k_max] and a Gauss-Legendre(cos) x
    uniform-azimuth rule on the sphere.
    """

    radial: int = 64
    angular_order: int = 24
    k_max: float = 40.0

    def __post_init__(self):
        if not self.k_max > 0 or self.radial < 1 or self.angular_order < 1:
            raise DomainError("invalid KGrid parameters")

    def nodes(self):
        """(k vectors (M, 3), weights (M,)) including the k^2 Jacobian."""
        kr, wr = gauss_legendre(0.0, self.k_max, self.radial)
        n_theta = self.angular_order // 2 + 1
        dirs, wa = sphere_product_rule(n_theta, self.angular_order + 1)
        k = kr[:, None, None] * dirs[None, :, :]
        w = (wr * kr**2)[:, None] * wa[None, :]
        return k.reshape(-1, 3), w.reshape(-1)

    def doubled(self) -> "KGrid":
        return KGrid(2 * self.radial, 2 * self.angular_order, self.k_max)


# --------------------------------------------------------------------------
# position space


def radial_kernel(R: float, ct: float, match_tol: float = 1e-9) -> float:
    """Piecewise radial kernel: -ct/R for R > ct, -pi/4 at R = ct, 0 for R < ct."""
    if not R > 0:
        raise DomainError("R must be positive")
    if ct < 0:
        raise DomainError("ct must be non-negative")
    if abs(R - ct) <= match_tol * max(1.0, R):
        return -math.pi / 4
    if R > ct:
        return -ct / R
    return 0.0


def radial_kernel_regularized(R: float, ct: float, eta: float, kmax_factor: float = 60.0) -> float:
    """(2/pi) int_0^inf (cos(kR) - sin(kR)/(kR)) sin(k ct)/k e^{-eta k} dk by quadrature.

    As eta -> 0 this tends to -ct/R for R > ct and 0 for R < ct; at R = ct
    the Abel limit is -1/2.
    """
    kmax = kmax_factor / eta
    scale = max(R, ct, 1e-3)
    n_osc = kmax * scale / math.pi
    panels = int(max(64, 4 * n_osc))
    k, w = gl_panels(np.linspace(0.0, kmax, panels + 1), 16)
    x = k * R
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc_term = np.where(x > 1e-4, np.sin(x) / np.where(x > 0, x, 1.0), 1.0 - x * x / 6.0)
        sk = np.where(k > 0, np.sin(k * ct) / np.where(k > 0, k, 1.0), ct)
    vals = (np.cos(x) - sinc_term) * sk * np.exp(-eta * k)
    return float(2.0 / math.pi * np.sum(w * vals))


def _frozen_position(ctx: SourceContext, tau):
    tau = np.asarray(tau, float)
    return ctx.trajectory.position(np.maximum(tau, 0.0))


def _frozen_velocity(ctx: SourceContext, tau):
    tau = np.asarray(tau, float)
    v = ctx.trajectory.velocity(np.maximum(tau, 0.0))
    return np.where((tau >= 0)[..., None], v, 0.0)


@dataclass(frozen=True)
class RetardedTime:
    t_ret: float
    clamped: bool
    residual: float


def retarded_time(ctx: SourceContext, t: float, s, tol: float = 1e-10, check_speed: bool = True) -> RetardedTime:
    """Solve c (t - t_r) = |s - Q(t_r)| by bracketed bisection.

    For t_r < 0 the source is frozen at Q(0) and t_r = t - |s - Q(0)|/c is
    returned with ``clamped`` set.

    Raises:
        InvariantError: superluminal segment on [0, t].
        SharpQMError: root not bracketed (s on the trajectory).
    """
    ctx.check_coverage(t)
    s = np.asarray(s, float).reshape(3)
    c = ctx.c
    if check_speed:
        probe = np.linspace(0.0, t, 129)
        if np.any(np.linalg.norm(ctx.trajectory.velocity(probe), axis=-1) >= c):
            raise InvariantError("trajectory moves at or above c")

    def g(tau):
        return c * (t - tau) - float(np.linalg.norm(s - _frozen_position(ctx, tau)))

    if g(t) >= 0:
        raise SharpQMError("observation point lies on the trajectory; retarded time undefined")
    g0 = g(0.0)
    if g0 <= 0:
        tr = t - float(np.linalg.norm(s - _frozen_position(ctx, 0.0))) / c
        return RetardedTime(tr, True, abs(g(tr)))
    lo, hi = 0.0, t
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    tr = 0.5 * (lo + hi)
    return RetardedTime(tr, False, abs(g(tr)))


def _split(V, n):
    par = np.sum(V * n, axis=-1, keepdims=True) * n
    return V - par, par


def apot_position(ctx: SourceContext, t: float, s, n_per_panel: int = 24, panels: int = 16) -> np.ndarray:
    """Position-space radiation vector potential of a point source at s.

    Sum of the retarded term (with the Doppler Jacobian of the collapsed
    delta) and the outside-light-cone integral over tau in (max(t_r, 0), t).
    """
    ctx.check_coverage(t)
    s = np.asarray(s, float).reshape(3)
    e, c = ctx.charge, ctx.c
    rt = retarded_time(ctx, t, s)
    out = np.zeros(3)
    if not rt.clamped:
        Q = _frozen_position(ctx, rt.t_ret)
        V = _frozen_velocity(ctx, rt.t_ret)
        d = Q - s
        R = float(np.linalg.norm(d))
        n = d / R
        Vp, _ = _split(V, n)
        out += -e * Vp / (R * (c + float(np.dot(n, V))))
    lo = max(rt.t_ret, 0.0)
    if t > lo:
        tau, w = gl_panels(np.linspace(lo, t, panels + 1), n_per_panel)
        Q = _frozen_position(ctx, tau)
        V = _frozen_velocity(ctx, tau)
        d = Q - s
        R = np.linalg.norm(d, axis=-1)
        n = d / R[:, None]
        Vp, Vl = _split(V, n)
        integrand = (Vp - 2 * Vl) * (c * (t - tau) / R**3)[:, None]
        out += e * np.sum(w[:, None] * integrand, axis=0)
    return out


def apot_ball_average(ctx: SourceContext, t: float, center=None, a: float | None = None) -> np.ndarray:
    """Ball average of apot_position over radius a about ``center`` (default Q(t))."""
    a = ctx.a if a is None else a
    if not a > 0:
        raise DomainError("ball average needs a > 0")
    center = ctx.trajectory.position(t) if center is None else np.asarray(center, float)
    off, w = ball_rule()
    vals = np.array([apot_position(ctx, t, center + a * o) for o in off])
    return w @ vals


def efield_position(ctx: SourceContext, t: float, s, h: float = 1e-4) -> np.ndarray:
    """Radiation electric field -(1/c) dA/dt along the characteristic (4th-order FD)."""
    f = lambda tt: apot_position(ctx, tt, s)  # noqa: E731
    d = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)
    return -d / ctx.c


def bfield_position(ctx: SourceContext, t: float, s, h: float = 1e-3) -> np.ndarray:
    """Radiation magnetic field curl_s A (4th-order FD)."""
    s = np.asarray(s, float)
    J = np.zeros((3, 3))
    for j, e in enumerate(np.eye(3)):
        fp2 = apot_position(ctx, t, s + 2 * h * e)
        fp1 = apot_position(ctx, t, s + h * e)
        fm1 = apot_position(ctx, t, s - h * e)
        fm2 = apot_position(ctx, t, s - 2 * h * e)
        J[:, j] = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


# --------------------------------------------------------------------------
# Born-approximation characteristic


def born_trajectory(q, t_anchor: float, tau, pulse: GaussianPulse, epsilon: float = 1.0) -> np.ndarray:
    """Final-value characteristic of the incoming pulse's velocity field.

    Q(tau) = q - x_hat * epsilon * (A0/c^2) * int_{c tau - z + z0}^{c t - z + z0}
    exp(-xi^2/2 sigma^2) cos(omega xi / c) dxi, with z = q_z fixed.
    """
    q = np.asarray(q, float).reshape(3)
    tau = np.asarray(tau, float)
    z = q[2]
    c = pulse.c
    xi_hi = c * t_anchor - z + pulse.z0
    xi_lo = c * tau - z + pulse.z0
    integral = pulse.profile_integral(xi_lo, xi_hi)
    shift = epsilon * (pulse.amplitude / c) / c * integral
    out = np.broadcast_to(q, tau.shape + (3,)).copy()
    out[..., 0] -= shift
    return out


def born_velocity(q, tau, pulse: GaussianPulse, epsilon: float = 1.0) -> np.ndarray:
    """dQ/dtau = epsilon (A0/c) profile(tau, q_z) x_hat."""
    q = np.asarray(q, float).reshape(3)
    tau = np.asarray(tau, float)
    out = np.zeros(tau.shape + (3,))
    out[..., 0] = epsilon * (pulse.amplitude / pulse.c) * pulse.profile(tau, q[2])
    return out


def born_context(q, t_anchor: float, pulse: GaussianPulse, epsilon: float = 1.0, a: float = 0.0) -> SourceContext:
    """SourceContext of the Born characteristic through (t_anchor, q)."""
    traj = Trajectory.from_functions(
        lambda tau: born_trajectory(q, t_anchor, tau, pulse, epsilon),
        lambda tau: born_velocity(q, tau, pulse, epsilon),
        0.0,
        t_anchor,
    )
    return SourceContext(traj, a, pulse.c)


def kernel_table(R_values, ct_values, eta: float | None = None) -> list[dict]:
    """Rows (R, ct, kernel[, regularized]) for the radiate subcommand."""
    rows = []
    for R in R_values:
        for ct in ct_values:
            row = {"R": float(R), "ct": float(ct), "kernel": radial_kernel(float(R), float(ct))}
            if eta is not None:
                row["regularized"] = radial_kernel_regularized(float(R), float(ct), eta)
            rows.append(row)
    return rows
