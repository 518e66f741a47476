"""Guiding velocity fields, characteristics, and transport along characteristics.

Characteristics solve dQ/dtau = v(tau, Q) either forward from an initial
value or backward from a final value Q(t) = q.  The backward case is done by
time reversal so one integrator serves both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import chi2 as chi2_dist

from .errors import NodeProximityError, PreconditionError, SharpQMError, StepLimitError
from .hydrogen import BoundSuperposition, as_points
from .ode import integrate_batch
from .quadrature import gauss_legendre

EPS_NODE = 1e-12
RTOL = 1e-9
ATOL = 1e-9
MAX_STEPS = 1_000_000


@dataclass(frozen=True)
class VelocityField:
    """Velocity evaluator v(t, q) with q of shape (..., 3).

    Attributes:
        fn: The evaluator; must be pure.
        tag: Provenance label ("wavefunction", "pulse", "synthetic").
        eps_node: Density floor used by wavefunction-derived fields.
        density: Optional rho(t, q) evaluator, reported along trajectories.
    """

    fn: Callable
    tag: str = "synthetic"
    eps_node: float = EPS_NODE
    density: Callable | None = None
    masked_fn: Callable | None = None

    def __call__(self, t: float, q) -> np.ndarray:
        return self.fn(t, as_points(q))

    def masked(self, t, q):
        """(v, ok) where ok flags points at which the field is valid.

        ``t`` may be an array matching q[..., 0].
        """
        if self.masked_fn is not None:
            return self.masked_fn(t, q)
        t = np.asarray(t, float)
        if t.ndim == 0:
            return self.fn(float(t), q), np.ones(q.shape[:-1], bool)
        v = np.stack([self.fn(float(ti), qi[None, :])[0] for ti, qi in zip(t, q)])
        return v, np.ones(q.shape[:-1], bool)

    @classmethod
    def constant(cls, v0) -> "VelocityField":
        v0 = np.asarray(v0, float)
        return cls(lambda t, q: np.broadcast_to(v0, q.shape).copy(), "synthetic")

    @classmethod
    def zero(cls) -> "VelocityField":
        return cls(lambda t, q: np.zeros(q.shape), "synthetic")

    @classmethod
    def rotation(cls, omega: float) -> "VelocityField":
        """Rigid rotation v = omega z_hat x q."""

        def fn(t, q):
            out = np.zeros(q.shape)
            out[..., 0] = -omega * q[..., 1]
            out[..., 1] = omega * q[..., 0]
            return out

        return cls(fn, "synthetic")


def wavefunction_velocity(state: BoundSuperposition, momentum_offset: Callable | None = None, t: float = 0.0, q=None, eps_node: float = EPS_NODE) -> np.ndarray:
    """Guiding velocity Im(Psi^* grad Psi)/|Psi|^2 - P(t, q).

    Raises:
        NodeProximityError: if |Psi|^2 < eps_node at any requested point.
    """
    pts = as_points(q)
    val, grad = state.value_and_gradient(t, pts)
    rho = np.abs(val) ** 2
    if np.any(rho < eps_node):
        raise NodeProximityError(f"density {float(np.min(rho)):.3e} below node floor {eps_node:.1e}")
    v = np.imag(np.conj(val)[..., None] * grad) / rho[..., None]
    if momentum_offset is not None:
        v = v - np.asarray(momentum_offset(t, pts))
    return v


def wavefunction_field(state: BoundSuperposition, momentum_offset: Callable | None = None, eps_node: float = EPS_NODE) -> VelocityField:
    """VelocityField wrapper of :func:`wavefunction_velocity`."""

    def fn(t, q):
        return wavefunction_velocity(state, momentum_offset, t, q, eps_node)

    def dens(t, q):
        return np.abs(state.value(t, q)) ** 2

    def masked(t, q):
        val, grad = state.value_and_gradient(t, q)
        rho = np.abs(val) ** 2
        ok = rho >= eps_node
        v = np.imag(np.conj(val)[..., None] * grad) / np.where(ok, rho, 1.0)[..., None]
        if momentum_offset is not None:
            v = v - np.asarray(momentum_offset(t, q))
        return np.where(ok[..., None], v, 0.0), ok

    return VelocityField(fn, "wavefunction", eps_node, dens, masked)


@dataclass(frozen=True)
class Trajectory:
    """Sampled characteristic tau -> Q(tau) with a final- or initial-value anchor.

    Attributes:
        times: Strictly increasing sample times.
        positions: Positions at ``times``, shape (M, 3).
        anchor: (t_anchor, q_anchor).
        direction: "forward" (initial value) or "backward" (final value).
        step_errors: Per-segment local error proxy (step size times tolerance).
        interpolant: Callable tau -> position (dense output).
        velocity_fn: Callable tau -> dQ/dtau along the path.
    """

    times: np.ndarray
    positions: np.ndarray
    anchor: tuple
    direction: str
    step_errors: np.ndarray = field(default_factory=lambda: np.empty(0))
    interpolant: Callable | None = None
    velocity_fn: Callable | None = None

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def covers(self, t0: float, t1: float, slack: float = 1e-12) -> bool:
        return self.t_min <= t0 + slack and self.t_max >= t1 - slack

    def position(self, tau) -> np.ndarray:
        tau = np.asarray(tau, float)
        if self.interpolant is not None:
            return self.interpolant(tau)
        return np.stack([np.interp(tau, self.times, self.positions[:, i]) for i in range(3)], axis=-1)

    def velocity(self, tau) -> np.ndarray:
        tau = np.asarray(tau, float)
        if self.velocity_fn is not None:
            return self.velocity_fn(tau)
        h = 1e-6 * max(1.0, self.t_max - self.t_min)
        lo = np.clip(tau - h, self.t_min, self.t_max)
        hi = np.clip(tau + h, self.t_min, self.t_max)
        return (self.position(hi) - self.position(lo)) / (hi - lo)[..., None]

    @classmethod
    def from_functions(cls, pos: Callable, vel: Callable, t0: float, t1: float, samples: int = 201) -> "Trajectory":
        """Closed-form trajectory on [t0, t1] (used for synthetic sources)."""
        times = np.linspace(t0, t1, samples)
        return cls(times, np.asarray(pos(times)), (t1, np.asarray(pos(np.array(t1)))), "forward", np.zeros(samples - 1), pos, vel)

    @classmethod
    def static(cls, q, t0: float, t1: float) -> "Trajectory":
        q = np.asarray(q, float)
        return cls.from_functions(
            lambda tau: np.broadcast_to(q, np.shape(tau) + (3,)).copy(),
            lambda tau: np.zeros(np.shape(tau) + (3,)),
            t0,
            t1,
        )


class _Counter:
    def __init__(self, limit):
        self.n = 0
        self.limit = limit


def _integrate(rhs, t0, t1, y0, rtol, atol, max_steps, method="DOP853"):
    """solve_ivp with a step budget (counted via RHS evaluations)."""
    counter = _Counter(12 * max_steps + 64)

    def wrapped(t, y):
        counter.n += 1
        if counter.n > counter.limit:
            raise StepLimitError("step limit exceeded")
        return rhs(t, y)

    return solve_ivp(wrapped, (t0, t1), y0, method=method, rtol=rtol, atol=atol, dense_output=True)


def integrate_trajectory(
    field: VelocityField,
    anchor: tuple,
    t_span: tuple,
    direction: str = "backward",
    rtol: float = RTOL,
    atol: float = ATOL,
    max_steps: int = MAX_STEPS,
) -> Trajectory:
    """Characteristic through (t_anchor, q_anchor) over t_span.

    Args:
        field: Velocity field.
        anchor: (t_anchor, q_anchor).
        t_span: (t_start, t_end) covered by the result, t_start <= t_end.
        direction: "backward" integrates a final-value problem with
            Q(t_anchor) = q_anchor, t_anchor = t_span[1]; "forward" an
            initial-value problem with t_anchor = t_span[0].

    Raises:
        NodeProximityError: propagated from the field.
        StepLimitError: step budget exhausted; ``partial`` holds the path so far.
    """
    t_anchor, q_anchor = float(anchor[0]), np.asarray(anchor[1], float).reshape(3)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise PreconditionError("t_span must be ordered")
    if direction == "backward":
        if not math.isclose(t_anchor, t1, abs_tol=1e-14):
            raise PreconditionError("final-value anchor must sit at t_span[1]")
        length = t1 - t0

        def rhs(s, y):
            return -field(t_anchor - s, y[None, :])[0]

    elif direction == "forward":
        if not math.isclose(t_anchor, t0, abs_tol=1e-14):
            raise PreconditionError("initial-value anchor must sit at t_span[0]")
        length = t1 - t0

        def rhs(s, y):
            return field(t_anchor + s, y[None, :])[0]

    else:
        raise PreconditionError(f"unknown direction {direction!r}")

    if length == 0.0:
        times = np.array([t_anchor])
        return Trajectory(times, q_anchor[None, :], (t_anchor, q_anchor), direction, np.empty(0),
                          lambda tau: np.broadcast_to(q_anchor, np.shape(tau) + (3,)).copy(),
                          lambda tau: field(np.asarray(tau, float), np.broadcast_to(q_anchor, np.shape(tau) + (3,))))
    try:
        sol = _integrate(rhs, 0.0, length, q_anchor, rtol, atol, max_steps)
    except StepLimitError as exc:
        raise StepLimitError(str(exc), partial=None) from None
    if not sol.success:
        raise SharpQMError(f"integration failed: {sol.message}")
    s = sol.t
    Y = sol.y.T.copy()
    Y[0] = q_anchor
    dense = sol.sol
    if direction == "backward":
        times = t_anchor - s[::-1]
        pos = Y[::-1]

        def interp(tau, _d=dense):
            tau = np.asarray(tau, float)
            return np.moveaxis(_d(t_anchor - tau), 0, -1)

    else:
        times = t_anchor + s
        pos = Y

        def interp(tau, _d=dense):
            tau = np.asarray(tau, float)
            return np.moveaxis(_d(tau - t_anchor), 0, -1)

    def vel(tau):
        tau = np.asarray(tau, float)
        p = interp(tau)
        if tau.ndim == 0:
            return field(float(tau), p[None, :])[0]
        return np.stack([field(float(ti), pi[None, :])[0] for ti, pi in zip(tau.ravel(), p.reshape(-1, 3))]).reshape(tau.shape + (3,))

    steps = np.diff(times)
    return Trajectory(times, pos, (t_anchor, q_anchor), direction, np.abs(steps) * rtol, interp, vel)


def solve_transport(field: VelocityField, source: Callable, anchor: tuple, rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """u(t, q) = int_0^t R(tau, Q_q(tau)) dtau along the final-value characteristic.

    The source integral is carried as an extra ODE component so the
    characteristic and the quadrature share one error control.
    """
    t, q = float(anchor[0]), np.asarray(anchor[1], float).reshape(3)
    if t == 0.0:
        return 0.0

    def rhs(s, y):
        tau = t - s
        Q = y[:3]
        v = field(tau, Q[None, :])[0]
        R = float(np.real(source(tau, Q)))
        return np.concatenate([-v, [R]])

    sol = _integrate(rhs, 0.0, t, np.concatenate([q, [0.0]]), rtol, atol, MAX_STEPS)
    if not sol.success:
        raise SharpQMError(f"transport integration failed: {sol.message}")
    return float(sol.y[3, -1])


# --------------------------------------------------------------------------
# equivariance test


def transport_batch(field: VelocityField, points: np.ndarray, t0: float, t1: float, rtol: float = RTOL, atol: float = ATOL, chunk: int = 20000):
    """Flow many points from t0 to t1 (either direction).

    Every point has its own adaptive step (batched Dormand-Prince 5(4)).
    Points whose path runs into the node floor are dropped.

    Returns:
        (final positions, mask of kept points).
    """
    points = np.asarray(points, float)
    out = np.full(points.shape, np.nan)
    keep = np.ones(len(points), bool)
    for start in range(0, len(points), chunk):
        sl = slice(start, min(start + chunk, len(points)))
        y, ok, _ = integrate_batch(field.masked, points[sl], t0, t1, rtol, atol, MAX_STEPS)
        out[sl] = y
        keep[sl] = ok
    out[~keep] = np.nan
    return out, keep


def sample_density(state: BoundSuperposition, t: float, count: int, rng: np.random.Generator, r_scale: float | None = None) -> np.ndarray:
    """Rejection sampling from |Psi(t)|^2 with a Gamma(3) radial proposal.

    Raises:
        SharpQMError: acceptance rate below 1e-4.
    """
    n_max = max(qn.n for qn in state.labels)
    lam = r_scale or float(n_max)

    def propose(m):
        r = rng.gamma(3.0, lam, size=m)
        u = rng.normal(size=(m, 3))
        u /= np.linalg.norm(u, axis=1)[:, None]
        return r[:, None] * u, r

    def ratio(pts, r):
        g = np.exp(-r / lam) / (8 * np.pi * lam**3)
        return np.abs(state.value(t, pts)) ** 2 / g

    probe, pr = propose(200_000)
    M = 1.5 * float(np.max(ratio(probe, pr)))
    out = []
    got = 0
    tried = 0
    while got < count:
        m = max(4 * (count - got), 10_000)
        pts, r = propose(m)
        acc = rng.random(m) * M < ratio(pts, r)
        tried += m
        sel = pts[acc]
        out.append(sel)
        got += len(sel)
        if tried > 1_000_000 and got / tried < 1e-4:
            raise SharpQMError("rejection sampling acceptance below 1e-4")
    return np.concatenate(out)[:count]


def _bin_edges(n_max: int):
    r_edges = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 9.0, 60.0]) * (n_max / 2.0 if n_max > 2 else 1.0)
    ct_edges = np.linspace(-1.0, 1.0, 7)
    ph_edges = np.linspace(0.0, 2 * np.pi, 5)
    return r_edges, ct_edges, ph_edges


def bin_probabilities(state: BoundSuperposition, t: float, edges, order: int = 8) -> np.ndarray:
    """Probability of |Psi(t)|^2 in each (r, cos theta, phi) bin by Gauss quadrature."""
    r_edges, ct_edges, ph_edges = edges
    P = np.zeros((len(r_edges) - 1, len(ct_edges) - 1, len(ph_edges) - 1))
    for i in range(len(r_edges) - 1):
        r, wr = gauss_legendre(r_edges[i], r_edges[i + 1], order * 2)
        for j in range(len(ct_edges) - 1):
            ct, wc = gauss_legendre(ct_edges[j], ct_edges[j + 1], order)
            for k in range(len(ph_edges) - 1):
                ph, wp = gauss_legendre(ph_edges[k], ph_edges[k + 1], order)
                R, C, PH = np.meshgrid(r, ct, ph, indexing="ij")
                S = np.sqrt(1 - C**2)
                pts = np.stack([R * S * np.cos(PH), R * S * np.sin(PH), R * C], axis=-1)
                W = (wr * r**2)[:, None, None] * wc[None, :, None] * wp[None, None, :]
                P[i, j, k] = np.sum(W * np.abs(state.value(t, pts)) ** 2)
    return P


def _histogram(points: np.ndarray, edges) -> np.ndarray:
    r = np.linalg.norm(points, axis=1)
    ct = np.clip(points[:, 2] / np.where(r > 0, r, 1.0), -1, 1)
    ph = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
    H, _ = np.histogramdd(np.stack([r, ct, ph], axis=1), bins=edges)
    return H


def pushforward_density(state: BoundSuperposition, field: VelocityField | None = None, t: float = 0.0, sample_count: int = 100_000, seed: int = 0, rtol: float = RTOL, atol: float = ATOL) -> dict:
    """Transport |Psi(0)|^2 samples to time t and chi-square test against |Psi(t)|^2.

    Bins with expected count below 5 are pooled into one bin.

    Returns:
        Report with chi2, dof, p_value, per-bin contributions and counts.
    """
    if field is None:
        field = wavefunction_field(state)
    rng = np.random.default_rng(seed)
    x0 = sample_density(state, 0.0, sample_count, rng)
    if t != 0.0:
        x1, keep = transport_batch(field, x0, 0.0, t, rtol, atol)
        x1 = x1[keep]
    else:
        x1, keep = x0, np.ones(len(x0), bool)
    n = len(x1)
    edges = _bin_edges(max(qn.n for qn in state.labels))
    P = bin_probabilities(state, t, edges).ravel()
    H = _histogram(x1, edges).ravel()
    outside = n - H.sum()
    expected = P * n
    expected_out = n * max(0.0, 1.0 - P.sum())
    small = expected < 5
    obs = np.concatenate([H[~small], [H[small].sum() + outside]])
    exp = np.concatenate([expected[~small], [expected[small].sum() + expected_out]])
    if exp[-1] < 5:
        obs = np.concatenate([obs[:-2], [obs[-2] + obs[-1]]])
        exp = np.concatenate([exp[:-2], [exp[-2] + exp[-1]]])
    contrib = (obs - exp) ** 2 / exp
    stat = float(contrib.sum())
    dof = len(obs) - 1
    return {
        "t": t,
        "samples": int(sample_count),
        "transported": int(n),
        "dropped_near_nodes": int(sample_count - n),
        "bins": int(len(obs)),
        "chi2": stat,
        "dof": int(dof),
        "p_value": float(chi2_dist.sf(stat, dof)),
        "per_bin_chi2": contrib.tolist(),
    }
