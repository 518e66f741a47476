import math

import numpy as np
import pytest
from scipy.integrate import quad

from sharpqm.bohm import Trajectory
from sharpqm.errors import DomainError, InvariantError, PreconditionError
from sharpqm.pulse import GaussianPulse
from sharpqm.quadrature import gauss_legendre, gl_panels
from sharpqm.radiation import (
    SourceContext,
    apot_ball_average,
    apot_position,
    born_context,
    born_trajectory,
    born_velocity,
    delta_hat,
    form_factor,
    fourier_fields,
    kernel_table,
    oscillator_solve,
    radial_kernel,
    radial_kernel_regularized,
    retarded_time,
)


def _wiggle(amp=0.3, t1=5.0):
    return Trajectory.from_functions(
        lambda t: np.stack([amp * np.sin(t), 0 * t, 0 * t], -1),
        lambda t: np.stack([amp * np.cos(t), 0 * t, 0 * t], -1),
        0.0,
        t1,
    )


# --------------------------------------------------------------------------
# form factor


def test_form_factor_against_radial_transform():
    a = 0.4
    for k in (1e-3, 0.02, 1.0, 7.5):
        ref = quad(lambda r: r * math.sin(k * r) / k, 0, a)[0] * 4 * math.pi / (4 / 3 * math.pi * a**3)
        assert form_factor(a, k) == pytest.approx((2 * math.pi) ** -1.5 * ref, rel=1e-10)


def test_delta_hat_phase():
    k = np.array([[0.3, -0.2, 1.0]])
    q = np.array([0.5, 0.1, -0.7])
    val = delta_hat(0.2, k, q)
    assert abs(val[0]) == pytest.approx(form_factor(0.2, np.linalg.norm(k)), rel=1e-12)
    assert np.angle(val[0]) == pytest.approx(-float(k[0] @ q), abs=1e-12)


# --------------------------------------------------------------------------
# oscillator


@pytest.mark.parametrize("omega", [0.0, 0.375, 5.0])
def test_oscillator_closed_form(omega):
    sol = oscillator_solve(lambda t: np.asarray(t, float), omega, 8.0)
    t = np.linspace(0.1, 8.0, 9)
    exact = t if omega == 0 else np.sin(omega * t) / omega
    assert np.allclose(sol(t), exact, atol=1e-10)
    assert np.max(np.abs(sol.residual(t))) < 1e-10


def test_oscillator_random_forcings():
    rng = np.random.default_rng(70)
    for _ in range(4):
        a, b = rng.normal(size=3), rng.uniform(0.2, 2, size=3)
        g = lambda t, a=a, b=b: np.sum(a[:, None] * np.sin(np.outer(b, np.atleast_1d(t))), 0).reshape(np.shape(t))  # noqa: E731
        for w in (0.0, 0.375, 5.0):
            sol = oscillator_solve(g, w, 10.0)
            assert np.max(np.abs(sol.residual(np.linspace(0, 10, 21)))) < 1e-6


def test_oscillator_sampled_and_precondition():
    ts = np.linspace(0, 6, 400)
    sol = oscillator_solve((ts, np.sin(ts)), 1.0, 6.0)
    # f = int cos(tau) cos(t - tau) = (t cos t + sin t)/2
    t = np.array([1.0, 3.0, 5.0])
    assert np.allclose(sol(t), (t * np.cos(t) + np.sin(t)) / 2, atol=1e-6)
    with pytest.raises(PreconditionError):
        oscillator_solve(lambda t: np.cos(t), 1.0, 2.0)


# --------------------------------------------------------------------------
# Fourier fields


def test_fourier_fields_transverse_and_consistent():
    ctx = SourceContext(_wiggle(), 0.1, 137.036)
    k = np.random.default_rng(8).normal(size=(100, 3)) * 2
    smp = fourier_fields(ctx, 3.0, k)
    assert max(smp.div_E.max(), smp.div_B.max(), smp.div_A.max()) < 1e-8
    # B = i k x A and dA/dt = -c E
    assert np.allclose(smp.B, 1j * np.cross(k, smp.A), rtol=1e-9, atol=1e-14)
    slow = SourceContext(_wiggle(), 0.1, 1.0)
    h = 1e-4
    dA = (fourier_fields(slow, 3.0 + h, k).A - fourier_fields(slow, 3.0 - h, k).A) / (2 * h)
    assert np.allclose(dA, -slow.c * fourier_fields(slow, 3.0, k).E, rtol=1e-6, atol=1e-9)


def test_fourier_fields_source_at_rest_vanish():
    ctx = SourceContext(Trajectory.static([0.2, 0.0, 0.0], 0.0, 4.0), 0.0, 137.036)
    smp = fourier_fields(ctx, 2.0, np.array([[1.0, 0.0, 0.5]]))
    assert np.allclose(smp.E, 0) and np.allclose(smp.A, 0)


def test_coverage_precondition():
    ctx = SourceContext(_wiggle(t1=2.0), 0.0, 1.0)
    with pytest.raises(PreconditionError):
        apot_position(ctx, 3.0, [1.0, 0.0, 0.0])


# --------------------------------------------------------------------------
# kernels


def test_radial_kernel_piecewise():
    assert radial_kernel(2.0, 1.0) == -0.5
    assert radial_kernel(1.0, 1.0) == -math.pi / 4
    assert radial_kernel(1.0, 2.0) == 0.0
    with pytest.raises(DomainError):
        radial_kernel(0.0, 1.0)


def test_regularized_kernel_off_the_light_cone():
    for R, ct, want in ((2.0, 1.0, -0.5), (3.0, 0.5, -1 / 6), (1.0, 2.0, 0.0)):
        assert radial_kernel_regularized(R, ct, 1e-3) == pytest.approx(want, abs=1e-3)


def test_regularized_kernel_on_the_light_cone_tends_to_half():
    # the Abel limit at R = ct is -1/2, not the -pi/4 of the piecewise kernel
    vals = [radial_kernel_regularized(1.0, 1.0, eta) for eta in (1e-2, 1e-3)]
    assert abs(vals[1] + 0.5) < abs(vals[0] + 0.5) < 0.03


def test_kernel_table_rows():
    rows = kernel_table([1.0, 2.0], [1.0], eta=None)
    assert [r["kernel"] for r in rows] == [-math.pi / 4, -0.5]


# --------------------------------------------------------------------------
# retarded time and position space


def test_retarded_time_static_source():
    ctx = SourceContext(Trajectory.static([0.0, 0.0, 0.0], 0.0, 10.0), 0.0, 2.0)
    rt = retarded_time(ctx, 5.0, [4.0, 0.0, 0.0])
    assert not rt.clamped and rt.t_ret == pytest.approx(3.0, abs=1e-9)
    assert retarded_time(ctx, 1.0, [4.0, 0.0, 0.0]).clamped


def test_superluminal_source_rejected():
    fast = Trajectory.from_functions(lambda t: np.stack([3 * t, 0 * t, 0 * t], -1), lambda t: np.stack([3 + 0 * t, 0 * t, 0 * t], -1), 0, 5)
    with pytest.raises(InvariantError):
        retarded_time(SourceContext(fast, 0.0, 1.0), 3.0, [0.0, 5.0, 0.0])


def _ift_oracle(ctx, t, s, K=30.0, nk=320, nth=96, nph=6):
    """A(t, s) by direct inverse Fourier transform of the k-space solution.

    k is resolved in spherical coordinates about the axis s - Q(tau) for each
    retarded-integral node tau, so the plane-wave phase is a function of the
    polar angle only.
    """
    traj, a = ctx.trajectory, ctx.a
    tau, wt = gl_panels(np.linspace(0, t, 16), 12)
    kr, wk = gl_panels(np.linspace(0, K, nk // 16 + 1), 16)
    ct, wc = gauss_legendre(-1, 1, nth)
    ph = (np.arange(nph) + 0.5) * 2 * np.pi / nph
    ff = form_factor(a, kr)
    out = np.zeros(3)
    for T, W in zip(tau, wt):
        Q, V = traj.position(T), traj.velocity(T)
        d = s - Q
        D = np.linalg.norm(d)
        ez = d / D
        ex = np.cross(ez, [0.3, 0.7, 0.1])
        ex /= np.linalg.norm(ex)
        ey = np.cross(ez, ex)
        st = np.sqrt(1 - ct**2)
        dirs = st[:, None, None] * (np.cos(ph)[None, :, None] * ex + np.sin(ph)[None, :, None] * ey) + ct[:, None, None] * ez
        Vp = V - (dirs @ V)[..., None] * dirs
        ang = np.exp(1j * np.outer(kr * D, ct))
        radial = ff * np.sin(kr * ctx.c * (t - T)) * kr * wk
        out += W * np.real(np.einsum("k,kt,t,tpj->j", radial, ang, wc, Vp) * 2 * np.pi / nph)
    return -4 * math.pi * ctx.charge * (2 * math.pi) ** -1.5 * out


def test_position_space_potential_matches_fourier_oracle():
    ctx = SourceContext(_wiggle(), 0.4, 1.0)
    s = np.array([0.0, 2.0, 0.0])
    oracle = _ift_oracle(ctx, 3.0, s)
    got = apot_ball_average(ctx, 3.0, center=s)
    assert np.linalg.norm(got - oracle) / np.linalg.norm(oracle) < 2e-2


def test_ball_average_requires_radius():
    with pytest.raises(DomainError):
        apot_ball_average(SourceContext(_wiggle(), 0.0, 1.0), 1.0)


# --------------------------------------------------------------------------
# Born characteristic


def test_born_characteristic():
    p = GaussianPulse.desk_scale(coupling=1e-2)
    q = np.array([0.3, 0.1, 0.2])
    t = p.flight_time()
    assert np.allclose(born_trajectory(q, t, np.array(t), p), q)
    tau = np.array([t - 30.0])
    h = 1e-3
    fd = (born_trajectory(q, t, tau + h, p) - born_trajectory(q, t, tau - h, p)) / (2 * h)
    assert np.allclose(fd, born_velocity(q, tau, p), rtol=1e-6, atol=1e-12)
    ctx = born_context(q, t, p, a=0.05)
    assert ctx.trajectory.covers(0.0, t)
