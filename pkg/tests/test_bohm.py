import math

import numpy as np
import pytest

from sharpqm.bohm import (
    Trajectory,
    VelocityField,
    integrate_trajectory,
    pushforward_density,
    solve_transport,
    transport_batch,
    wavefunction_field,
    wavefunction_velocity,
)
from sharpqm.errors import NodeProximityError, PreconditionError, StepLimitError
from sharpqm.hydrogen import BoundSuperposition
from sharpqm.ode import integrate_batch

LYMAN_PERIOD = 2 * math.pi / 0.375


def test_batched_dp5_against_exact():
    # y' = -k y with the rate carried as a second component, since only
    # active members reach the right-hand side; one fast member must not
    # force small steps on the others
    k = np.array([0.1, 1.0, 30.0])

    def rhs(t, y):
        return np.stack([-y[:, 1] * y[:, 0], 0 * y[:, 1]], axis=1), np.ones(len(y), bool)

    y, ok, steps = integrate_batch(rhs, np.stack([np.ones(3), k], axis=1), 0.0, 2.0, rtol=1e-10, atol=1e-12)
    assert ok.all()
    assert np.allclose(y[:, 0], np.exp(-2 * k), rtol=1e-8, atol=1e-11)
    assert steps[0] < steps[2]


def test_batched_dp5_backward_oscillator():
    def rhs(t, y):
        return np.stack([y[:, 1], -y[:, 0]], axis=1), np.ones(len(y), bool)

    y, ok, _ = integrate_batch(rhs, np.array([[1.0, 0.0], [0.0, 1.0]]), 0.0, -3.0, rtol=1e-11, atol=1e-12)
    assert np.allclose(y, [[math.cos(3), math.sin(3)], [-math.sin(3), math.cos(3)]], atol=1e-9)


def test_batched_step_limit():
    def rhs(t, y):
        return -1e4 * y, np.ones(len(y), bool)

    with pytest.raises(StepLimitError):
        integrate_batch(rhs, np.ones((1, 1)), 0.0, 10.0, max_steps=5)


def test_rotation_characteristic_is_circle():
    f = VelocityField.rotation(0.7)
    tr = integrate_trajectory(f, (2.0, np.array([1.0, 0.0, 0.3])), (0.0, 2.0), "backward")
    q0 = tr.position(0.0)
    ang = -0.7 * 2.0
    assert np.allclose(q0, [math.cos(ang), math.sin(ang), 0.3], atol=1e-8)
    assert np.allclose(np.linalg.norm(tr.positions[:, :2], axis=1), 1.0, atol=1e-8)


def test_constant_field_forward():
    tr = integrate_trajectory(VelocityField.constant([1.0, -2.0, 0.5]), (0.0, np.zeros(3)), (0.0, 4.0), "forward")
    assert np.allclose(tr.position(4.0), [4.0, -8.0, 2.0], atol=1e-10)
    with pytest.raises(PreconditionError):
        integrate_trajectory(VelocityField.zero(), (1.0, np.zeros(3)), (0.0, 2.0), "backward")


def test_stationary_real_state_does_not_move():
    st = BoundSuperposition.from_labels({"210+": 1.0})
    v = wavefunction_velocity(st, None, 1.3, np.array([[0.4, 0.2, 1.0]]))
    assert np.allclose(v, 0.0)


def test_circulating_state_velocity():
    # 211+ + i 211- carries angular momentum m = 1: v = (-y, x, 0)/(x^2+y^2)
    st = BoundSuperposition.from_labels({"211+": 1.0, "211-": 1j})
    q = np.array([[0.7, -0.4, 0.9]])
    v = wavefunction_velocity(st, None, 0.0, q)[0]
    rho2 = 0.7**2 + 0.4**2
    assert np.allclose(np.abs(v), np.abs([0.4 / rho2, 0.7 / rho2, 0.0]), atol=1e-12)


def test_node_proximity():
    st = BoundSuperposition.from_labels({"210+": 1.0})
    with pytest.raises(NodeProximityError):
        wavefunction_velocity(st, None, 0.0, np.array([[1.0, 0.0, 0.0]]))


def test_transport_source_integral():
    u = solve_transport(VelocityField.zero(), lambda t, q: 2.0 * t, (3.0, np.zeros(3)))
    assert u == pytest.approx(9.0, rel=1e-10)
    assert solve_transport(VelocityField.zero(), lambda t, q: 1.0, (0.0, np.zeros(3))) == 0.0


def test_transport_batch_roundtrip():
    st = BoundSuperposition.from_labels({"100+": 1.0, "211+": 1.0})
    f = wavefunction_field(st)
    x0 = np.random.default_rng(4).normal(size=(50, 3)) * 1.5
    x1, k1 = transport_batch(f, x0, 0.0, 5.0)
    x2, k2 = transport_batch(f, x1[k1], 5.0, 0.0)
    assert np.allclose(x2, x0[k1], atol=1e-6)


def test_trajectory_helpers():
    tr = Trajectory.static([1.0, 2.0, 3.0], 0.0, 5.0)
    assert tr.covers(0.0, 5.0) and not tr.covers(0.0, 6.0)
    assert np.allclose(tr.velocity(np.array([1.0, 2.0])), 0.0)


def test_pushforward_equivariance_small_sample():
    st = BoundSuperposition.from_labels({"100+": 1.0, "210+": 1.0})
    rep = pushforward_density(st, t=LYMAN_PERIOD / 2, sample_count=20_000, seed=11)
    assert rep["p_value"] > 0.01
    assert rep["dropped_near_nodes"] < 20


def test_pushforward_detects_wrong_field():
    st = BoundSuperposition.from_labels({"100+": 1.0, "210+": 1.0})
    rep = pushforward_density(st, VelocityField.zero(), t=LYMAN_PERIOD / 2, sample_count=20_000, seed=11)
    assert rep["p_value"] < 1e-6
