import numpy as np
import pytest

from sharpqm import audit_cases
from sharpqm.audit import (
    ExpectationContext,
    basis_n_le,
    commutator_diagnostic,
    energy_identity_residual,
    jensen_gap,
    momentum_identity_residuals,
    pulse_interaction_matrix,
    state_coefficients,
)
from sharpqm.errors import DomainError, PreconditionError, UnsupportedError
from sharpqm.hydrogen import BoundSuperposition
from sharpqm.pulse import GaussianPulse

GROUND = BoundSuperposition.from_labels({"100+": 1.0})
MIXED = BoundSuperposition.from_labels({"100+": 1.0, "210+": 1.0})


def test_ball_average_requires_positive_radius():
    with pytest.raises(UnsupportedError):
        ExpectationContext(GROUND, 0.0)


def test_missing_evaluators():
    ctx = ExpectationContext(GROUND, 0.1)
    with pytest.raises(DomainError):
        energy_identity_residual(ctx, 1.0)
    with pytest.raises(DomainError):
        momentum_identity_residuals(ctx, 1.0)
    with pytest.raises(DomainError):
        jensen_gap(ctx, 1.0)


def test_time_stencil_precondition():
    ctx = ExpectationContext(GROUND, 0.1, E=audit_cases.separable_E, energy=audit_cases.separable_energy)
    with pytest.raises(PreconditionError):
        energy_identity_residual(ctx, 1e-3)


def test_grid_must_capture_density():
    from sharpqm.quadrature import spherical_volume_rule

    small = spherical_volume_rule(np.linspace(0, 2.0, 5), 6, 6, 12)
    with pytest.raises(PreconditionError):
        ExpectationContext(GROUND, 0.1, grid=small)


def test_gaussian_ball_average_against_cubature():
    from sharpqm.quadrature import spherical_volume_rule

    q = np.array([[0.9, -0.2, 0.1], [0.5, 0.0, 0.3]])
    a = 0.3
    pts, w = spherical_volume_rule(np.array([0.0, a]), 20, 20, 40)
    for qi, got in zip(q, audit_cases.gaussian_ball_average(q, a)):
        vals = np.exp(-0.5 * np.sum((qi + pts - audit_cases._S0) ** 2, -1))
        assert got == pytest.approx(np.sum(w * vals) / np.sum(w), rel=1e-10)


def test_separable_energy_audit_matches_oracle():
    r = audit_cases.separable_case()
    # the separable field is not a Maxwell solution, so only each side is checked
    assert r["lhs_error"] < 1e-6 and r["rhs_error"] < 1e-6


def test_energy_audit_converges_under_dt_halving():
    ctx = ExpectationContext(MIXED, 0.1, E=audit_cases.separable_E, energy=audit_cases.separable_energy)
    lo, _ = audit_cases.separable_oracle(MIXED, 2.0, 0.1)
    errs = [abs(float(energy_identity_residual(ctx, 2.0, dt).lhs) - lo) for dt in (0.2, 0.1, 0.05)]
    assert errs[2] < errs[1] < errs[0]
    assert errs[0] / errs[1] > 8


def test_static_and_free_field_cases():
    st = audit_cases.static_case()
    assert max(st[k]["residual"] for k in st) < 1e-8
    assert audit_cases.free_field_momentum_case()["rhs_error"] < 1e-6
    ch = audit_cases.chain_rule_case()
    assert max(ch.values()) < 1e-6


def test_jensen_gap_grows_with_field_dependence():
    # g(s - lam q): the ground-state density has a radially decreasing
    # Fourier transform, so the gap increases with lam
    gaps = []
    for lam in np.linspace(0.0, 1.0, 5):
        E = lambda t, s, q, lam=lam: audit_cases._g(np.asarray(s) - lam * np.asarray(q) + audit_cases._S0)  # noqa: E731
        gaps.append(jensen_gap(ExpectationContext(GROUND, 0.05, E=E), 0.0).gap)
    assert abs(gaps[0]) < 1e-10
    assert np.all(np.diff(gaps) > 0)


def test_jensen_gap_for_electron_ball_field_positive():
    g = audit_cases.jensen_cases()
    assert abs(g["q_independent"]["gap"]) < 1e-10
    assert g["coulomb_electron"]["gap"] > 0


def test_commutator_vanishes_without_interaction():
    z = audit_cases.commutator_zero_cases()
    assert z["no_interaction"] == 0.0 and z["constant_h_rad"] == 0.0


def test_commutator_single_eigenstate_and_hermiticity():
    p = GaussianPulse.desk_scale()
    basis = basis_n_le(2)
    M = pulse_interaction_matrix(p, p.flight_time(), basis)
    assert np.allclose(M, M.conj().T, atol=1e-15)
    assert np.abs(M).max() > 0
    assert commutator_diagnostic(GROUND, M, 0.0, basis) == 0.0


def test_state_outside_basis():
    st = BoundSuperposition.from_labels({"100+": 1.0, "310+": 1.0})
    with pytest.raises(PreconditionError):
        state_coefficients(st, 0.0, basis_n_le(2))


def test_ehrenfest_oracle():
    assert audit_cases.ehrenfest_check() < 1e-8
