import math

import numpy as np
import pytest
from scipy.special import sph_harm_y

from sharpqm.errors import DomainError, PreconditionError
from sharpqm.hydrogen import (
    BoundSuperposition,
    QuantumNumbers,
    bohr_energy,
    current_divergence,
    density_current,
    eigenfunction_laplacian,
    gram_matrix,
    labels,
    radial_wavefunction,
    real_eigenfunction,
    transition_frequency,
)
from sharpqm.quadrature import spherical_volume_rule


def test_bohr_levels_and_lyman_alpha():
    assert bohr_energy(1) == -0.5
    assert transition_frequency(2, 1) == 0.375
    for n in range(1, 9):
        assert abs(bohr_energy(n) + 1 / (2 * n * n)) <= 1e-15


def test_labels_count_and_parse():
    assert len(labels(4)) == 30
    q = QuantumNumbers.parse("211-")
    assert (q.n, q.l, q.m, q.parity) == (2, 1, 1, "-")
    with pytest.raises(DomainError):
        QuantumNumbers(2, 2, 0)
    with pytest.raises(DomainError):
        bohr_energy(0)


def test_closed_form_radial_functions():
    r = np.array([0.1, 1.0, 3.7])
    assert np.allclose(radial_wavefunction(1, 0, r), 2 * np.exp(-r), rtol=1e-13)
    assert np.allclose(radial_wavefunction(2, 1, r), r * np.exp(-r / 2) / (2 * math.sqrt(6)), rtol=1e-13)
    r32 = 4 / (81 * math.sqrt(30)) * r**2 * np.exp(-r / 3)
    assert np.allclose(radial_wavefunction(3, 2, r), r32, rtol=1e-12)


def test_real_harmonics_against_complex_scipy():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(20, 3))
    r = np.linalg.norm(p, axis=1)
    th = np.arccos(p[:, 2] / r)
    ph = np.arctan2(p[:, 1], p[:, 0])
    for n, l, m in [(3, 2, 1), (4, 3, 2), (3, 1, 1)]:
        Y = sph_harm_y(l, m, th, ph)
        R = radial_wavefunction(n, l, r)
        plus = real_eigenfunction(QuantumNumbers(n, l, m, "+"), p)
        minus = real_eigenfunction(QuantumNumbers(n, l, m, "-"), p)
        # the +/- partners are the real and imaginary parts up to a common sign
        scale = math.sqrt(2) * R
        assert np.allclose(np.abs(plus), np.abs(scale * Y.real), atol=1e-12)
        assert np.allclose(np.abs(minus), np.abs(scale * Y.imag), atol=1e-12)


def test_orthonormality_n_le_3():
    pts, w = spherical_volume_rule(np.array([0, 1, 2, 4, 8, 14, 22, 35, 60.0]), 16, 16, 24)
    G = gram_matrix(labels(3), pts, w)
    assert np.max(np.abs(G - np.eye(len(G)))) < 1e-9


@pytest.mark.parametrize("lab", ["100+", "210+", "211-", "322+", "433-"])
def test_eigen_equation(lab):
    q = QuantumNumbers.parse(lab)
    p = np.random.default_rng(1).normal(size=(30, 3)) * 2
    psi = real_eigenfunction(q, p)
    r = np.linalg.norm(p, axis=1)
    lhs = -0.5 * eigenfunction_laplacian(q, p) - psi / r
    assert np.allclose(lhs, q.energy * psi, atol=1e-10)


def test_continuity_equation():
    st = BoundSuperposition.from_labels({"100+": 1.0, "211+": 0.5j, "321-": 0.3})
    p = np.random.default_rng(2).normal(size=(25, 3)) * 3
    h = 1e-4
    drho = (density_current(st, 1.0 + h, p)[0] - density_current(st, 1.0 - h, p)[0]) / (2 * h)
    assert np.allclose(drho + current_divergence(st, 1.0, p), 0, atol=1e-8)


def test_superposition_validation():
    with pytest.raises(PreconditionError):
        BoundSuperposition(((QuantumNumbers(1, 0, 0), 0.5),))
    st = BoundSuperposition.from_labels({"100": 3.0, "200": 4.0})
    assert abs(st.norm2 - 1) < 1e-15
    assert not st.is_stationary()
    assert real_eigenfunction(QuantumNumbers(1, 0, 0), np.zeros(3)) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-9)
