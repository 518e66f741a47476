"""First-order amplitudes of a hydrogen atom crossed by a Gaussian beam pulse.

The pulse A(t, z) = x_hat A0 exp(-xi^2/2 sigma^2) cos(kappa xi), with
xi = z - z0 - c t and kappa = omega/c, couples through -(i/c) A.grad.  The
first-order amplitude of a target level n' from a real eigenstate i is

    c_n'(t) = -(1/c) int_0^t exp(i Omega tau) <n'| A(tau) d/dx |i> dtau,
    Omega = E_n' - E_i.

Because A depends on z only, <n'| A d/dx |i> = int A(tau, z) h(z) dz with
h(z) = iint psi_n' d_x psi_i dx dy, which is tabulated once per pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .hydrogen import QuantumNumbers, eigenfunction_and_gradient, labels as _labels
from .pulse import LYMAN_ALPHA, GaussianPulse
from .quadrature import gauss_legendre, gl_panels

__all__ = [
    "GaussianPulse",
    "AmplitudeSet",
    "pulse_vector_potential",
    "reduced_matrix_density",
    "matrix_element",
    "amplitude_evolution",
    "asymptotic_amplitude",
    "rotating_terms",
    "default_basis",
    "LYMAN_ALPHA",
]

ATOM_RADIUS = 40.0
UNITARITY_WARN = 0.1


def pulse_vector_potential(pulse: GaussianPulse, t, z) -> np.ndarray:
    """Pulse vector potential x_hat * A0 * profile(t, z)."""
    return pulse.vector_potential(t, z)


def default_basis(n_max: int = 4) -> list[QuantumNumbers]:
    return list(_labels(n_max))


# --------------------------------------------------------------------------
# matrix elements


@dataclass(frozen=True)
class _SliceRule:
    z: np.ndarray
    wz: np.ndarray
    rho: np.ndarray
    wrho: np.ndarray
    phi: np.ndarray
    wphi: float


def _slice_rule(z_panels: int, rho_panels: int, n_phi: int, order: int = 16) -> _SliceRule:
    z, wz = gl_panels(np.linspace(-ATOM_RADIUS, ATOM_RADIUS, z_panels + 1), order)
    # graded radial panels: the densities are concentrated near the axis
    breaks = ATOM_RADIUS * np.linspace(0.0, 1.0, rho_panels + 1) ** 2
    rho, wrho = gl_panels(breaks, order)
    phi = (np.arange(n_phi) + 0.5) * (2 * math.pi / n_phi)
    return _SliceRule(z, wz, rho, wrho, phi, 2 * math.pi / n_phi)


def _h_on(bra: QuantumNumbers, ket: QuantumNumbers, rule: _SliceRule) -> np.ndarray:
    rho, phi = np.meshgrid(rule.rho, rule.phi, indexing="ij")
    x = (rho * np.cos(phi)).ravel()
    y = (rho * np.sin(phi)).ravel()
    w_plane = (rule.wrho[:, None] * rho * rule.wphi).ravel()
    out = np.empty(len(rule.z))
    for i, zi in enumerate(rule.z):
        pts = np.stack([x, y, np.full_like(x, zi)], axis=-1)
        pb, _ = eigenfunction_and_gradient(bra, pts)
        _, gk = eigenfunction_and_gradient(ket, pts)
        out[i] = np.sum(w_plane * pb * gk[:, 0])
    return out


@dataclass(frozen=True)
class ReducedDensity:
    """h(z) = iint psi_bra d_x psi_ket dx dy tabulated on Gauss nodes in z."""

    bra: QuantumNumbers
    ket: QuantumNumbers
    z: np.ndarray
    wz: np.ndarray
    h: np.ndarray
    error: float

    def total(self) -> float:
        """<bra| d/dx |ket> over the atomic region."""
        return float(np.sum(self.wz * self.h))

    def weighted(self, fz) -> np.ndarray:
        """int f(z) h(z) dz for f sampled on the nodes (last axis)."""
        return np.asarray(fz) @ (self.wz * self.h)


_DENSITY_CACHE: dict = {}


def reduced_matrix_density(bra: QuantumNumbers, ket: QuantumNumbers, tol: float = 1e-10) -> ReducedDensity:
    """Tabulate h(z) with a refinement check on the total <bra|d_x|ket>.

    Raises:
        ConvergenceError: refined and base rules differ by more than tol.
    """
    key = (bra.label, ket.label, tol)
    if key in _DENSITY_CACHE:
        return _DENSITY_CACHE[key]
    n_phi = 4 * (bra.l + ket.l + 2)
    base = _slice_rule(12, 10, n_phi)
    fine = _slice_rule(20, 16, n_phi + 4)
    hb, hf = _h_on(bra, ket, base), _h_on(bra, ket, fine)
    err = abs(np.sum(base.wz * hb) - np.sum(fine.wz * hf))
    if err > tol:
        raise ConvergenceError(f"matrix element quadrature error estimate {err:.2e} exceeds {tol:.0e}", log=[err])
    out = ReducedDensity(bra, ket, fine.z, fine.wz, hf, err)
    _DENSITY_CACHE[key] = out
    return out


def matrix_element(bra: QuantumNumbers, ket: QuantumNumbers, pulse: GaussianPulse | None, t: float = 0.0) -> float:
    """<bra| A(t) . grad |ket> for the pulse (or <bra|d_x|ket> when pulse is None)."""
    dens = reduced_matrix_density(bra, ket)
    if pulse is None:
        return dens.total()
    return float(pulse.amplitude * dens.weighted(pulse.profile(t, dens.z)))


def cauchy_schwarz_bound(bra: QuantumNumbers, ket: QuantumNumbers, pulse: GaussianPulse) -> float:
    """max|A| * ||psi_bra|| * ||d_x psi_ket||, the bound on the matrix element."""
    from .quadrature import spherical_volume_rule

    pts, w = spherical_volume_rule(np.linspace(0.0, ATOM_RADIUS, 11), 16, 12, 24)
    _, g = eigenfunction_and_gradient(ket, pts)
    return abs(pulse.amplitude) * math.sqrt(float(np.sum(w * g[:, 0] ** 2)))


# --------------------------------------------------------------------------
# amplitudes


@dataclass
class AmplitudeSet:
    """First-order coefficients over a finite bound-state basis.

    Attributes:
        initial: Initial real eigenstate.
        labels: Target labels (the initial label is excluded).
        times: Output times.
        free: c^f, shape (len(labels), len(times)).
        sourced: c^s (Born-type, preliminary) or None.
        flags: Validity notes.
    """

    initial: QuantumNumbers
    labels: list[str]
    times: np.ndarray
    free: np.ndarray
    sourced: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)

    def final(self, label: str, part: str = "free") -> complex:
        arr = self.free if part == "free" else self.sourced
        return complex(arr[self.labels.index(label), -1])

    def probabilities(self) -> np.ndarray:
        total = self.free if self.sourced is None else self.free + self.sourced
        return np.abs(total) ** 2

    def depletion(self) -> np.ndarray:
        """Sum of |c|^2 over targets at each output time."""
        return self.probabilities().sum(axis=0)


def _interaction_window(pulse: GaussianPulse, t_end: float, width: float = 12.0):
    c = pulse.c
    lo = (-ATOM_RADIUS - pulse.z0 - width * pulse.sigma_z) / c
    hi = (ATOM_RADIUS - pulse.z0 + width * pulse.sigma_z) / c
    return max(0.0, lo), min(t_end, hi)


def amplitude_evolution(
    initial: QuantumNumbers,
    pulse: GaussianPulse,
    basis: list[QuantumNumbers] | None = None,
    t_end: float | None = None,
    times=None,
    sourced: dict | None = None,
    nodes_per_period: int = 16,
) -> AmplitudeSet:
    """Integrate the first-order amplitude equations with vanishing initial data.

    Args:
        initial: Real eigenstate the atom starts in.
        pulse: Incoming pulse; must start at least 10 sigma_z from the atom.
        basis: Target levels (default all n' <= 4); the initial label is dropped.
        t_end: Final time (default flight time + 20 sigma_z / c).
        times: Output times in [0, t_end] (default 401 uniform points).
        sourced: Optional settings for the preliminary self-field
            contribution, see ``sourced_amplitudes``.

    Raises:
        PreconditionError: the pulse overlaps the atom at t = 0.
    """
    if abs(pulse.z0) < 10 * pulse.sigma_z:
        raise PreconditionError("pulse must start at least 10 sigma_z away from the atom (|z0| >= 10 sigma_z)")
    basis = default_basis() if basis is None else list(basis)
    basis = [b for b in basis if b.label != initial.label]
    if t_end is None:
        t_end = pulse.flight_time() + 20 * pulse.sigma_z / pulse.c
    times = np.linspace(0.0, t_end, 401) if times is None else np.asarray(times, float)
    if np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] > t_end * (1 + 1e-12):
        raise PreconditionError("output times must be sorted within [0, t_end]")
    coeffs = np.zeros((len(basis), len(times)), complex)
    lo, hi = _interaction_window(pulse, t_end)
    if hi > lo and pulse.amplitude != 0.0:
        dens = [reduced_matrix_density(b, initial) for b in basis]
        omegas = np.array([b.energy - initial.energy for b in basis])
        fastest = pulse.omega + np.max(np.abs(omegas))
        period = 2 * math.pi / fastest
        # panel edges include every output time inside the window
        n_pan = max(8, int(math.ceil((hi - lo) / period)))
        edges = np.union1d(np.linspace(lo, hi, n_pan + 1), times[(times > lo) & (times < hi)])
        tau, w = gl_panels(edges, nodes_per_period)
        z = dens[0].z
        prof = np.empty((len(tau), len(z)))
        step = max(1, 4_000_000 // len(z))
        for s in range(0, len(tau), step):
            prof[s : s + step] = pulse.profile(tau[s : s + step, None], z[None, :])
        n_per = nodes_per_period
        for j, (d, om) in enumerate(zip(dens, omegas)):
            M = pulse.amplitude * prof @ (d.wz * d.h)
            integrand = -(1.0 / pulse.c) * np.exp(1j * om * tau) * M * w
            cum = np.concatenate([[0.0], np.cumsum(integrand.reshape(-1, n_per).sum(axis=1))])
            coeffs[j] = np.interp(np.clip(times, lo, hi), edges, cum.real) + 1j * np.interp(
                np.clip(times, lo, hi), edges, cum.imag
            )
    out = AmplitudeSet(initial, [b.label for b in basis], times, coeffs)
    if sourced is not None:
        out.sourced = sourced_amplitudes(initial, basis, pulse, times, **sourced)
        out.flags.append("sourced contribution: Born-type approximation, preliminary")
    dep = float(out.depletion().max()) if len(basis) else 0.0
    if dep > UNITARITY_WARN:
        msg = f"first-order budget exceeded: sum |c|^2 = {dep:.3g} > {UNITARITY_WARN}"
        out.flags.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return out


def rotating_terms(pulse: GaussianPulse, Omega: float) -> tuple[float, float]:
    """Co- and counter-rotating Gaussian Fourier factors.

    int exp(-xi^2/2 sigma^2) cos(kappa xi) exp(-i Omega xi/c) dxi
    = sigma sqrt(pi/2) [exp(-sigma^2 (kappa - Omega/c)^2 / 2) + exp(-sigma^2 (kappa + Omega/c)^2 / 2)].
    The co-rotating term is the one with the smaller exponent.
    """
    kappa = pulse.omega / pulse.c
    nu = abs(Omega) / pulse.c
    pref = pulse.sigma_z * math.sqrt(math.pi / 2.0)
    co = pref * math.exp(-0.5 * (pulse.sigma_z * (kappa - nu)) ** 2)
    counter = pref * math.exp(-0.5 * (pulse.sigma_z * (kappa + nu)) ** 2)
    return co, counter


def asymptotic_amplitude(initial: QuantumNumbers, target: QuantumNumbers, pulse: GaussianPulse, split: bool = False):
    """Closed-form t -> infinity amplitude of ``target``.

    Extending the time integral to the whole line (the pulse is negligible
    outside the window) gives
    c = -(A0/c^2) [co + counter] int h(z) exp(i Omega (z - z0)/c) dz.
    With ``split`` the pair (co part, counter part) is returned.
    """
    Omega = target.energy - initial.energy
    dens = reduced_matrix_density(target, initial)
    geo = np.sum(dens.wz * dens.h * np.exp(1j * Omega * (dens.z - pulse.z0) / pulse.c))
    co, counter = rotating_terms(pulse, Omega)
    pref = -(pulse.amplitude / pulse.c**2) * geo
    if split:
        return complex(pref * co), complex(pref * counter)
    return complex(pref * (co + counter))


def suppression_report(pulse: GaussianPulse) -> dict:
    """Counter/co ratio at resonance, reported through its exponent."""
    expo = pulse.suppression_exponent
    return {
        "sigma_omega_over_c": pulse.sigma_z * pulse.omega / pulse.c,
        "log_ratio": expo,
        "ratio": math.exp(expo) if expo > -700 else 0.0,
        "ratio_representable": expo > -700,
    }


# --------------------------------------------------------------------------
# sourced (self-field) contribution


def sourced_amplitudes(
    initial: QuantumNumbers,
    basis: list[QuantumNumbers],
    pulse: GaussianPulse,
    times,
    a: float = 0.05,
    radial_nodes: int = 6,
    angular_order: int = 5,
    r_max: float = 12.0,
    time_nodes: int = 24,
) -> np.ndarray:
    """Preliminary first-order amplitudes driven by the electron's own field.

    Each configuration point q carries the Born characteristic of the pulse
    through (tau, q); its ball-averaged radiation vector potential at q
    replaces A in the amplitude integral.  Coarse tensor rules are used in q
    and tau, so the output is an order-of-magnitude estimate.
    """
    from .quadrature import sphere_product_rule
    from .radiation import apot_ball_average, born_context

    times = np.asarray(times, float)
    rr, wr = gauss_legendre(0.0, r_max, radial_nodes)
    dirs, wa = sphere_product_rule(angular_order // 2 + 1, angular_order + 1)
    pts = (rr[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    wq = (wr[:, None] * rr[:, None] ** 2 * wa[None, :]).reshape(-1)
    psi_i, grad_i = eigenfunction_and_gradient(initial, pts)
    bras = np.array([eigenfunction_and_gradient(b, pts)[0] for b in basis])
    omegas = np.array([b.energy - initial.energy for b in basis])
    lo, hi = _interaction_window(pulse, float(times[-1]))
    out = np.zeros((len(basis), len(times)), complex)
    if not hi > lo:
        return out
    tau, w = gauss_legendre(lo, hi, time_nodes)
    M = np.zeros((len(basis), len(tau)))
    for k, tk in enumerate(tau):
        if tk <= 0:
            continue
        A = np.array([apot_ball_average(born_context(q, tk, pulse, 1.0, a), tk, center=q, a=a) for q in pts])
        Adotg = np.sum(A * grad_i, axis=-1)
        M[:, k] = bras @ (wq * Adotg)
    for i, ti in enumerate(times):
        sel = tau <= ti
        out[:, i] = -(1.0 / pulse.c) * (np.exp(1j * np.outer(omegas, tau[sel])) * M[:, sel]) @ w[sel]
    return out


def ball_averaged_divergence(pulse: GaussianPulse, t: float, q, a: float, h: float = 1e-3) -> float:
    """div_q of the ball average of the pulse potential (4th-order FD)."""
    from .quadrature import ball_rule

    off, wts = ball_rule()
    q = np.asarray(q, float)

    def avg(p):
        s = p + a * off
        return wts @ pulse.vector_potential(t, s[:, 2])

    div = 0.0
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        div += (-avg(q + 2 * e)[j] + 8 * avg(q + e)[j] - 8 * avg(q - e)[j] + avg(q - 2 * e)[j]) / (12 * h)
    return float(div)
