"""Self-consistent Hartree ground state of a single matter wave around a point nucleus.

Solves the nonlinear radial eigenproblem

    -u''/2 + (-Z/r + V_H[u]) u = E_g u,    int u^2 dr = 1,

with u = r psi, by Numerov shooting on a logarithmic grid and linear
potential mixing.  Energies are reported as labelled components.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConvergenceError, PreconditionError
from .hydrogen import bohr_energy


@dataclass(frozen=True)
class RadialGrid:
    """Logarithmic grid r_i = r_min * exp(i h) on [r_min, r_max]."""

    r_min: float = 1e-5
    r_max: float = 60.0
    count: int = 4000

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max) or self.count < 5:
            raise PreconditionError("need 0 < r_min < r_max and at least 5 nodes")

    @property
    def h(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.count - 1)

    @property
    def x(self) -> np.ndarray:
        return math.log(self.r_min) + self.h * np.arange(self.count)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.x)

    @property
    def weights(self) -> np.ndarray:
        """Weights w with sum(w f) ~ int f dr (Simpson in x, Jacobian r)."""
        n = self.count
        h = self.h
        w = np.zeros(n)
        m = n if n % 2 == 1 else n - 1
        w[:m:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m - 1] -= 1.0
        w *= h / 3.0
        if m < n:
            # last interval by the three-point end formula
            w[n - 1] += 5 * h / 12
            w[n - 2] += 8 * h / 12
            w[n - 3] -= h / 12
        return w * self.r

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.r_min, self.r_max, factor * (self.count - 1) + 1)

    def integrate(self, f: np.ndarray, power: float | None = None) -> float:
        """int f dr over [0, r_max].

        If ``power`` is given, f ~ r**power is assumed on [0, r_min] and that
        head piece is added analytically.
        """
        total = float(np.dot(self.weights, f))
        if power is not None:
            total += float(f[0]) * self.r_min / (power + 1.0)
        return total


@dataclass(frozen=True)
class RadialState:
    """u(r) = r psi(r) sampled on a grid; psi = u / (r sqrt(4 pi))."""

    grid: RadialGrid
    u: np.ndarray

    @property
    def norm(self) -> float:
        return self.grid.integrate(self.u**2, power=2)

    def normalized(self) -> "RadialState":
        return RadialState(self.grid, self.u / math.sqrt(self.norm))

    @classmethod
    def hydrogenic(cls, grid: RadialGrid, zeta: float) -> "RadialState":
        r = grid.r
        return cls(grid, 2.0 * zeta**1.5 * r * np.exp(-zeta * r))


def _require_normalized(state: RadialState, tol: float = 1e-6):
    if abs(state.norm - 1.0) > tol:
        raise PreconditionError(f"state not normalized (int u^2 dr = {state.norm:.8g})")


def hartree_potential(state: RadialState) -> np.ndarray:
    """V_H(r) = (1/r) int_0^r u^2 + int_r^inf u^2/r', sampled on the grid."""
    _require_normalized(state)
    g = state.grid
    r, x = g.r, g.x
    head = state.u[0] ** 2 * g.r_min
    inner = cumulative_simpson(state.u**2 * r, x=x, initial=0.0) + head / 3.0
    tail_integrand = state.u**2  # u^2 / r * dr/dx = u^2
    outer_cum = cumulative_simpson(tail_integrand, x=x, initial=0.0)
    outer = outer_cum[-1] - outer_cum
    return inner / r + outer


def _derivative(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative on a uniform grid."""
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[:2] = (-25 * y[:2] + 48 * y[1:3] - 36 * y[2:4] + 16 * y[3:5] - 3 * y[4:6]) / (12 * h)
    d[-2:] = (25 * y[-2:] - 48 * y[-3:-1] + 36 * y[-4:-2] - 16 * y[-5:-3] + 3 * y[-6:-4]) / (12 * h)
    return d


def kinetic_energy(state: RadialState) -> float:
    """T = (1/2) int u'^2 dr with u' from fourth-order differences in x."""
    g = state.grid
    du = _derivative(state.u, g.h) / g.r
    return 0.5 * g.integrate(du**2, power=0)


def energy_components(state: RadialState, Z: float) -> dict:
    """T, attraction V = -Z<1/r>, Hartree self-term U, F = T + V + U."""
    _require_normalized(state)
    g = state.grid
    T = kinetic_energy(state)
    V = -Z * g.integrate(state.u**2 / g.r, power=1)
    U = 0.5 * g.integrate(state.u**2 * hartree_potential(state), power=2)
    return {"T": T, "V": V, "U": U, "F": T + V + U}


def functional_F(state: RadialState, Z: float) -> float:
    """Hartree functional T - Z<1/r> + (1/2) iint |psi|^2 |psi|^2 / |s-s'|."""
    return energy_components(state, Z)["F"]


# --------------------------------------------------------------------------
# Numerov shooting


def _numerov_outward(g_fn: np.ndarray, h: float, y0: float, y1: float) -> np.ndarray:
    n = g_fn.size
    f = 1.0 - h * h * g_fn / 12.0
    y = np.empty(n)
    y[0], y[1] = y0, y1
    for i in range(1, n - 1):
        y[i + 1] = ((12.0 - 10.0 * f[i]) * y[i] - f[i - 1] * y[i - 1]) / f[i + 1]
    return y


def _count_nodes(y: np.ndarray) -> int:
    s = np.sign(y[1:])
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def solve_radial_ground(grid: RadialGrid, V: np.ndarray, Z: float, e_tol: float = 1e-13):
    """Lowest s-wave eigenpair of -u''/2 + V u = E u with u(r_max) = 0.

    Returns:
        (E, RadialState) with int u^2 dr = 1.
    """
    r, h = grid.r, grid.h
    r2 = r * r

    def shoot(E):
        gfun = 2.0 * r2 * (V - E) + 0.25
        # u ~ r (1 - Z r) near the origin, y = u / sqrt(r)
        y0 = math.sqrt(r[0]) * (1.0 - Z * r[0])
        y1 = math.sqrt(r[1]) * (1.0 - Z * r[1])
        return _numerov_outward(gfun, h, y0, y1)

    # V >= -Z/r, so the ground level lies above the hydrogenic -Z^2/2
    lo = -0.5 * Z * Z - 0.5
    hi = 0.0
    if _count_nodes(shoot(hi)) == 0:
        raise ConvergenceError("no bound s-state below E = 0 for this potential")
    if _count_nodes(shoot(lo)) != 0:
        raise ConvergenceError("lower bisection bound already has a node")
    while hi - lo > e_tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if _count_nodes(shoot(mid)) == 0:
            lo = mid
        else:
            hi = mid
        if mid in (lo, hi) and hi - lo <= 4 * np.spacing(abs(mid)):
            break
    E = 0.5 * (lo + hi)

    # outward up to the turning point, inward from r_max, matched there
    gfun = 2.0 * r2 * (V - E) + 0.25
    y_out = shoot(E)
    classical = np.nonzero(V - E < 0)[0]
    imatch = int(classical[-1]) if classical.size else grid.count // 2
    imatch = min(max(imatch, 10), grid.count - 10)
    f = 1.0 - h * h * gfun / 12.0
    n = grid.count
    y_in = np.zeros(n)
    y_in[-1] = 0.0
    y_in[-2] = 1e-300
    for i in range(n - 2, imatch - 1, -1):
        y_in[i - 1] = ((12.0 - 10.0 * f[i]) * y_in[i] - f[i + 1] * y_in[i + 1]) / f[i - 1]
        if abs(y_in[i - 1]) > 1e250:
            y_in[i - 1 :] *= 1e-250
    y = y_out.copy()
    y[imatch:] = y_in[imatch:] * (y_out[imatch] / y_in[imatch])
    u = y * np.sqrt(r)
    state = RadialState(grid, u).normalized()
    if state.u[np.argmax(np.abs(state.u))] < 0:
        state = RadialState(grid, -state.u)
    return E, state


# --------------------------------------------------------------------------
# SCF driver


@dataclass(frozen=True)
class SCFResult:
    """Converged Hartree ground state with its energy bookkeeping."""

    Z: float
    state: RadialState
    E_g: float
    F: float
    T: float
    V: float
    U: float
    iterations: int
    converged: bool
    log: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "Z": self.Z,
            "E_g": self.E_g,
            "F": self.F,
            "T": self.T,
            "V": self.V,
            "U": self.U,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def scf_ground_state(
    Z: float = 1.0,
    grid: RadialGrid | None = None,
    mixing: float = 0.3,
    tol: float = 1e-10,
    max_iter: int = 400,
    initial_zeta: float | None = None,
    monotone_check: bool = True,
) -> SCFResult:
    """Self-consistent ground state by Numerov shooting and potential mixing.

    Args:
        Z: Nuclear charge (>= 1).
        grid: Radial grid; defaults to RadialGrid().
        mixing: Fraction of the new potential mixed in per iteration.
        tol: Convergence threshold on |Delta E_g| between iterations.
        max_iter: Iteration cap.
        initial_zeta: Effective charge of the hydrogenic 1s start
            (default Z - 5/16).
        monotone_check: Abort if F increases after the third iteration.

    Raises:
        ConvergenceError: iteration limit or a monotonicity violation.
    """
    if Z < 1:
        raise PreconditionError("Z must be >= 1")
    if not tol > 0 or not (0 < mixing <= 1):
        raise PreconditionError("need tol > 0 and 0 < mixing <= 1")
    grid = grid or RadialGrid()
    zeta = Z - 5.0 / 16.0 if initial_zeta is None else initial_zeta
    r = grid.r
    state = RadialState.hydrogenic(grid, zeta).normalized()
    V_in = -Z / r + hartree_potential(state)
    E_prev = None
    F_hist = []
    log = []
    converged = False
    for it in range(1, max_iter + 1):
        E, state = solve_radial_ground(grid, V_in, Z)
        comps = energy_components(state, Z)
        F_hist.append(comps["F"])
        dE = math.inf if E_prev is None else abs(E - E_prev)
        log.append({"iteration": it, "E": E, "F": comps["F"], "dE": dE})
        if monotone_check and it > 4 and F_hist[-1] > F_hist[-2] + 1e-11:
            raise ConvergenceError(
                f"functional increased at iteration {it}: {F_hist[-2]!r} -> {F_hist[-1]!r}", log
            )
        if dE < tol:
            converged = True
            break
        E_prev = E
        V_out = -Z / r + hartree_potential(state)
        V_in = (1.0 - mixing) * V_in + mixing * V_out
    if not converged:
        raise ConvergenceError(f"SCF did not converge in {max_iter} iterations", log)
    comps = energy_components(state, Z)
    if abs(comps["F"] + comps["T"]) > 1e-2 * abs(comps["F"]):
        warnings.warn("virial residual above 1e-2; grid is probably too coarse", RuntimeWarning)
    return SCFResult(Z, state, E, comps["F"], comps["T"], comps["V"], comps["U"], it, True, tuple(log))


def energy_relations(result: SCFResult, tol: float = 1e-6) -> dict:
    """Energy identities, inequalities and benchmark ratios of an SCF result.

    Report-only: violated relations set flags but never raise.
    """
    e1 = bohr_energy(1) * result.Z**2
    resid = result.E_g - result.F - result.U
    flags = {
        "Eg_equals_F_plus_U": abs(resid) < tol,
        "Eg_above_F": result.E_g > result.F,
        "F_above_bohr": result.F > e1,
        "virial": abs(result.F + result.T) < 1e-3 * abs(result.F),
        "converged": bool(result.converged),
    }
    return {
        "E1_bohr": e1,
        "E_g": result.E_g,
        "F": result.F,
        "U": result.U,
        "T": result.T,
        "residual_Eg_minus_F_minus_U": resid,
        "virial_residual": (result.F + result.T) / abs(result.F) if result.F else math.nan,
        "ratio_Eg_over_E1": result.E_g / e1,
        "implied_hydride_HF_2Eg": 2.0 * result.E_g,
        "ratio_2Eg_over_E1": 2.0 * result.E_g / e1,
        "ratio_F_over_E1": result.F / e1,
        "ratio_2F_over_E1": 2.0 * result.F / e1,
        "flags": flags,
        "all_ok": all(flags.values()),
    }
