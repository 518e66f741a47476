"""Hydrogen eigenbasis in Hartree units, bound superpositions, densities and currents.

Real eigenfunctions are written as

    psi_{n l m s}(x) = f_{n l}(r) * S_{l m s}(x),

where f = R_{n l}/r^l is smooth at the origin and S is a real solid harmonic
(a homogeneous polynomial of degree l).  With this split the Cartesian
gradient is polynomial times exponential, so no axis or origin singularities
appear except the genuine cusp of l = 0 states at r = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, PreconditionError

N_MAX = 12
_R_SHIFT = 1e-10


def bohr_energy(n: int) -> float:
    """Bohr level E_n = -1/(2 n^2) in Hartree."""
    if int(n) != n or n < 1:
        raise DomainError(f"principal quantum number must be >= 1, got {n}")
    return -0.5 / (n * n)


def transition_frequency(n_upper: int, n_lower: int) -> float:
    """Angular frequency (E_upper - E_lower)/hbar."""
    return bohr_energy(n_upper) - bohr_energy(n_lower)


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    """Labels (n, l, m, parity) of a real hydrogen eigenfunction.

    parity is "+" for the cos(m phi) partner and "-" for sin(m phi);
    m = 0 admits only "+".
    """

    n: int
    l: int
    m: int
    parity: str = "+"

    def __post_init__(self):
        n, l, m, s = self.n, self.l, self.m, self.parity
        if not (isinstance(n, (int, np.integer)) and 1 <= n <= N_MAX):
            raise DomainError(f"n must be an integer in [1, {N_MAX}], got {n}")
        if not (0 <= l <= n - 1):
            raise DomainError(f"l must satisfy 0 <= l <= n-1, got l={l}, n={n}")
        if not (0 <= m <= l):
            raise DomainError(f"m must satisfy 0 <= m <= l, got m={m}, l={l}")
        if s not in ("+", "-"):
            raise DomainError(f"parity must be '+' or '-', got {s!r}")
        if m == 0 and s == "-":
            raise DomainError("parity '-' is not allowed for m = 0")

    @property
    def energy(self) -> float:
        return bohr_energy(self.n)

    @property
    def label(self) -> str:
        return f"{self.n}{self.l}{self.m}{self.parity}"

    @classmethod
    def parse(cls, text: str) -> "QuantumNumbers":
        """Parse compact labels such as "211+" or "100"."""
        text = text.strip()
        parity = "+"
        if text and text[-1] in "+-":
            parity = text[-1]
            text = text[:-1]
        parts = text.split(",") if "," in text else list(text)
        if len(parts) != 3:
            raise DomainError(f"cannot parse quantum numbers {text!r}")
        n, l, m = (int(p) for p in parts)
        return cls(n, l, m, parity)


def labels(n_max: int) -> list[QuantumNumbers]:
    """All n^2 real labels per shell for 1 <= n <= n_max."""
    out = []
    for n in range(1, n_max + 1):
        for l in range(n):
            out.append(QuantumNumbers(n, l, 0, "+"))
            for m in range(1, l + 1):
                out.append(QuantumNumbers(n, l, m, "+"))
                out.append(QuantumNumbers(n, l, m, "-"))
    return out


@dataclass(frozen=True)
class SpacePoint:
    """Cartesian point with derived spherical coordinates."""

    x: float
    y: float
    z: float

    @property
    def cartesian(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def spherical(self) -> tuple[float, float, float]:
        r = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        theta = math.atan2(math.hypot(self.x, self.y), self.z)
        phi = math.atan2(self.y, self.x) % (2 * math.pi)
        return r, theta, phi

    @classmethod
    def from_spherical(cls, r: float, theta: float, phi: float) -> "SpacePoint":
        st = math.sin(theta)
        return cls(r * st * math.cos(phi), r * st * math.sin(phi), r * math.cos(theta))


def as_points(p) -> np.ndarray:
    """Coerce a SpacePoint or array-like of shape (..., 3) to a float array."""
    if isinstance(p, SpacePoint):
        return p.cartesian
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 3:
        raise DomainError("points must have trailing dimension 3")
    return arr


# --------------------------------------------------------------------------
# radial part


def _laguerre_all(k: int, alpha: float, x: np.ndarray) -> list[np.ndarray]:
    """L_0^alpha .. L_k^alpha by the three-term upward recurrence."""
    vals = [np.ones_like(x)]
    if k >= 1:
        vals.append(1.0 + alpha - x)
    for j in range(1, k):
        vals.append(((2 * j + 1 + alpha - x) * vals[j] - (j + alpha) * vals[j - 1]) / (j + 1))
    return vals


def _laguerre(k: int, alpha: float, x: np.ndarray) -> np.ndarray:
    if k < 0:
        return np.zeros_like(x)
    return _laguerre_all(k, alpha, x)[k]


def _radial_norm(n: int, l: int) -> float:
    return math.sqrt(math.factorial(n - l - 1) / (2.0 * n * math.factorial(n + l))) * (2.0 / n) ** 1.5


def _check_nl(n: int, l: int):
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= N_MAX and 0 <= l <= n - 1):
        raise DomainError(f"invalid (n, l) = ({n}, {l}); need 1 <= n <= {N_MAX}, 0 <= l < n")


def reduced_radial(n: int, l: int, r, order: int = 0, expo=None):
    """f(r) = R_{nl}(r)/r^l and its derivatives up to ``order`` (<= 2).

    Args:
        expo: Optional precomputed exp(-r/n).

    Returns a tuple (f, f', f'') truncated to ``order + 1`` entries.
    """
    _check_nl(n, l)
    r = np.asarray(r, dtype=float)
    k = n - l - 1
    alpha = 2 * l + 1
    rho = 2.0 * r / n
    pref = _radial_norm(n, l) * (2.0 / n) ** l * (np.exp(-r / n) if expo is None else expo)
    lag = _laguerre(k, alpha, rho)
    out = [pref * lag]
    if order >= 1:
        dlag = -_laguerre(k - 1, alpha + 1, rho)
        out.append(pref * ((2.0 / n) * dlag - lag / n))
    if order >= 2:
        d2lag = _laguerre(k - 2, alpha + 2, rho)
        out.append(pref * ((4.0 / n**2) * (d2lag - dlag) + lag / n**2))
    return tuple(out)


def radial_wavefunction(n: int, l: int, r) -> np.ndarray:
    """R_{n,l}(r), normalized so that int R^2 r^2 dr = 1.

    Args:
        n: Principal quantum number (1..12).
        l: Orbital quantum number (0..n-1).
        r: Radius (scalar or array), r >= 0.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    (f,) = reduced_radial(n, l, r)
    return f * r**l


def radial_derivatives(n: int, l: int, r):
    """(R, R', R'') for the radial function, evaluated analytically."""
    r = np.asarray(r, dtype=float)
    f, f1, f2 = reduced_radial(n, l, r, order=2)
    rl = r**l
    rl1 = l * r ** (l - 1) if l >= 1 else np.zeros_like(r)
    rl2 = l * (l - 1) * r ** (l - 2) if l >= 2 else np.zeros_like(r)
    return rl * f, rl1 * f + rl * f1, rl2 * f + 2 * rl1 * f1 + rl * f2


# --------------------------------------------------------------------------
# angular part as real solid harmonics


def _legendre_power_coeffs(l: int) -> np.ndarray:
    """Power-basis coefficients of P_l via Bonnet's recurrence."""
    p0 = np.array([1.0])
    if l == 0:
        return p0
    p1 = np.array([0.0, 1.0])
    for k in range(1, l):
        xp = np.concatenate([[0.0], p1])
        pm = np.concatenate([p0, np.zeros(len(xp) - len(p0))])
        p0, p1 = p1, ((2 * k + 1) * xp - k * pm) / (k + 1)
    return p1


@lru_cache(maxsize=None)
def _solid_terms(l: int, m: int) -> tuple[tuple[int, int, float], ...]:
    """Terms (k, j, coeff) with r^{l-m} Q(z/r) = sum coeff z^k (r^2)^j.

    Q = d^m P_l/dx^m; the normalization of the real spherical harmonic is
    folded into the coefficients.
    """
    p = _legendre_power_coeffs(l)
    q = np.polynomial.polynomial.polyder(p, m) if m > 0 else p
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m))
    if m > 0:
        norm *= math.sqrt(2.0)
    terms = []
    for k, ck in enumerate(q):
        if ck == 0.0:
            continue
        d = l - m - k
        if d % 2:
            continue
        terms.append((k, d // 2, float(ck) * norm))
    return tuple(terms)


def _azimuthal(m: int, parity: str, x, y, grad: bool):
    """Re/Im of (x + i y)^m and optionally its x, y derivatives."""
    w = (x + 1j * y) ** m
    pick = np.real if parity == "+" else np.imag
    if not grad:
        return pick(w), None, None
    if m == 0:
        z0 = np.zeros_like(x)
        return pick(w), z0, z0
    dw = m * (x + 1j * y) ** (m - 1)
    return pick(w), pick(dw), pick(1j * dw)


def solid_harmonic(l: int, m: int, parity: str, pts: np.ndarray, grad: bool = False):
    """Real solid harmonic r^l Y_{l m parity} and optionally its gradient."""
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    r2 = x * x + y * y + z * z
    a = np.zeros_like(x)
    ax = np.zeros_like(x)
    az = np.zeros_like(x)
    for k, j, c in _solid_terms(l, m):
        zk = z**k
        r2j = r2**j
        a = a + c * zk * r2j
        if grad:
            if j >= 1:
                dr2 = c * zk * j * r2 ** (j - 1) * 2.0
                ax = ax + dr2  # multiply by x or y below
                az = az + dr2 * z
            if k >= 1:
                az = az + c * k * z ** (k - 1) * r2j
    cm, cmx, cmy = _azimuthal(m, parity, x, y, grad)
    s = a * cm
    if not grad:
        return s, None
    g = np.stack([ax * x * cm + a * cmx, ax * y * cm + a * cmy, az * cm], axis=-1)
    return s, g


# --------------------------------------------------------------------------
# full eigenfunctions


def real_eigenfunction(qn: QuantumNumbers, p) -> np.ndarray:
    """psi_{n l m parity} at Cartesian point(s) p."""
    pts = as_points(p)
    r = np.sqrt(np.sum(pts**2, axis=-1))
    (f,) = reduced_radial(qn.n, qn.l, r)
    s, _ = solid_harmonic(qn.l, qn.m, qn.parity, pts)
    return f * s


def eigenfunction_and_gradient(qn: QuantumNumbers, p, _cache: dict | None = None):
    """(psi, grad psi) with the gradient evaluated analytically.

    At the origin an l = 0 gradient is taken at the shifted point r = 1e-10
    along +z.
    """
    pts = as_points(p)
    cache = {} if _cache is None else _cache
    if "pts" not in cache:
        r = np.sqrt(np.sum(pts**2, axis=-1))
        small = r < _R_SHIFT
        if np.any(small):
            pts = np.array(pts, copy=True)
            pts[small] = np.array([0.0, 0.0, _R_SHIFT])
            r = np.where(small, _R_SHIFT, r)
        cache["pts"] = pts
        cache["r"] = r
        with np.errstate(invalid="ignore", divide="ignore"):
            cache["rhat"] = pts / r[..., None]
    pts, r, rhat = cache["pts"], cache["r"], cache["rhat"]
    key = ("exp", qn.n)
    if key not in cache:
        cache[key] = np.exp(-r / qn.n)
    f, f1 = reduced_radial(qn.n, qn.l, r, order=1, expo=cache[key])
    s, gs = solid_harmonic(qn.l, qn.m, qn.parity, pts, grad=True)
    grad = (f1 * s)[..., None] * rhat + f[..., None] * gs
    return f * s, grad


def eigenfunction_laplacian(qn: QuantumNumbers, p) -> np.ndarray:
    """Laplacian of psi by separation of variables: (f'' + 2(l+1) f'/r) S."""
    pts = as_points(p)
    r = np.sqrt(np.sum(pts**2, axis=-1))
    f, f1, f2 = reduced_radial(qn.n, qn.l, r, order=2)
    s, _ = solid_harmonic(qn.l, qn.m, qn.parity, pts)
    return (f2 + 2 * (qn.l + 1) * f1 / r) * s


# --------------------------------------------------------------------------
# superpositions


@dataclass(frozen=True)
class BoundSuperposition:
    """Finite superposition sum_j c_j exp(-i E_j (t - t0)) psi_j.

    Args:
        terms: Sequence of (QuantumNumbers, complex coefficient).
        t0: Time origin at which the coefficients are given.
        normalized: If True, require sum |c|^2 = 1 within 1e-10.
    """

    terms: tuple = field(default_factory=tuple)
    t0: float = 0.0
    normalized: bool = True

    def __post_init__(self):
        terms = tuple((qn if isinstance(qn, QuantumNumbers) else QuantumNumbers(*qn), complex(c)) for qn, c in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise PreconditionError("superposition needs at least one term")
        seen = set()
        for qn, _ in terms:
            if qn in seen:
                raise PreconditionError(f"duplicate label {qn.label}")
            seen.add(qn)
        if self.normalized and abs(self.norm2 - 1.0) > 1e-10:
            raise PreconditionError(f"coefficients not normalized: sum |c|^2 = {self.norm2!r}")

    @classmethod
    def from_labels(cls, coeffs: dict, t0: float = 0.0, normalize: bool = True) -> "BoundSuperposition":
        """Build from a mapping label -> coefficient, optionally normalizing."""
        items = [(k if isinstance(k, QuantumNumbers) else QuantumNumbers.parse(k), complex(v)) for k, v in coeffs.items()]
        if normalize:
            s = math.sqrt(sum(abs(c) ** 2 for _, c in items))
            if not s > 0:
                raise PreconditionError("superposition coefficients are all zero")
            items = [(q, c / s) for q, c in items]
        return cls(tuple(items), t0=t0, normalized=normalize)

    @property
    def norm2(self) -> float:
        return float(sum(abs(c) ** 2 for _, c in self.terms))

    @property
    def labels(self) -> list[QuantumNumbers]:
        return [qn for qn, _ in self.terms]

    def coefficients(self, t) -> list:
        """Time-dependent coefficients c_j exp(-i E_j (t - t0)).

        For array ``t`` each entry is an array of the same shape.
        """
        t = np.asarray(t, dtype=float)
        return [c * np.exp(-1j * qn.energy * (t - self.t0)) for qn, c in self.terms]

    def is_stationary(self) -> bool:
        return len({qn.n for qn, _ in self.terms}) == 1

    def value(self, t: float, p) -> np.ndarray:
        pts = as_points(p)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for (qn, _), c in zip(self.terms, self.coefficients(t)):
            out = out + c * real_eigenfunction(qn, pts)
        return out

    def value_and_gradient(self, t, p):
        """Psi and grad Psi; ``t`` may be an array broadcasting against p[..., 0]."""
        pts = as_points(p)
        val = np.zeros(pts.shape[:-1], dtype=complex)
        grad = np.zeros(pts.shape, dtype=complex)
        cache: dict = {}
        for (qn, _), c in zip(self.terms, self.coefficients(t)):
            v, g = eigenfunction_and_gradient(qn, pts, cache)
            val = val + c * v
            grad = grad + np.asarray(c)[..., None] * g
        return val, grad

    def time_derivative(self, t: float, p) -> np.ndarray:
        pts = as_points(p)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for (qn, _), c in zip(self.terms, self.coefficients(t)):
            out = out + (-1j * qn.energy) * c * real_eigenfunction(qn, pts)
        return out

    def hamiltonian_applied(self, t: float, p) -> np.ndarray:
        """(H_hyd Psi)(t, p) using the eigenvalue of every term."""
        pts = as_points(p)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for (qn, _), c in zip(self.terms, self.coefficients(t)):
            out = out + qn.energy * c * real_eigenfunction(qn, pts)
        return out


def superposition_value(state: BoundSuperposition, t: float, p) -> np.ndarray:
    """Psi(t, p) for a bound superposition."""
    return state.value(t, p)


def density_current(state: BoundSuperposition, t: float, p):
    """Probability density |Psi|^2 and current Im(Psi^* grad Psi).

    Returns:
        (rho, J) with J of shape (..., 3).
    """
    val, grad = state.value_and_gradient(t, p)
    rho = np.abs(val) ** 2
    j = np.imag(np.conj(val)[..., None] * grad)
    return rho, j


def current_divergence(state: BoundSuperposition, t: float, p) -> np.ndarray:
    """Analytic div J = Im(Psi^* Laplacian Psi) (the |grad Psi|^2 term is real)."""
    pts = as_points(p)
    val = state.value(t, pts)
    lap = np.zeros(pts.shape[:-1], dtype=complex)
    for (qn, _), c in zip(state.terms, state.coefficients(t)):
        lap = lap + c * eigenfunction_laplacian(qn, pts)
    return np.imag(np.conj(val) * lap)


def iter_labels(states: Iterable) -> Iterator[QuantumNumbers]:
    for s in states:
        yield s if isinstance(s, QuantumNumbers) else QuantumNumbers.parse(str(s))


def gram_matrix(qns: Sequence[QuantumNumbers], pts: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Quadrature Gram matrix of real eigenfunctions on a supplied rule."""
    vals = np.array([real_eigenfunction(q, pts) for q in qns])
    return (vals * w) @ vals.T
