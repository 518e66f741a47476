"""Quadrature rules shared across modules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=64)
def _gl(n: int):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _gl(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def gl_panels(breaks, n: int):
    """Composite Gauss-Legendre rule over consecutive intervals of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            x, w = gauss_legendre(a, b, n)
            xs.append(x)
            ws.append(w)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def lebedev14():
    """The 14-point degree-5 rule on the unit sphere, weights summing to 1."""
    octa = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
        dtype=float,
    )
    cube = np.array(
        [[sx, sy, sz] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)],
        dtype=float,
    ) / np.sqrt(3.0)
    pts = np.vstack([octa, cube])
    w = np.concatenate([np.full(6, 1.0 / 15.0), np.full(8, 3.0 / 40.0)])
    return pts, w


@lru_cache(maxsize=1)
def ball_rule():
    """Offsets and weights for averaging over the unit ball.

    Three radial Gauss-Jacobi nodes (weight r^2) times the 14-point sphere
    rule.  Exact for polynomials of degree <= 5.
    """
    x, wr = roots_jacobi(3, 0.0, 2.0)
    r = 0.5 * (1.0 + x)
    wr = 3.0 * wr / 8.0  # normalize: 3 * int_0^1 r^2 dr = 1
    pts, wa = lebedev14()
    off = (r[:, None, None] * pts[None, :, :]).reshape(-1, 3)
    w = (wr[:, None] * wa[None, :]).reshape(-1)
    return off, w


def sphere_product_rule(n_theta: int, n_phi: int):
    """Gauss-Legendre in cos(theta) times uniform azimuth.

    Returns unit vectors of shape (n_theta*n_phi, 3) and weights summing to
    4*pi.  Exact for spherical harmonics with l <= min(2*n_theta-1, n_phi-1).
    """
    ct, wt = _gl(n_theta)
    phi = (np.arange(n_phi) + 0.5) * (2 * np.pi / n_phi)
    st = np.sqrt(1.0 - ct**2)
    dirs = np.stack(
        [
            (st[:, None] * np.cos(phi)[None, :]),
            (st[:, None] * np.sin(phi)[None, :]),
            np.broadcast_to(ct[:, None], (n_theta, n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    w = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).reshape(-1)
    return dirs, w


def spherical_volume_rule(radial_breaks, n_r: int, n_theta: int, n_phi: int, center=(0.0, 0.0, 0.0)):
    """Product rule for integrals over a ball in spherical coordinates.

    Args:
        radial_breaks: Panel boundaries in r (starting at 0).
        n_r: Gauss points per radial panel.
        n_theta, n_phi: Angular resolution, see :func:`sphere_product_rule`.
        center: Origin of the spherical coordinates.

    Returns:
        points (M, 3), weights (M,) including the r^2 Jacobian.
    """
    r, wr = gl_panels(radial_breaks, n_r)
    dirs, wa = sphere_product_rule(n_theta, n_phi)
    pts = r[:, None, None] * dirs[None, :, :] + np.asarray(center, dtype=float)
    w = (wr * r**2)[:, None] * wa[None, :]
    return pts.reshape(-1, 3), w.reshape(-1)
