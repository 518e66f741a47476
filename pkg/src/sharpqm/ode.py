"""Batched Dormand-Prince 5(4) integrator with per-trajectory step control.

scipy's solve_ivp treats a vectorized batch as one system, so a single stiff
member forces tiny steps on all of them.  Here every trajectory carries its
own time and step size; the right-hand side is still evaluated in one call.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import StepLimitError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B4


def integrate_batch(
    rhs: Callable,
    y0: np.ndarray,
    t0: float,
    t1: float,
    rtol: float = 1e-9,
    atol: float = 1e-9,
    max_steps: int = 1_000_000,
    h0: float | None = None,
):
    """Integrate M independent ODEs y' = f(t, y) from t0 to t1.

    Args:
        rhs: Callable (t[M'], y[M', d]) -> (dy[M', d], ok[M']); ``ok`` flags
            members whose right-hand side is invalid (e.g. at a node).
        y0: Initial states, shape (M, d).
        t0, t1: Common start and end time (t1 < t0 is allowed).
        rtol, atol: Local error tolerances (RMS over components).
        max_steps: Accepted-plus-rejected step budget per member.

    Returns:
        (y at t1 of shape (M, d), ok mask of shape (M,), steps per member).
    """
    y = np.array(y0, dtype=float, copy=True)
    M, d = y.shape
    sign = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    t = np.full(M, float(t0))
    ok = np.ones(M, bool)
    steps = np.zeros(M, int)
    if span == 0.0:
        return y, ok, steps
    h = np.full(M, h0 if h0 is not None else 1e-3 * span)
    active = np.arange(M)
    k1 = None
    while active.size:
        ta, ya, ha = t[active], y[active], h[active]
        remaining = np.abs(t1 - ta)
        ha = np.minimum(ha, remaining)
        dt = sign * ha
        if k1 is None:
            k1, good = rhs(ta, ya)
            ok[active[~good]] = False
        ks = [k1]
        bad = np.zeros(active.size, bool)
        for i in range(1, 7):
            yi = ya + dt[:, None] * sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
            ki, good = rhs(ta + _C[i] * dt, yi)
            bad |= ~good
            ks.append(ki)
        y5 = ya + dt[:, None] * sum(b * k for b, k in zip(_B, ks) if b != 0.0)
        errv = dt[:, None] * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(ya), np.abs(y5))
        err = np.sqrt(np.mean((errv / scale) ** 2, axis=1))
        accept = (err <= 1.0) & ~bad
        fac = np.where(err > 0, 0.9 * np.power(np.maximum(err, 1e-30), -0.2), 5.0)
        fac = np.clip(fac, 0.2, 5.0)
        fac = np.where(bad, 0.25, fac)
        steps[active] += 1
        t[active[accept]] = ta[accept] + dt[accept]
        y[active[accept]] = y5[accept]
        h[active] = np.where(accept, ha * fac, ha * np.minimum(fac, 1.0))
        # members that cannot make progress near an invalid region are dropped
        stuck = bad & (ha < 1e-12 * span)
        ok[active[stuck]] = False
        finished = (np.abs(t[active] - t1) <= 1e-14 * max(1.0, abs(t1))) | ~ok[active]
        if np.any(steps[active] > max_steps):
            raise StepLimitError("batched integrator exceeded its step budget", partial=(t.copy(), y.copy()))
        k_next = np.where(accept[:, None], ks[6], k1)
        keep = ~finished
        active = active[keep]
        k1 = k_next[keep] if active.size else None
    return y, ok, steps
