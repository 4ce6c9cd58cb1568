"""Strang splitting, the analytic plane wave and fine-step reference solves."""
from __future__ import annotations

import numpy as np

from .integrators import Method, SchemeParams, _step_lowreg_1d, _step_lowreg_dd
from .spectral import (
    Field,
    TorusGrid,
    apply_multiplier,
    cis,
    from_physical,
    propagator,
    to_physical,
)

__all__ = [
    "strang_step",
    "plane_wave",
    "step",
    "integrate",
    "step_count",
    "reference_solve",
]


def _strang(u: np.ndarray, grid: TorusGrid, tau: float, mu: float) -> np.ndarray:
    # the half nonlinear flow is exact because |u| is invariant under it
    u = cis(-0.5 * mu * tau * (u.real**2 + u.imag**2)) * u
    u = apply_multiplier(u, propagator(grid, tau))
    return cis(-0.5 * mu * tau * (u.real**2 + u.imag**2)) * u


_KERNELS = {
    Method.LOWREG_1D: _step_lowreg_1d,
    Method.LOWREG_DD: _step_lowreg_dd,
    Method.STRANG: _strang,
}


def strang_step(u: Field, p: SchemeParams) -> Field:
    """Nonlinear half step, full linear step, nonlinear half step."""
    p.check(u.grid, Method.STRANG)
    return from_physical(_strang(to_physical(u), u.grid, p.tau, p.mu), u.grid)


def step(u: Field, p: SchemeParams) -> Field:
    """One step of whichever method ``p`` selects."""
    p.check(u.grid)
    return from_physical(_KERNELS[p.method](to_physical(u), u.grid, p.tau, p.mu), u.grid)


def plane_wave(a: complex, k, mu: float, t: float, grid: TorusGrid) -> Field:
    """Exact solution ``a exp(i k.x) exp(-i (|k|^2 + mu |a|^2) t)``."""
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    idx = grid.index_of(k)
    omega = float(np.sum(k.astype(float) ** 2)) + mu * abs(a) ** 2
    c = np.zeros(grid.shape, dtype=complex)
    c[idx] = a * np.exp(-1j * omega * t)
    return Field(grid, c)


def step_count(T: float, tau: float, rtol: float = 1e-9) -> int:
    """Number of steps of size ``tau`` that exactly cover ``[0, T]``."""
    if not tau > 0:
        raise ValueError(f"step size must be positive, got {tau}")
    n = round(T / tau)
    if n < 1 or abs(n * tau - T) > rtol * max(abs(T), 1.0):
        raise ValueError(f"T = {T} is not an integer multiple of tau = {tau}")
    return int(n)


def integrate(u0: Field, T: float, p: SchemeParams, callback=None, stride: int = 1) -> Field:
    """Integrate from 0 to ``T`` with ``T/p.tau`` steps of the selected method.

    The step size is adjusted to ``T/n`` so the final time is hit exactly.
    ``callback(n, t, values)`` is called at ``t = 0`` and after every
    ``stride``-th step with the physical grid values.
    """
    p.check(u0.grid)
    n = step_count(T, p.tau)
    tau = T / n
    kernel = _KERNELS[p.method]
    grid = u0.grid
    u = to_physical(u0)
    if callback is not None:
        callback(0, 0.0, u)
    for i in range(1, n + 1):
        u = kernel(u, grid, tau, p.mu)
        if callback is not None and (i % stride == 0 or i == n):
            callback(i, i * tau, u)
    return from_physical(u, grid)


def reference_solve(u0: Field, T: float, p: SchemeParams, refinement: int) -> Field:
    """Solve to time ``T`` with step ``p.tau / refinement`` of ``p.method``."""
    if int(refinement) != refinement or refinement < 1:
        raise ValueError(f"refinement must be a positive integer, got {refinement}")
    fine = SchemeParams(p.tau / refinement, p.mu, p.method)
    step_count(T, fine.tau)
    return integrate(u0, T, fine)

