"""Second-order low-regularity Fourier integrators for the cubic NLS

    i u_t = -Laplacian u + mu |u|^2 u   on the torus.

Every oscillatory integral is evaluated in closed form as a fixed pipeline
of Fourier multipliers and pointwise products on the collocation points, so
one step costs O(N^d log N).  Products are not dealiased.

The ``_``-prefixed functions work on arrays of physical values and are what
the time-stepping loops call; the public functions wrap them for
:class:`~lowreg_nls.spectral.Field` arguments.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .spectral import (
    Field,
    TorusGrid,
    apply_multiplier,
    axis_propagator,
    cis,
    conj_spectrum,
    from_physical,
    inv_derivative_multiplier,
    phi1_multiplier,
    propagator,
    to_physical,
)

__all__ = [
    "Method",
    "SchemeParams",
    "j1_1d",
    "j2_1d",
    "kj",
    "step_lowreg_1d",
    "step_lowreg_dd",
]


class Method(str, enum.Enum):
    LOWREG_1D = "lowreg1d"
    LOWREG_DD = "lowregdd"
    STRANG = "strang"

    @classmethod
    def parse(cls, text) -> "Method":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {text!r}; choose from {names}") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SchemeParams:
    """Step size, nonlinearity coefficient and method selector."""

    tau: float
    mu: float = 1.0
    method: Method = Method.LOWREG_1D

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        if not self.tau > 0:
            raise ValueError(f"step size must be positive, got {self.tau}")

    def check(self, grid: TorusGrid, method: Method | None = None) -> None:
        if method is not None and self.method is not method:
            raise ValueError(f"scheme parameters select {self.method}, expected {method}")
        if self.method is Method.LOWREG_1D and grid.dim != 1:
            raise ValueError(f"{Method.LOWREG_1D} requires d = 1, grid has d = {grid.dim}")


def _require_1d(grid: TorusGrid) -> None:
    if grid.dim != 1:
        raise ValueError(f"one-dimensional integral requested on a {grid.dim}-dimensional grid")


# -- closed-form integrals ----------------------------------------------------
#
# The 1D pieces take precomputed spectra so that one step shares transforms.
# ``fu``/``fub`` are raw DFTs of u and conj(u), ``u2`` = u*u with DFT ``fu2``.


def _j1_1d_parts(u, fub, u2, fu2, grid: TorusGrid, tau: float):
    """J1 split into a physical part and a raw-DFT part (sum is J1)."""
    dinv = inv_derivative_multiplier(grid, 0)
    fwd = axis_propagator(grid, tau, 0)
    back = np.conj(fwd)  # exp(-i tau d_x^2)
    a = sfft.ifft(back * dinv * fub)
    c = sfft.ifft(dinv * fub)
    b = sfft.ifft(fwd * fu2)
    hat = 0.5j * dinv * (back * sfft.fft(a * b) - sfft.fft(c * u2))
    n = grid.n
    ub0 = fub[0] / n
    phys = tau * ub0 * u2 + tau * np.mean((u.real**2 + u.imag**2) * u) - tau * ub0 * fu2[0] / n
    return phys, hat


def _j2_1d_fast(u, fu, grid: TorusGrid, tau: float) -> np.ndarray:
    dinv = inv_derivative_multiplier(grid, 0)
    fwd = axis_propagator(grid, tau, 0)
    d_tw = sfft.ifft(dinv * fwd * fu)  # d_x^-1 exp(i tau d_x^2) u
    d_u = sfft.ifft(dinv * fu)
    osc = sfft.ifft(np.conj(fwd) * sfft.fft(d_tw * d_tw))
    u0 = fu[0] / grid.n
    ub = np.conj(u)
    return 0.5j * (osc - d_u * d_u) * ub + tau * u0 * (2 * u - u0) * ub


def _j1_1d(v: np.ndarray, grid: TorusGrid, tau: float) -> np.ndarray:
    u2 = v * v
    phys, hat = _j1_1d_parts(v, sfft.fft(np.conj(v)), u2, sfft.fft(u2), grid, tau)
    return phys + sfft.ifft(hat)


def _j2_1d(v: np.ndarray, grid: TorusGrid, tau: float) -> np.ndarray:
    return _j2_1d_fast(v, sfft.fft(v), grid, tau)


def _kj(w: np.ndarray, v: np.ndarray, grid: TorusGrid, tau: float, axis: int) -> np.ndarray:
    dinv = inv_derivative_multiplier(grid, axis)
    prop = axis_propagator(grid, tau, axis)
    fw = sfft.fft(w, axis=axis)
    fv = fw if v is w else sfft.fft(v, axis=axis)
    dw = sfft.ifft(dinv * fw, axis=axis)
    pw = sfft.ifft(prop * dinv * fw, axis=axis)
    if v is w:
        dv, pv = dw, pw
    else:
        dv = sfft.ifft(dinv * fv, axis=axis)
        pv = sfft.ifft(prop * dinv * fv, axis=axis)
    osc = sfft.ifft(np.conj(prop) * sfft.fft(pw * pv, axis=axis), axis=axis)
    w0 = np.mean(w, axis=axis, keepdims=True)
    v0 = w0 if v is w else np.mean(v, axis=axis, keepdims=True)
    return 0.5j * (osc - dw * dv) + tau * (v * w0 + w * v0 - w0 * v0)


def j1_1d(v: Field, tau: float) -> Field:
    """First resonance-split Duhamel integral in one dimension.

    Integrates the kernel ``exp(2 i s k1 k)`` exactly, ``k1`` being the
    wavenumber of the conjugated factor and ``k`` the output wavenumber.
    """
    _require_1d(v.grid)
    return from_physical(_j1_1d(to_physical(v), v.grid, float(tau)), v.grid)


def j2_1d(v: Field, tau: float) -> Field:
    """Second resonance-split Duhamel integral in one dimension (kernel
    ``exp(2 i s k2 k3)`` over the two unconjugated factors)."""
    _require_1d(v.grid)
    return from_physical(_j2_1d(to_physical(v), v.grid, float(tau)), v.grid)


def kj(w: Field, v: Field, tau: float, axis: int = 0) -> Field:
    """Bilinear integral with kernel ``exp(2 i s kappa_j lambda_j)`` along
    ``axis``; symmetric in ``(w, v)``."""
    if w.grid != v.grid:
        raise ValueError("fields live on different grids")
    w.grid.check_axis(axis)
    out = _kj(to_physical(w), to_physical(v), w.grid, float(tau), axis)
    return from_physical(out, w.grid)


# -- one-step maps ------------------------------------------------------------


def _step_lowreg_1d(u: np.ndarray, grid: TorusGrid, tau: float, mu: float) -> np.ndarray:
    fu = sfft.fft(u)
    u2 = u * u
    j1_phys, j1_hat = _j1_1d_parts(u, conj_spectrum(fu), u2, sfft.fft(u2), grid, tau)
    j2 = _j2_1d_fast(u, fu, grid, tau)
    inner = cis(mu * tau * (u.real**2 + u.imag**2)) * u - 1j * mu * (j1_phys + j2)
    return sfft.ifft(propagator(grid, tau) * (sfft.fft(inner) - 1j * mu * j1_hat))


def _step_lowreg_dd(
    u: np.ndarray, grid: TorusGrid, tau: float, mu: float, phi1_on: str = "conjugate"
) -> np.ndarray:
    d = grid.dim
    ub = np.conj(u)
    mod2 = u.real**2 + u.imag**2
    cubic = mod2 * u
    inner = cis(mu * tau * mod2) * u + 1j * mu * tau * (3 * d - 1) * cubic
    if phi1_on == "conjugate":
        # the kernel exp(2is kappa.kappa) carries the wavenumber of the
        # conjugated factor, so phi_1 acts on conj(u) before the product
        quad = apply_multiplier(ub, phi1_multiplier(grid, tau)) * u * u
    elif phi1_on == "cubic":
        quad = apply_multiplier(cubic, phi1_multiplier(grid, tau))
    else:
        raise ValueError(f"phi1_on must be 'conjugate' or 'cubic', got {phi1_on!r}")
    inner -= 1j * mu * tau * quad
    for j in range(d):
        inner -= 1j * mu * (_kj(u, u, grid, tau, j) * ub + 2 * _kj(ub, u, grid, tau, j) * u)
    return apply_multiplier(inner, propagator(grid, tau))


def step_lowreg_1d(u: Field, p: SchemeParams) -> Field:
    """One step of the one-dimensional second-order Fourier integrator."""
    p.check(u.grid, Method.LOWREG_1D)
    out = _step_lowreg_1d(to_physical(u), u.grid, p.tau, p.mu)
    return from_physical(out, u.grid)


def step_lowreg_dd(u: Field, p: SchemeParams, phi1_on: str = "conjugate") -> Field:
    """One step of the d-dimensional Fourier integrator (any d >= 1).

    Parameters
    ----------
    u : Field
        Current approximation.
    p : SchemeParams
        Must select ``Method.LOWREG_DD``.
    phi1_on : {"conjugate", "cubic"}
        Where the ``tau*phi_1(-2i tau Laplacian)`` term acts.  The default
        applies it to ``conj(u)`` and multiplies by ``u**2``, which is the
        exact integral of the ``exp(2is kappa.kappa)`` kernel and keeps the
        local error at O(tau^3) for smooth data.  ``"cubic"`` applies it to
        ``|u|^2 u`` instead; that variant is only locally second order and
        is kept for comparison.
    """
    p.check(u.grid, Method.LOWREG_DD)
    out = _step_lowreg_dd(to_physical(u), u.grid, p.tau, p.mu, phi1_on)
    return from_physical(out, u.grid)
