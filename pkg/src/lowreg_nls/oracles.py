"""Brute-force Fourier-sum evaluation of the Duhamel integrals.

These oracles sum over every wavenumber triple (or pair) of the lattice and
integrate each oscillatory factor ``exp(i s theta)`` over ``[0, tau]`` in
closed form.  Output wavenumbers ``kappa + lambda + nu`` are taken in Z^d,
not modulo N: contributions that leave the lattice are dropped.  The FFT
closed forms therefore agree with the oracles exactly when the input is
band-limited so that no product aliases (see :func:`alias_free_random`).

Cost is O(N^(3d)); grids above :data:`ORACLE_CAP` are rejected.
"""
from __future__ import annotations

import numpy as np

from .spectral import Field, TorusGrid

__all__ = [
    "ORACLE_CAP",
    "KERNELS",
    "duhamel_integral_direct",
    "kj_direct",
    "alias_free_random",
    "oracle_deviations",
]

ORACLE_CAP = {1: 32, 2: 8}

KERNELS = ("full", "j1", "j2", "ones", "remainder", "phi1")


def _check_cap(grid: TorusGrid, max_n: int | None) -> None:
    cap = ORACLE_CAP.get(grid.dim, 0) if max_n is None else max_n
    if grid.n > cap:
        raise ValueError(
            f"direct oracle on N={grid.n}, d={grid.dim} exceeds the cap N <= {cap}"
        )


def _lattice(grid: TorusGrid) -> np.ndarray:
    """All wavenumber vectors, shape (N^d, d), in the FFT layout order."""
    ks = np.meshgrid(*([grid.wavenumbers] * grid.dim), indexing="ij")
    return np.stack([k.ravel() for k in ks], axis=-1)


def _flat_index(grid: TorusGrid, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat FFT-layout index of integer vectors ``k`` and an in-lattice mask."""
    half = grid.n // 2
    inside = np.all((k >= -half) & (k < half), axis=-1)
    idx = np.zeros(k.shape[:-1], dtype=np.int64)
    for j in range(grid.dim):
        idx = idx * grid.n + np.mod(k[..., j], grid.n)
    return idx, inside


def _conj_coeffs(c: np.ndarray) -> np.ndarray:
    """Coefficients of the conjugate field: conj(c[-k mod N])."""
    axes = tuple(range(c.ndim))
    return np.conj(np.roll(np.flip(c, axes), 1, axes))


def _time_integral(theta: np.ndarray, tau: float) -> np.ndarray:
    """integral_0^tau exp(i s theta) ds for integer-valued theta."""
    out = np.full(theta.shape, tau, dtype=complex)
    nz = theta != 0
    th = theta[nz].astype(float)
    out[nz] = np.expm1(1j * tau * th) / (1j * th)
    return out


def _scatter(grid: TorusGrid, k: np.ndarray, weights: np.ndarray) -> Field:
    idx, inside = _flat_index(grid, k)
    idx, w = idx[inside], weights[inside]
    m = grid.size
    c = np.bincount(idx, w.real, minlength=m) + 1j * np.bincount(idx, w.imag, minlength=m)
    return Field(grid, c.reshape(grid.shape))


def duhamel_integral_direct(
    v: Field, tau: float, kernel: str = "full", max_n: int | None = None
) -> Field:
    """Triple Fourier sum of the first Duhamel integral of the cubic term.

    Evaluates ``sum conj(v)_kappa v_lambda v_nu exp(i k.x) * I`` with
    ``k = kappa + lambda + nu`` and ``I = integral_0^tau K(s) ds`` for the
    selected kernel ``K``:

    ``full``
        ``exp(i s Omega)``, ``Omega = |k|^2 + |kappa|^2 - |lambda|^2 - |nu|^2``
    ``j1``
        ``exp(2 i s kappa.k)``
    ``j2``
        ``exp(2 i s lambda.nu)``
    ``ones``
        ``1`` (gives ``tau |v|^2 v``)
    ``remainder``
        ``(exp(2 i s kappa.k) - 1)(exp(2 i s lambda.nu) - 1)``
    ``phi1``
        ``exp(2 i s kappa.kappa)``

    ``full = j1 + j2 - ones + remainder`` holds term by term.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {', '.join(KERNELS)}")
    grid = v.grid
    _check_cap(grid, max_n)
    lat = _lattice(grid)
    vhat = v.coeffs.ravel()
    vbar = _conj_coeffs(v.coeffs).ravel()
    m = grid.size
    ka = lat.reshape(m, 1, 1, -1)
    la = lat.reshape(1, m, 1, -1)
    na = lat.reshape(1, 1, m, -1)
    k = ka + la + na
    dot = lambda a, b: np.sum(a * b, axis=-1)  # noqa: E731

    if kernel == "full":
        integral = _time_integral(dot(k, k) + dot(ka, ka) - dot(la, la) - dot(na, na), tau)
    elif kernel == "j1":
        integral = _time_integral(2 * dot(ka, k), tau)
    elif kernel == "j2":
        integral = _time_integral(2 * dot(la, na), tau)
    elif kernel == "ones":
        integral = np.full((m, m, m), tau, dtype=complex)
    elif kernel == "phi1":
        integral = np.broadcast_to(_time_integral(2 * dot(ka, ka), tau), (m, m, m))
    else:
        a = 2 * dot(ka, k)
        b = 2 * dot(la, na)
        integral = (
            _time_integral(a + b, tau) - _time_integral(a, tau) - _time_integral(b, tau) + tau
        )

    amp = vbar.reshape(m, 1, 1) * vhat.reshape(1, m, 1) * vhat.reshape(1, 1, m)
    return _scatter(grid, k, amp * integral)


def kj_direct(w: Field, v: Field, tau: float, axis: int = 0, max_n: int | None = None) -> Field:
    """Double Fourier sum ``sum w_kappa v_lambda exp(i(kappa+lambda).x)
    integral_0^tau exp(2 i s kappa_j lambda_j) ds``."""
    if w.grid != v.grid:
        raise ValueError("fields live on different grids")
    grid = w.grid
    grid.check_axis(axis)
    _check_cap(grid, max_n)
    lat = _lattice(grid)
    m = grid.size
    ka = lat.reshape(m, 1, -1)
    la = lat.reshape(1, m, -1)
    integral = _time_integral(2 * ka[..., axis] * la[..., axis], tau)
    amp = w.coeffs.reshape(m, 1) * v.coeffs.reshape(1, m)
    return _scatter(grid, ka + la, amp * integral)


def alias_free_random(grid: TorusGrid, seed: int, degree: int = 3) -> Field:
    """Random coefficients supported on ``max_j |k_j| <= (N/2 - 1) // degree``.

    Products of ``degree`` such fields stay inside the lattice, so the
    pointwise collocation products are exact.
    """
    from .experiments import uniform_coefficients

    band = (grid.n // 2 - 1) // degree
    if band < 1:
        raise ValueError(f"N={grid.n} leaves no alias-free modes for degree {degree}")
    keep = np.ones(grid.shape, dtype=bool)
    for j in range(grid.dim):
        keep &= np.abs(grid.k_axis(j)) <= band
    return Field(grid, np.where(keep, uniform_coefficients(grid, seed), 0))


def oracle_deviations(grid: TorusGrid, seed: int, tau: float = 0.1) -> dict[str, float]:
    """Max coefficient deviation of every FFT closed form from its oracle.

    Data is alias-free random (see :func:`alias_free_random`).  In 1D the
    two cubic integrals are checked; in every dimension the phi_1 term and
    both pairings of the bilinear integral along each axis.
    """
    from .integrators import j1_1d, j2_1d, kj
    from .spectral import phi1_apply

    v3 = alias_free_random(grid, seed, degree=3)
    v2 = alias_free_random(grid, seed, degree=2)
    dev = lambda a, b: float(np.max(np.abs(a.coeffs - b.coeffs)))  # noqa: E731
    out = {}
    if grid.dim == 1:
        out["j1"] = dev(j1_1d(v3, tau), duhamel_integral_direct(v3, tau, "j1"))
        out["j2"] = dev(j2_1d(v3, tau), duhamel_integral_direct(v3, tau, "j2"))
    closed = v3 * v3 * (tau * phi1_apply(v3.conj(), tau))
    out["phi1"] = dev(closed, duhamel_integral_direct(v3, tau, "phi1"))
    for j in range(grid.dim):
        out[f"k{j}(v,v)"] = dev(kj(v2, v2, tau, j), kj_direct(v2, v2, tau, j))
        out[f"k{j}(conj v,v)"] = dev(kj(v2.conj(), v2, tau, j), kj_direct(v2.conj(), v2, tau, j))
    return out
