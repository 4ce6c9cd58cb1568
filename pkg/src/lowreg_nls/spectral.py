"""Discrete torus, Fourier transforms and Fourier-multiplier operators.

Fields on the torus ``[0, 2*pi)^d`` are stored as mean-integral Fourier
coefficients

    v_k = (2*pi)^-d * integral of exp(-i k.x) v(x) dx,

so that the physical values are ``v(x_j) = sum_k v_k exp(i k.x_j)``.  On the
grid this is the raw DFT divided by ``N^d``.  Coefficient arrays use the FFT
ordering, wavenumbers ``0, 1, ..., N/2-1, -N/2, ..., -1`` along every axis.
The Nyquist mode ``-N/2`` is kept and treated like every other wavenumber.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft

__all__ = [
    "TorusGrid",
    "Field",
    "NormKind",
    "to_physical",
    "from_physical",
    "free_propagate",
    "inv_derivative",
    "derivative",
    "phi1",
    "phi1_apply",
    "cis",
    "zero_mode_slice",
    "norm",
]

PHI1_SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class TorusGrid:
    """Equidistant tensor grid on the d-dimensional torus.

    Parameters
    ----------
    dim : int
        Space dimension d >= 1.
    n : int
        Even number of grid points per axis.
    """

    dim: int
    n: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ValueError(f"points per axis must be an even integer >= 2, got {self.n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def h(self) -> float:
        """Mesh width 2*pi/N."""
        return 2 * np.pi / self.n

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers of one axis in FFT order."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(np.int64)
        k.setflags(write=False)
        return k

    @cached_property
    def points(self) -> np.ndarray:
        """Grid points x_j = j*h of one axis."""
        x = self.h * np.arange(self.n)
        x.setflags(write=False)
        return x

    def k_axis(self, axis: int) -> np.ndarray:
        """Wavenumbers along ``axis``, shaped to broadcast against a field."""
        self.check_axis(axis)
        shape = [1] * self.dim
        shape[axis] = self.n
        return self.wavenumbers.reshape(shape)

    @cached_property
    def ksq(self) -> np.ndarray:
        """|k|^2 over the full wavenumber lattice."""
        out = np.zeros(self.shape)
        for j in range(self.dim):
            out = out + self.k_axis(j).astype(float) ** 2
        out.setflags(write=False)
        return out

    @cached_property
    def kabs(self) -> np.ndarray:
        out = np.sqrt(self.ksq)
        out.setflags(write=False)
        return out

    def mesh(self) -> list[np.ndarray]:
        """Physical coordinates, one broadcastable array per axis."""
        return [
            self.points.reshape([self.n if j == i else 1 for j in range(self.dim)])
            for i in range(self.dim)
        ]

    def check_axis(self, axis: int) -> None:
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for a {self.dim}-dimensional grid")

    def index_of(self, k) -> tuple[int, ...]:
        """Array index of the wavenumber (multi-)index ``k``."""
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        if k.shape != (self.dim,):
            raise ValueError(f"wavenumber {tuple(k)} does not match dimension {self.dim}")
        if np.any(k < -self.n // 2) or np.any(k >= self.n // 2):
            raise ValueError(f"wavenumber {tuple(k)} outside the lattice of N={self.n}")
        return tuple(int(kj) % self.n for kj in k)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex field on a :class:`TorusGrid`, held as Fourier coefficients.

    The coefficient array is read-only; every operation returns a new field.
    """

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict) -> "Field":
        """Build a field from ``{wavenumber: coefficient}``.

        In 1D the keys may be plain integers.
        """
        c = np.zeros(grid.shape, dtype=complex)
        for k, val in modes.items():
            c[grid.index_of(k)] += val
        return cls(grid, c)

    @classmethod
    def from_values(cls, grid: TorusGrid, values) -> "Field":
        return from_physical(values, grid)

    def values(self) -> np.ndarray:
        return to_physical(self)

    def coefficient(self, k) -> complex:
        return complex(self.coeffs[self.grid.index_of(k)])

    def conj(self) -> "Field":
        return from_physical(np.conj(self.values()), self.grid)

    def _check(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            # pointwise product on the collocation points
            self._check(scalar)
            return from_physical(self.values() * scalar.values(), self.grid)
        if np.isscalar(scalar):
            return Field(self.grid, self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.coeffs)

    def __repr__(self):
        return f"Field(dim={self.grid.dim}, n={self.grid.n})"


@dataclass(frozen=True)
class NormKind:
    """Norm selector: ``"l2"`` and ``"h1"`` are the grid norms, ``"sobolev"``
    is the coefficient-space H^r norm with exponent ``r``."""

    kind: str
    r: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l2", "h1", "sobolev"):
            raise ValueError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def l2(cls) -> "NormKind":
        return cls("l2")

    @classmethod
    def h1(cls) -> "NormKind":
        return cls("h1")

    @classmethod
    def sobolev(cls, r: float) -> "NormKind":
        return cls("sobolev", float(r))

    @classmethod
    def parse(cls, text: str) -> "NormKind":
        """Parse ``l2``, ``h1`` or ``sobolev:<r>`` (also ``hr:<r>``)."""
        t = text.strip().lower()
        if t in ("l2", "h1"):
            return cls(t)
        name, _, r = t.partition(":")
        if name in ("sobolev", "hr") and r:
            return cls.sobolev(float(r))
        raise ValueError(f"cannot parse norm {text!r}; use l2, h1 or sobolev:<r>")

    def __str__(self):
        return f"sobolev:{self.r:g}" if self.kind == "sobolev" else self.kind


# -- transforms ---------------------------------------------------------------


def fwd(values: np.ndarray, axes=None) -> np.ndarray:
    """Raw DFT over ``axes`` (all axes by default)."""
    return sfft.fftn(values, axes=axes)


def inv(coeffs: np.ndarray, axes=None) -> np.ndarray:
    return sfft.ifftn(coeffs, axes=axes)


def apply_multiplier(values: np.ndarray, mult: np.ndarray, axis: int | None = None) -> np.ndarray:
    """Apply a Fourier multiplier to physical values.

    With ``axis`` given, ``mult`` must depend on that axis only and the
    transform is taken along it alone.
    """
    if axis is None:
        return sfft.ifftn(mult * sfft.fftn(values))
    return sfft.ifft(mult * sfft.fft(values, axis=axis), axis=axis)


def to_physical(f: Field) -> np.ndarray:
    """Values of ``f`` at the grid points."""
    return sfft.ifftn(f.coeffs, norm="forward")


def from_physical(values, grid: TorusGrid) -> Field:
    """Mean-integral Fourier coefficients of grid values (raw DFT / N^d)."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"array of shape {values.shape} does not match grid {grid.shape}")
    return Field(grid, sfft.fftn(values, norm="forward"))


# -- multipliers --------------------------------------------------------------


@lru_cache(maxsize=64)
def propagator(grid: TorusGrid, t: float) -> np.ndarray:
    """Multiplier of exp(i t Laplacian): exp(-i t |k|^2)."""
    m = np.exp(-1j * t * grid.ksq)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def axis_propagator(grid: TorusGrid, t: float, axis: int) -> np.ndarray:
    """Multiplier of exp(i t d_j^2) along one axis."""
    m = np.exp(-1j * t * grid.k_axis(axis).astype(float) ** 2)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=16)
def inv_derivative_multiplier(grid: TorusGrid, axis: int) -> np.ndarray:
    k = grid.k_axis(axis).astype(float)
    m = np.zeros(k.shape, dtype=complex)
    nz = k != 0
    m[nz] = 1.0 / (1j * k[nz])
    m.setflags(write=False)
    return m


def cis(theta: np.ndarray) -> np.ndarray:
    """exp(i theta) for real theta."""
    out = np.empty(np.shape(theta), dtype=complex)
    out.real = np.cos(theta)
    out.imag = np.sin(theta)
    return out


def conj_spectrum(c: np.ndarray, axes=None) -> np.ndarray:
    """Transform of the conjugate field from the transform ``c`` of a field:
    ``conj(c[-k mod N])`` along ``axes`` (all by default)."""
    axes = tuple(range(c.ndim)) if axes is None else axes
    return np.conj(np.roll(np.flip(c, axes), 1, axes))


def phi1(z) -> np.ndarray:
    """phi_1(z) = (exp(z) - 1)/z, with a Taylor series near z = 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < PHI1_SERIES_THRESHOLD
    zs = z[small]
    out[small] = 1 + zs / 2 + zs**2 / 6 + zs**3 / 24
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


@lru_cache(maxsize=64)
def phi1_multiplier(grid: TorusGrid, tau: float) -> np.ndarray:
    # -2i tau Laplacian acts as +2i tau |k|^2 on mode k
    m = phi1(2j * tau * grid.ksq)
    m.setflags(write=False)
    return m


# -- operators on fields ------------------------------------------------------


def free_propagate(f: Field, t: float) -> Field:
    """Free Schroedinger flow exp(i t Laplacian) f."""
    return Field(f.grid, f.coeffs * propagator(f.grid, float(t)))


def inv_derivative(f: Field, axis: int = 0) -> Field:
    """Regularised inverse derivative: 1/(i k_axis), zero where k_axis = 0."""
    f.grid.check_axis(axis)
    return Field(f.grid, f.coeffs * inv_derivative_multiplier(f.grid, axis))


def derivative(f: Field, axis: int = 0) -> Field:
    """Spectral derivative along ``axis`` (multiplier i k_axis)."""
    f.grid.check_axis(axis)
    return Field(f.grid, f.coeffs * (1j * f.grid.k_axis(axis)))


def phi1_apply(f: Field, tau: float) -> Field:
    """phi_1(-2 i tau Laplacian) f."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    return Field(f.grid, f.coeffs * phi1_multiplier(f.grid, float(tau)))


def zero_mode_slice(f: Field, axis: int = 0) -> Field:
    """Zeroth coefficient of the partial Fourier transform along ``axis``.

    The result keeps only the modes with ``k_axis = 0`` and is therefore
    constant along that axis.
    """
    f.grid.check_axis(axis)
    keep = f.grid.k_axis(axis) == 0
    return Field(f.grid, np.where(keep, f.coeffs, 0))


def grid_norm_l2(values: np.ndarray, h: float, dim: int) -> float:
    return math.sqrt(h**dim * float(np.sum(np.abs(values) ** 2)))


def norm(f: Field, kind: NormKind | str = NormKind("l2")) -> float:
    """Discrete L2, discrete H1 or Sobolev H^r norm of ``f``.

    The grid norms use ``h^d * sum_j |U_j|^2``; H1 adds the spectrally
    differentiated field for every axis.  The Sobolev norm is
    ``sum_k (1+|k|)^(2r) |v_k|^2`` over the mean-integral coefficients.
    """
    if isinstance(kind, str):
        kind = NormKind.parse(kind)
    g = f.grid
    if kind.kind == "sobolev":
        w = (1.0 + g.kabs) ** (2 * kind.r)
        return math.sqrt(float(np.sum(w * np.abs(f.coeffs) ** 2)))
    sq = g.h**g.dim * float(np.sum(np.abs(f.values()) ** 2))
    if kind.kind == "h1":
        for j in range(g.dim):
            dv = to_physical(derivative(f, j))
            sq += g.h**g.dim * float(np.sum(np.abs(dv) ** 2))
    return math.sqrt(sq)
