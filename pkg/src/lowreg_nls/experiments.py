"""Random rough initial data, conserved quantities, and convergence and
conservation studies."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .baselines import integrate, plane_wave, step_count
from .integrators import Method, SchemeParams
from .spectral import Field, NormKind, TorusGrid, derivative, from_physical, norm, to_physical

logger = logging.getLogger(__name__)

__all__ = [
    "uniform_coefficients",
    "random_hr_data",
    "energy",
    "mass",
    "OrderFit",
    "estimate_order",
    "ExperimentConfig",
    "ConvergenceResult",
    "ConservationSeries",
    "run_convergence_study",
    "run_convergence_studies",
    "run_full_error_study",
    "run_conservation_study",
    "reference_method",
]

ERROR_FLOOR = 1e-10


# -- initial data -------------------------------------------------------------


def _zigzag(k: np.ndarray) -> np.ndarray:
    return np.where(k >= 0, 2 * k, -2 * k - 1)


def coefficient_rank(grid: TorusGrid) -> np.ndarray:
    """Position of every wavenumber in the grid-independent draw order.

    Each wavenumber component is zig-zag encoded (0, -1, 1, -2, ... ->
    0, 1, 2, 3, ...); vectors are ordered by their largest code, then
    lexicographically.  The order on a coarse grid is a prefix of the order
    on any finer grid.
    """
    z = [_zigzag(np.broadcast_to(grid.k_axis(j), grid.shape)).ravel() for j in range(grid.dim)]
    shell = np.max(np.stack(z), axis=0)
    order = np.lexsort(tuple(reversed(z)) + (shell,))
    rank = np.empty(grid.size, dtype=np.int64)
    rank[order] = np.arange(grid.size)
    return rank.reshape(grid.shape)


def uniform_coefficients(grid: TorusGrid, seed: int) -> np.ndarray:
    """Complex coefficients with real and imaginary parts uniform on [-1, 1).

    The stream is Philox-4x64 keyed by ``seed``.  The coefficient of rank
    ``q`` (see :func:`coefficient_rank`) takes raw 64-bit outputs ``2q`` and
    ``2q + 1``, each mapped to ``2 * (w >> 11) * 2^-53 - 1``.  Data for a
    given seed is therefore identical across platforms, and a coarse grid
    sees the same coefficients as a fine one.
    """
    rank = coefficient_rank(grid)
    words = np.random.Philox(key=int(seed)).random_raw(2 * grid.size)
    unit = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    unit = 2.0 * unit - 1.0
    return unit[2 * rank] + 1j * unit[2 * rank + 1]


def random_hr_data(grid: TorusGrid, r: float, seed: int) -> Field:
    """Random field in H^r: uniform coefficients divided by (1+|k|)^(r+1/2)."""
    return Field(grid, uniform_coefficients(grid, seed) / (1.0 + grid.kabs) ** (r + 0.5))


# -- conserved quantities -----------------------------------------------------


def mass(u: Field) -> float:
    """(2 pi)^-d times the integral of |u|^2, by the grid Riemann sum."""
    return float(np.mean(np.abs(u.values()) ** 2))


def energy(u: Field, mu: float) -> float:
    """Hamiltonian (2 pi)^-d * integral(|grad u|^2 + mu/2 |u|^4) dx.

    The gradient is spectral; both terms use the grid Riemann sum.
    """
    grad2 = sum(np.abs(to_physical(derivative(u, j))) ** 2 for j in range(u.grid.dim))
    quartic = np.abs(u.values()) ** 4
    return float(np.mean(grad2) + 0.5 * mu * np.mean(quartic))


# -- order estimation ---------------------------------------------------------


@dataclass(frozen=True)
class OrderFit:
    """Least-squares slope of log(error) against log(tau)."""

    order: float
    intercept: float
    used: tuple[int, ...]
    tau_range: tuple[float, float] | None
    below_floor: tuple[int, ...]
    saturated: tuple[int, ...]
    r_squared: float
    reliable: bool

    @property
    def irregular(self) -> bool:
        """Log-log points scatter too far from a straight line."""
        return self.reliable and self.r_squared < 0.98


def estimate_order(points, floor: float = ERROR_FLOOR, min_slope: float = 0.2) -> OrderFit:
    """Fit a convergence order to ``(tau, error)`` pairs.

    Points with error below ``floor`` are discarded.  Once the error has
    started to decrease, a point marks saturation when neither it nor any
    smaller step size improves on its predecessor at a slope of at least
    ``min_slope``; it and all smaller step sizes are discarded.  Indices in
    the result refer to the input order.  The fit is marked unreliable
    below three surviving points.
    """
    pts = [(float(t), float(e)) for t, e in points]
    if len(pts) < 2:
        raise ValueError("need at least two (tau, error) points")
    order = sorted(range(len(pts)), key=lambda i: -pts[i][0])
    below = tuple(i for i in order if not (np.isfinite(pts[i][1]) and pts[i][1] >= floor))
    kept = [i for i in order if i not in below]

    def rate(a, b):
        (ta, ea), (tb, eb) = pts[a], pts[b]
        return math.log(ea / eb) / math.log(ta / tb)

    saturated: list[int] = []
    decreasing = False
    for p in range(1, len(kept)):
        a = kept[p - 1]
        # a plateau that the error later leaves is irregularity, not a floor
        if decreasing and all(rate(a, c) < min_slope for c in kept[p:]):
            saturated = kept[p:]
            break
        decreasing = decreasing or pts[kept[p]][1] < pts[a][1]
    used = [i for i in kept if i not in saturated]

    if len(used) < 2:
        return OrderFit(math.nan, math.nan, tuple(used), None, below, tuple(saturated), math.nan, False)
    x = np.log([pts[i][0] for i in used])
    y = np.log([pts[i][1] for i in used])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    taus = [pts[i][0] for i in used]
    return OrderFit(
        float(slope),
        float(intercept),
        tuple(used),
        (min(taus), max(taus)),
        below,
        tuple(saturated),
        r2,
        len(used) >= 3,
    )


# -- studies --------------------------------------------------------------------


def reference_method(method: Method, dim: int) -> Method:
    """The method whose fine-step solution serves as reference for ``method``."""
    if method is Method.STRANG:
        return Method.LOWREG_1D if dim == 1 else Method.LOWREG_DD
    return Method.STRANG


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a study.

    ``reference`` is ``"cross"`` (fine-step solution of the other method,
    step ``min(taus) / refinement``), ``"self"`` (fine-step solution of the
    same method) or ``"analytic"`` (plane-wave data only).  Without
    dealiasing the low-regularity schemes and Strang splitting converge to
    slightly different semi-discrete limits on rough data, so on coarse
    grids a cross reference puts a floor under the measured time error.

    ``data`` is ``"random"`` (H^r data from ``seed``) or ``"plane_wave"``
    (``amplitude * exp(i wavevector.x)``).
    """

    dim: int = 1
    n: int = 256
    r: float = 2.0
    seed: int = 0
    mu: float = 1.0
    T: float = 1.0
    taus: tuple[float, ...] = (2.0**-4, 2.0**-5, 2.0**-6)
    methods: tuple[Method, ...] = (Method.LOWREG_1D,)
    norm: NormKind = NormKind("l2")
    reference: str = "cross"
    refinement: int = 128
    data: str = "random"
    amplitude: complex = 1.0
    wavevector: tuple[int, ...] = (1,)
    stride: int = 1
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "methods", tuple(Method.parse(m) for m in self.methods))
        if isinstance(self.norm, str):
            object.__setattr__(self, "norm", NormKind.parse(self.norm))
        self.grid  # validates dim and n
        if not self.taus:
            raise ValueError("step-size ladder is empty")
        if any(b >= a for a, b in zip(self.taus, self.taus[1:])):
            raise ValueError(f"step-size ladder must be strictly decreasing: {self.taus}")
        for t in self.taus:
            step_count(self.T, t)
        if not self.methods:
            raise ValueError("no methods selected")
        if Method.LOWREG_1D in self.methods and self.dim != 1:
            raise ValueError(f"{Method.LOWREG_1D} requires dim = 1")
        if self.r < 0:
            raise ValueError(f"regularity must be non-negative, got {self.r}")
        if self.data not in ("random", "plane_wave"):
            raise ValueError(f"unknown data kind {self.data!r}")
        if self.reference not in ("cross", "self", "analytic"):
            raise ValueError(f"unknown reference policy {self.reference!r}")
        if self.reference == "analytic" and self.data != "plane_wave":
            raise ValueError("an analytic reference is only available for plane-wave data")
        if self.data == "plane_wave" and len(self.wavevector) != self.dim:
            raise ValueError(f"wavevector {self.wavevector} does not match dim = {self.dim}")
        if int(self.refinement) != self.refinement or self.refinement < 1:
            raise ValueError(f"refinement must be a positive integer, got {self.refinement}")
        if self.stride < 1 or self.workers < 1:
            raise ValueError("stride and workers must be positive")

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.dim, self.n)

    def initial_data(self, grid: TorusGrid | None = None) -> Field:
        grid = grid or self.grid
        if self.data == "plane_wave":
            return plane_wave(self.amplitude, self.wavevector, self.mu, 0.0, grid)
        return random_hr_data(grid, self.r, self.seed)

    def describe(self) -> dict:
        """Flat, deterministic description for run metadata."""
        return {
            "dim": self.dim,
            "n": self.n,
            "r": self.r,
            "seed": self.seed,
            "mu": self.mu,
            "T": self.T,
            "taus": " ".join(repr(t) for t in self.taus),
            "methods": ",".join(m.value for m in self.methods),
            "norm": str(self.norm),
            "reference": self.reference,
            "refinement": self.refinement,
            "data": self.data,
            "amplitude": repr(complex(self.amplitude)),
            "wavevector": ",".join(str(k) for k in self.wavevector),
        }


@dataclass
class ConvergenceResult:
    """Per-method error tables with fitted orders."""

    table: dict[Method, list[tuple[float, float]]]
    fits: dict[Method, OrderFit]
    reference: dict[Method, str] = field(default_factory=dict)

    def order(self, method) -> float:
        return self.fits[Method.parse(method)].order

    def hit_floor(self, method) -> bool:
        return bool(self.fits[Method.parse(method)].below_floor)

    def rows(self):
        """(method, tau, error, fitted order or nan when unreliable)."""
        for m, pts in self.table.items():
            fit = self.fits[m]
            order = fit.order if fit.reliable else math.nan
            for tau, err in pts:
                yield m.value, tau, err, order


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: fn(*j), jobs))


def _references(cfg: ExperimentConfig, u0: Field, t_ref: float) -> tuple[dict, dict]:
    grid = u0.grid
    if cfg.reference == "analytic":
        exact = plane_wave(cfg.amplitude, cfg.wavevector, cfg.mu, cfg.T, grid)
        return {m: exact for m in cfg.methods}, {m: "analytic plane wave" for m in cfg.methods}
    pick = (lambda m: m) if cfg.reference == "self" else (lambda m: reference_method(m, cfg.dim))
    needed = sorted({pick(m) for m in cfg.methods}, key=lambda m: m.value)
    sols = _map(lambda m: integrate(u0, cfg.T, SchemeParams(t_ref, cfg.mu, m)), [(m,) for m in needed], cfg.workers)
    by_method = dict(zip(needed, sols))
    refs = {m: by_method[pick(m)] for m in cfg.methods}
    desc = {m: f"{pick(m).value} tau={t_ref!r} N={grid.n}" for m in cfg.methods}
    return refs, desc


def run_convergence_study(cfg: ExperimentConfig) -> ConvergenceResult:
    """Global error at ``T`` for every method and step size of ``cfg``."""
    return run_convergence_studies(cfg, [cfg.norm])[cfg.norm]


def run_convergence_studies(cfg: ExperimentConfig, norms) -> dict[NormKind, ConvergenceResult]:
    """Like :func:`run_convergence_study`, measuring the same runs in several norms.

    The configured ``cfg.norm`` is ignored in favour of ``norms``.
    """
    norms = [NormKind.parse(k) if isinstance(k, str) else k for k in norms]
    u0 = cfg.initial_data()
    t_ref = min(cfg.taus) / cfg.refinement
    refs, desc = _references(cfg, u0, t_ref)

    def job(m, tau):
        diff = integrate(u0, cfg.T, SchemeParams(tau, cfg.mu, m)) - refs[m]
        errs = [norm(diff, k) for k in norms]
        logger.info("%s tau=%g errors=%s", m.value, tau, " ".join(f"{e:.3e}" for e in errs))
        return errs

    jobs = [(m, t) for m in cfg.methods for t in cfg.taus]
    errors = _map(job, jobs, cfg.workers)
    out = {}
    for i, k in enumerate(norms):
        table: dict[Method, list[tuple[float, float]]] = {m: [] for m in cfg.methods}
        for (m, t), e in zip(jobs, errors):
            table[m].append((t, e[i]))
        out[k] = ConvergenceResult(table, {m: estimate_order(p) for m, p in table.items()}, desc)
    return out


def prolong(u: Field, grid: TorusGrid) -> Field:
    """Embed ``u`` into a finer grid by zero-padding its coefficients."""
    if grid.dim != u.grid.dim or grid.n < u.grid.n:
        raise ValueError("target grid must have the same dimension and at least as many points")
    c = np.zeros(grid.shape, dtype=complex)
    k = u.grid.wavenumbers
    idx = np.ix_(*([np.mod(k, grid.n)] * grid.dim))
    c[idx] = u.coeffs
    return Field(grid, c)


def run_full_error_study(cfg: ExperimentConfig, ns) -> dict[int, ConvergenceResult]:
    """Space-time error for several resolutions against one reference.

    The reference (cross or self, see :class:`ExperimentConfig`) is solved
    on the finest grid with step
    ``min(taus) / refinement``.  Coarse-grid initial data is the truncation
    of the fine-grid data (same seed), and coarse solutions are compared
    after zero-padding onto the finest grid.
    """
    ns = sorted(int(n) for n in ns)
    fine = TorusGrid(cfg.dim, ns[-1])
    u0_fine = cfg.initial_data(fine)
    t_ref = min(cfg.taus) / cfg.refinement
    refs, desc = _references(cfg, u0_fine, t_ref)
    out = {}
    for n in ns:
        grid = TorusGrid(cfg.dim, n)
        u0 = cfg.initial_data(grid)

        def job(m, tau, u0=u0):
            u = integrate(u0, cfg.T, SchemeParams(tau, cfg.mu, m))
            return norm(prolong(u, fine) - refs[m], cfg.norm)

        jobs = [(m, t) for m in cfg.methods for t in cfg.taus]
        errors = _map(job, jobs, cfg.workers)
        table: dict[Method, list[tuple[float, float]]] = {m: [] for m in cfg.methods}
        for (m, t), e in zip(jobs, errors):
            table[m].append((t, e))
        out[n] = ConvergenceResult(table, {m: estimate_order(p) for m, p in table.items()}, desc)
    return out


@dataclass
class ConservationSeries:
    """Energy and mass along a trajectory, with drift statistics.

    Drift is measured relative to the initial value: ``(Q(t) - Q(0)) / |Q(0)|``.
    ``*_growth`` is its least-squares slope in t and ``*_correlation`` the
    Pearson correlation of drift with t (0 when the drift is constant).
    """

    times: np.ndarray
    energy: np.ndarray
    mass: np.ndarray

    @staticmethod
    def _drift(q: np.ndarray) -> np.ndarray:
        scale = abs(q[0]) if q[0] != 0 else 1.0
        return (q - q[0]) / scale

    def _line(self, q):
        d = self._drift(q)
        if len(d) < 2 or np.ptp(d) == 0:
            return 0.0, 0.0
        fit = stats.linregress(self.times, d)
        return float(fit.slope), float(fit.rvalue)

    @property
    def energy_max_drift(self) -> float:
        return float(np.max(np.abs(self._drift(self.energy))))

    @property
    def mass_max_drift(self) -> float:
        return float(np.max(np.abs(self._drift(self.mass))))

    @property
    def energy_growth(self) -> float:
        return self._line(self.energy)[0]

    @property
    def mass_growth(self) -> float:
        return self._line(self.mass)[0]

    @property
    def energy_correlation(self) -> float:
        return self._line(self.energy)[1]

    @property
    def mass_correlation(self) -> float:
        return self._line(self.mass)[1]


def run_conservation_study(cfg: ExperimentConfig) -> ConservationSeries:
    """Record energy and mass every ``cfg.stride`` steps up to ``cfg.T``."""
    if len(cfg.methods) != 1 or len(cfg.taus) != 1:
        raise ValueError("a conservation study takes exactly one method and one step size")
    u0 = cfg.initial_data()
    grid = u0.grid
    times, en, ms = [], [], []

    def record(i, t, values):
        u = from_physical(values, grid)
        times.append(t)
        en.append(energy(u, cfg.mu))
        ms.append(float(np.mean(np.abs(values) ** 2)))

    integrate(u0, cfg.T, SchemeParams(cfg.taus[0], cfg.mu, cfg.methods[0]), record, cfg.stride)
    return ConservationSeries(np.array(times), np.array(en), np.array(ms))
