import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowreg_nls import (
    Field,
    Method,
    SchemeParams,
    TorusGrid,
    duhamel_integral_direct,
    free_propagate,
    j1_1d,
    j2_1d,
    kj,
    kj_direct,
    norm,
    plane_wave,
    random_hr_data,
    step_lowreg_1d,
    step_lowreg_dd,
)
from lowreg_nls.baselines import integrate, step
from lowreg_nls.integrators import _step_lowreg_1d, _step_lowreg_dd
from lowreg_nls.oracles import alias_free_random
from lowreg_nls.spectral import from_physical, phi1_apply, to_physical

seeds = st.integers(0, 2**31 - 1)
taus = st.floats(1e-3, 2.0)


def maxdev(a: Field, b: Field) -> float:
    return float(np.max(np.abs(a.coeffs - b.coeffs)))


def const(grid, c):
    return Field.from_modes(grid, {(0,) * grid.dim: c})


def slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


class TestParams:
    def test_tau_positive(self):
        with pytest.raises(ValueError):
            SchemeParams(0.0)
        with pytest.raises(ValueError):
            SchemeParams(-0.1)

    def test_method_parse(self):
        assert SchemeParams(0.1, method="Strang").method is Method.STRANG
        with pytest.raises(ValueError):
            Method.parse("rk4")

    def test_lowreg1d_needs_1d(self):
        u = const(TorusGrid(2, 8), 1.0)
        with pytest.raises(ValueError):
            step(u, SchemeParams(0.1, method="lowreg1d"))
        with pytest.raises(ValueError):
            j1_1d(u, 0.1)
        with pytest.raises(ValueError):
            j2_1d(u, 0.1)

    def test_method_mismatch(self):
        u = const(TorusGrid(1, 8), 1.0)
        with pytest.raises(ValueError):
            step_lowreg_dd(u, SchemeParams(0.1, method="strang"))
        with pytest.raises(ValueError):
            step_lowreg_dd(u, SchemeParams(0.1, method="lowregdd"), phi1_on="both")


class TestClosedForms:
    g = TorusGrid(1, 16)

    @pytest.mark.parametrize("fn", [j1_1d, j2_1d])
    def test_zero(self, fn):
        assert np.all(fn(Field.zeros(self.g), 0.3).coeffs == 0)

    @pytest.mark.parametrize("fn", [j1_1d, j2_1d])
    def test_constant(self, fn):
        c, tau = 0.7 - 0.4j, 0.3
        out = fn(const(self.g, c), tau)
        assert maxdev(out, const(self.g, tau * abs(c) ** 2 * c)) <= 1e-15

    def test_single_mode(self):
        tau = 0.37
        e1 = Field.from_modes(self.g, {1: 1.0})
        a = j1_1d(e1, tau).coefficient(1)
        b = j2_1d(e1, tau).coefficient(1)
        assert a == pytest.approx((1 - np.exp(-2j * tau)) / 2j, abs=1e-15)
        assert b == pytest.approx((np.exp(2j * tau) - 1) / 2j, abs=1e-15)
        assert maxdev(j1_1d(e1, tau), duhamel_integral_direct(e1, tau, "j1")) <= 1e-13
        assert maxdev(j2_1d(e1, tau), duhamel_integral_direct(e1, tau, "j2")) <= 1e-13

    def test_kj_constants(self):
        g = TorusGrid(2, 8)
        w, v = 1.5 + 1j, -0.5j
        assert maxdev(kj(const(g, w), const(g, v), 0.2, 1), const(g, 0.2 * w * v)) <= 1e-15

    def test_kj_single_mode(self):
        tau = 0.61
        e1 = Field.from_modes(self.g, {1: 1.0})
        out = kj(e1, e1, tau)
        assert out.coefficient(2) == pytest.approx((np.exp(2j * tau) - 1) / 2j, abs=1e-15)
        assert np.count_nonzero(np.abs(out.coeffs) > 1e-15) == 1

    @given(seeds, taus, st.sampled_from([(1, 16), (2, 8), (3, 4)]))
    def test_kj_symmetric(self, seed, tau, shape):
        g = TorusGrid(*shape)
        w, v = random_hr_data(g, 0, seed), random_hr_data(g, 0, seed + 1)
        for j in range(g.dim):
            assert maxdev(kj(w, v, tau, j), kj(v, w, tau, j)) <= 1e-13

    def test_kj_grid_mismatch(self):
        with pytest.raises(ValueError):
            kj(const(TorusGrid(1, 8), 1), const(TorusGrid(1, 16), 1), 0.1)


class TestOracleEquivalence:
    @settings(max_examples=15, deadline=None)
    @given(seeds, taus, st.sampled_from([8, 16, 32]))
    def test_j1_j2(self, seed, tau, n):
        v = alias_free_random(TorusGrid(1, n), seed)
        assert maxdev(j1_1d(v, tau), duhamel_integral_direct(v, tau, "j1")) <= 1e-12
        assert maxdev(j2_1d(v, tau), duhamel_integral_direct(v, tau, "j2")) <= 1e-12

    @settings(max_examples=15, deadline=None)
    @given(seeds, taus, st.sampled_from([(1, 8), (1, 16), (1, 32), (2, 6), (2, 8)]))
    def test_kj(self, seed, tau, shape):
        g = TorusGrid(*shape)
        v = alias_free_random(g, seed, degree=2)
        for j in range(g.dim):
            assert maxdev(kj(v, v, tau, j), kj_direct(v, v, tau, j)) <= 1e-12
            assert maxdev(kj(v.conj(), v, tau, j), kj_direct(v.conj(), v, tau, j)) <= 1e-12

    @settings(max_examples=10, deadline=None)
    @given(seeds, taus, st.sampled_from([(1, 16), (2, 8)]))
    def test_phi1_term(self, seed, tau, shape):
        v = alias_free_random(TorusGrid(*shape), seed)
        closed = v * v * (tau * phi1_apply(v.conj(), tau))
        assert maxdev(closed, duhamel_integral_direct(v, tau, "phi1")) <= 1e-12

    def test_aliasing_breaks_agreement(self):
        # full-band data wraps around in the products; the oracle does not
        v = random_hr_data(TorusGrid(1, 16), 0, 3)
        assert maxdev(j1_1d(v, 0.5), duhamel_integral_direct(v, 0.5, "j1")) > 1e-6


class TestSteps:
    @pytest.mark.parametrize("method", ["lowreg1d", "lowregdd", "strang"])
    def test_linear_limit(self, method):
        u = random_hr_data(TorusGrid(1, 64), 1, 0)
        out = step(u, SchemeParams(0.3, 0.0, method))
        assert maxdev(out, free_propagate(u, 0.3)) <= 1e-14

    @pytest.mark.parametrize("dim", [1, 2])
    def test_constant_one_step(self, dim):
        g = TorusGrid(dim, 8)
        c, tau, mu = 0.8 + 0.3j, 0.1, 1.3
        expect = np.exp(1j * mu * tau * abs(c) ** 2) * c - 2j * mu * tau * abs(c) ** 2 * c
        out = step_lowreg_dd(const(g, c), SchemeParams(tau, mu, "lowregdd"))
        assert maxdev(out, const(g, expect)) <= 1e-14
        if dim == 1:
            out = step_lowreg_1d(const(g, c), SchemeParams(tau, mu))
            assert maxdev(out, const(g, expect)) <= 1e-14

    def test_constant_third_order(self):
        g = TorusGrid(1, 4)
        c, mu = 1.0 + 0.5j, 1.0
        ts = 2.0 ** -np.arange(3, 8)
        errs = []
        for t in ts:
            exact = np.exp(-1j * mu * t * abs(c) ** 2) * c
            errs.append(abs(step_lowreg_1d(const(g, c), SchemeParams(t, mu)).coefficient(0) - exact))
        assert slope(ts, errs) == pytest.approx(3, abs=0.1)

    @pytest.mark.parametrize("method", ["lowreg1d", "lowregdd"])
    def test_plane_wave_local_order(self, method):
        g = TorusGrid(1, 16)
        a, k, mu = 1.0, 2, 1.0
        u0 = plane_wave(a, [k], mu, 0.0, g)
        ts = 2.0 ** -np.arange(3, 8)
        errs = [norm(step(u0, SchemeParams(t, mu, method)) - plane_wave(a, [k], mu, t, g)) for t in ts]
        assert slope(ts, errs) == pytest.approx(3, abs=0.2)

    @settings(max_examples=20, deadline=None)
    @given(seeds, st.floats(-np.pi, np.pi), st.sampled_from(["lowreg1d", "lowregdd", "strang"]))
    def test_gauge_equivariance(self, seed, theta, method):
        u = random_hr_data(TorusGrid(1, 32), 1, seed)
        p = SchemeParams(0.05, 1.0, method)
        rot = np.exp(1j * theta)
        assert maxdev(step(rot * u, p), rot * step(u, p)) <= 1e-13

    @settings(max_examples=20, deadline=None)
    @given(seeds, st.sampled_from([(1, 32, "lowreg1d"), (1, 32, "lowregdd"), (2, 8, "lowregdd"), (2, 8, "strang")]))
    def test_translation_equivariance(self, seed, case):
        dim, n, method = case
        g = TorusGrid(dim, n)
        u = random_hr_data(g, 1, seed)
        p = SchemeParams(0.05, 1.0, method)
        shift = lambda f: from_physical(np.roll(to_physical(f), 1, axis=0), g)  # noqa: E731
        assert maxdev(step(shift(u), p), shift(step(u, p))) <= 1e-12

    @pytest.mark.parametrize("method", ["lowreg1d", "lowregdd"])
    def test_consistency_with_free_flow(self, method):
        u = random_hr_data(TorusGrid(1, 64), 2, 4)
        ts = 2.0 ** -np.arange(4, 12)
        dev = [norm(step(u, SchemeParams(t, 1.0, method)) - free_propagate(u, t)) for t in ts]
        assert max(d / t for d, t in zip(dev, ts)) <= 1.05 * dev[-1] / ts[-1] + 1e-12
        assert slope(ts, dev) == pytest.approx(1, abs=0.05)

    def test_zero_step_is_identity(self):
        g1, g2 = TorusGrid(1, 32), TorusGrid(2, 8)
        u1 = to_physical(random_hr_data(g1, 1, 0))
        u2 = to_physical(random_hr_data(g2, 1, 0))
        # every integral vanishes and the phase factor is 1, up to roundoff
        assert np.max(np.abs(_step_lowreg_1d(u1, g1, 0.0, 1.0) - u1)) <= 1e-14
        assert np.max(np.abs(_step_lowreg_dd(u2, g2, 0.0, 1.0) - u2)) <= 1e-14

    def test_dd_bracket_from_oracles(self):
        # assemble the d-D step from independently oracle-checked pieces
        g = TorusGrid(2, 8)
        tau, mu = 0.3, 0.9
        u = 0.5 * alias_free_random(g, 11)
        ub = u.conj()
        cubic = u * u * ub
        bracket = from_physical(np.exp(1j * mu * tau * np.abs(u.values()) ** 2) * u.values(), g)
        bracket = bracket + 1j * mu * tau * (3 * g.dim - 1) * cubic
        bracket = bracket - 1j * mu * duhamel_integral_direct(u, tau, "phi1")
        for j in range(g.dim):
            bracket = bracket - 1j * mu * (kj_direct(u, u, tau, j) * ub + 2 * kj_direct(ub, u, tau, j) * u)
        expect = free_propagate(bracket, tau)
        out = step_lowreg_dd(u, SchemeParams(tau, mu, "lowregdd"))
        assert maxdev(out, expect) <= 1e-12


class TestLocalOrder:
    @staticmethod
    def one_step_errors(u0, method, ts, phi1_on="conjugate"):
        errs = []
        for t in ts:
            ref = integrate(u0, t, SchemeParams(t / 64, 1.0, "strang"))
            p = SchemeParams(t, 1.0, method)
            out = step_lowreg_dd(u0, p, phi1_on) if method == "lowregdd" else step(u0, p)
            errs.append(norm(out - ref))
        return errs

    @pytest.mark.parametrize("dim,n,method", [(1, 128, "lowreg1d"), (1, 128, "lowregdd"), (2, 32, "lowregdd")])
    def test_third_order(self, dim, n, method):
        u0 = random_hr_data(TorusGrid(dim, n), 6, 1)
        ts = 2.0 ** -np.arange(4, 9)
        assert slope(ts, self.one_step_errors(u0, method, ts)) == pytest.approx(3, abs=0.3)

    def test_literal_phi1_placement_is_second_order(self):
        u0 = random_hr_data(TorusGrid(1, 128), 6, 1)
        ts = 2.0 ** -np.arange(4, 9)
        assert slope(ts, self.one_step_errors(u0, "lowregdd", ts, "cubic")) == pytest.approx(2, abs=0.3)

    def test_two_schemes_agree_in_1d(self):
        u0 = random_hr_data(TorusGrid(1, 128), 6, 2)
        ts = 2.0 ** -np.arange(4, 9)
        dev = [norm(step(u0, SchemeParams(t, 1.0, "lowreg1d")) - step(u0, SchemeParams(t, 1.0, "lowregdd"))) for t in ts]
        assert slope(ts, dev) >= 2.7
