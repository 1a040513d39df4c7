import math

import numpy as np
import pytest

from pistonlab import (
    GridFunction,
    GridMismatchError,
    OperatorConfig,
    ZeroInitialError,
    apply_ld,
    apply_lm,
    apply_mixture,
    commutator_norm,
    h1_norm,
    norm_history,
    quasi_nilpotency_estimate,
)

RESOLUTIONS = (65, 129, 257)


def grid(n):
    return np.linspace(0.0, 1.0, n)


def order_estimates(errors):
    return [np.log2(a / b) for a, b in zip(errors, errors[1:])]


class TestApplyLd:
    def test_zero_input(self):
        cfg = OperatorConfig(omega=1.0, n=33)
        out = apply_ld(cfg, GridFunction(np.zeros(33)))
        assert np.all(out.values == 0.0)

    def test_omega_zero_constant_is_exact(self):
        # The integrand is constant, so trapezoid quadrature is exact.
        for n in (17, 257):
            out = apply_ld(OperatorConfig(omega=0.0, n=n), GridFunction(np.ones(n)))
            np.testing.assert_array_equal(out.values, -grid(n))

    def test_ones_matches_minus_sine(self):
        errors = []
        for n in RESOLUTIONS:
            out = apply_ld(OperatorConfig(omega=1.0, n=n), GridFunction(np.ones(n)))
            errors.append(np.max(np.abs(out.values - (-np.sin(grid(n))))))
        assert errors[-1] <= 5e-6
        assert all(1.7 <= o <= 2.3 for o in order_estimates(errors))

    def test_s_squared_matches_closed_form(self):
        # integral_0^s cos(s - z) z^2 dz = 2s - 2 sin s
        errors = []
        for n in RESOLUTIONS:
            s = grid(n)
            out = apply_ld(OperatorConfig(omega=1.0, n=n), GridFunction(s * s))
            errors.append(np.max(np.abs(out.values - (-(2 * s - 2 * np.sin(s))))))
        assert errors[-1] <= 1e-5
        assert all(1.7 <= o <= 2.3 for o in order_estimates(errors))

    def test_output_starts_at_zero(self):
        rng = np.random.default_rng(7)
        eps = GridFunction(rng.normal(size=65))
        assert apply_ld(OperatorConfig(omega=2.0, n=65), eps).values[0] == 0.0

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            apply_ld(OperatorConfig(omega=1.0, n=65), GridFunction(np.ones(33)))


class TestApplyLm:
    def test_omega_zero_is_identity_bitwise(self):
        rng = np.random.default_rng(11)
        values = rng.normal(size=129)
        out = apply_lm(OperatorConfig(omega=0.0, n=129), GridFunction(values))
        np.testing.assert_array_equal(out.values, values)

    def test_ones_matches_cosine(self):
        errors = []
        for n in RESOLUTIONS:
            out = apply_lm(OperatorConfig(omega=1.0, n=n), GridFunction(np.ones(n)))
            errors.append(np.max(np.abs(out.values - np.cos(grid(n)))))
        assert errors[-1] <= 5e-6
        assert all(1.7 <= o <= 2.3 for o in order_estimates(errors))

    def test_zero_input(self):
        out = apply_lm(OperatorConfig(omega=3.0, n=33), GridFunction(np.zeros(33)))
        assert np.all(out.values == 0.0)


class TestLinearityAndCausality:
    def test_linearity(self):
        cfg = OperatorConfig(omega=1.5, n=97)
        rng = np.random.default_rng(3)
        e1, e2 = rng.normal(size=97), rng.normal(size=97)
        for op in (apply_ld, apply_lm):
            combined = op(cfg, GridFunction(2.5 * e1 - 1.25 * e2)).values
            separate = 2.5 * op(cfg, GridFunction(e1)).values - 1.25 * op(cfg, GridFunction(e2)).values
            np.testing.assert_allclose(combined, separate, rtol=1e-12, atol=1e-13)

    def test_causality(self):
        # Input vanishing on [0, s*] leaves the operators silent there.
        n = 101
        s = grid(n)
        cutoff = 40
        values = np.where(np.arange(n) > cutoff, (s - s[cutoff]) ** 2, 0.0)
        cfg = OperatorConfig(omega=2.0, n=n)
        assert np.all(apply_ld(cfg, GridFunction(values)).values[: cutoff + 1] == 0.0)
        lm_shift = apply_lm(cfg, GridFunction(values)).values - values
        assert np.all(lm_shift[: cutoff + 1] == 0.0)

    def test_small_omega_limits(self):
        n = 129
        rng = np.random.default_rng(5)
        values = rng.normal(size=n)
        eps = GridFunction(values)
        tiny = OperatorConfig(omega=1e-7, n=n)
        zero = OperatorConfig(omega=0.0, n=n)
        np.testing.assert_allclose(
            apply_ld(tiny, eps).values, apply_ld(zero, eps).values, atol=1e-12
        )
        np.testing.assert_allclose(apply_lm(tiny, eps).values, values, atol=1e-12)


class TestApplyMixture:
    def test_k_zero_returns_input(self):
        eps = GridFunction(grid(33) ** 2)
        out = apply_mixture(OperatorConfig(omega=1.0, n=33), 0.5, 0.5, eps, 0)
        assert len(out) == 1
        np.testing.assert_array_equal(out[0].values, eps.values)

    def test_identity_power(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=65)
        out = apply_mixture(OperatorConfig(omega=0.0, n=65), 1.0, 0.0, GridFunction(values), 3)
        assert len(out) == 4
        for entry in out:
            np.testing.assert_array_equal(entry.values, values)

    def test_pure_damping_scalar_multiple(self):
        n = 257
        s = grid(n)
        out = apply_mixture(OperatorConfig(omega=1.0, n=n), 0.0, 5.0, GridFunction(s * s), 1)
        np.testing.assert_allclose(out[1].values, -10 * (s - np.sin(s)), atol=5e-5)

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            apply_mixture(OperatorConfig(omega=1.0, n=33), 0.0, 1.0, GridFunction(np.ones(33)), -1)


class TestH1Norm:
    def test_zero(self):
        assert h1_norm(GridFunction(np.zeros(9))) == 0.0

    def test_constant_one(self):
        assert h1_norm(GridFunction(np.ones(33))) == pytest.approx(1.0, rel=1e-12)

    def test_s_squared(self):
        # sqrt(1/5 + 4/3), from integrals of s^4 and (2s)^2
        exact = np.sqrt(23.0 / 15.0)
        assert h1_norm(GridFunction(grid(257) ** 2)) == pytest.approx(exact, abs=1e-5)
        errors = [abs(h1_norm(GridFunction(grid(n) ** 2)) - exact) for n in RESOLUTIONS]
        assert all(1.7 <= o <= 2.3 for o in order_estimates(errors))

    def test_too_few_nodes(self):
        with pytest.raises(ValueError, match="n >= 3"):
            h1_norm(GridFunction(np.ones(2)))


class TestNormHistory:
    def test_entry_zero_is_one(self):
        hist = norm_history(OperatorConfig(1.0, 65), 0.3, 0.7, GridFunction(grid(65) ** 2), 0)
        assert hist.tolist() == [1.0]

    def test_damping_two_first_step(self):
        # 4 * sqrt(int (s - sin s)^2 + int (1 - cos s)^2) / sqrt(23/15) = 0.70813,
        # frozen from scipy.integrate.quad on the closed-form first iterate.
        hist = norm_history(OperatorConfig(1.0, 257), 0.0, 2.0, GridFunction(grid(257) ** 2), 1)
        assert hist[1] == pytest.approx(0.708125, abs=1e-3)

    def test_damping_five_first_step_grows(self):
        hist = norm_history(OperatorConfig(1.0, 257), 0.0, 5.0, GridFunction(grid(257) ** 2), 1)
        assert hist[1] == pytest.approx(1.770312, abs=2.5e-3)
        assert hist[1] > 1.0

    def test_zero_initial_error(self):
        with pytest.raises(ZeroInitialError, match="zero initial error"):
            norm_history(OperatorConfig(1.0, 33), 0.0, 2.0, GridFunction(np.zeros(33)), 2)

    def test_nonmonotone_for_large_damping_monotone_for_small(self):
        cfg = OperatorConfig(1.0, 257)
        eps0 = GridFunction(grid(257) ** 2)
        small = norm_history(cfg, 0.0, 2.0, eps0, 10)
        large = norm_history(cfg, 0.0, 5.0, eps0, 10)
        assert np.all(np.diff(small) < 0)
        assert np.any(np.diff(large) > 0)

    def test_power_homogeneity(self):
        # ||(c a Ld)^k e|| == c^k ||(a Ld)^k e|| up to rounding
        cfg = OperatorConfig(1.0, 129)
        eps0 = GridFunction(grid(129) ** 2)
        for c in (2.0, 10.0):
            for k in (3, 5):
                base = norm_history(cfg, 0.0, 0.7, eps0, k)[k]
                scaled = norm_history(cfg, 0.0, c * 0.7, eps0, k)[k]
                assert scaled == pytest.approx(c**k * base, rel=1e-10)


class TestCommutator:
    def test_zero_input(self):
        assert commutator_norm(OperatorConfig(1.0, 33), GridFunction(np.zeros(33))) == 0.0

    def test_omega_zero(self):
        rng = np.random.default_rng(2)
        value = commutator_norm(OperatorConfig(0.0, 65), GridFunction(rng.normal(size=65)))
        assert value <= 1e-13

    def test_quadrature_order_on_nonvanishing_profile(self):
        # The discrete kernels commute exactly except through the s=0 endpoint
        # weight, so the O(1/n^2) commutator shows on profiles with e(0) != 0.
        errors = [
            commutator_norm(OperatorConfig(1.0, n), GridFunction(1.0 + grid(n) ** 2))
            for n in RESOLUTIONS
        ]
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert all(1.7 <= o <= 2.3 for o in order_estimates(errors))

    def test_exact_commutation_on_vanishing_profile(self):
        # For e(0) = 0 the midpoint antisymmetry cancels every term exactly.
        for n in RESOLUTIONS:
            assert commutator_norm(OperatorConfig(1.0, n), GridFunction(grid(n) ** 2)) <= 1e-12


class TestQuasiNilpotency:
    def test_iterated_integrals_of_one(self):
        # At omega = 0, Ld^k 1 = (-1)^k s^k / k!.
        n = 257
        cfg = OperatorConfig(0.0, n)
        values = GridFunction(np.ones(n))
        current = values
        for k in range(1, 5):
            current = apply_ld(cfg, current)
            expected = (-1) ** k * grid(n) ** k / math.factorial(k)
            np.testing.assert_allclose(current.values, expected, atol=2e-6)

    def test_k_one_is_plain_ratio(self):
        cfg = OperatorConfig(1.0, 129)
        eps0 = GridFunction(grid(129) ** 2)
        r = quasi_nilpotency_estimate(cfg, eps0, 1)
        expected = h1_norm(apply_ld(cfg, eps0)) / h1_norm(eps0)
        assert r[0] == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("omega", [0.0, 1.0])
    @pytest.mark.parametrize("profile", ["ones", "s2"])
    def test_tail_decreases(self, omega, profile):
        n = 257
        values = np.ones(n) if profile == "ones" else grid(n) ** 2
        r = quasi_nilpotency_estimate(OperatorConfig(omega, n), GridFunction(values), 12)
        assert r[11] < r[5] < r[2]
        assert r[4] < r[1]

    def test_zero_initial_error(self):
        with pytest.raises(ZeroInitialError):
            quasi_nilpotency_estimate(OperatorConfig(1.0, 33), GridFunction(np.zeros(33)), 3)


class TestGridFunction:
    def test_csv_roundtrip(self, tmp_path):
        eps = GridFunction(np.linspace(-1.0, 2.0, 65) ** 3)
        path = tmp_path / "eps.csv"
        eps.to_csv(path)
        back = GridFunction.from_csv(path)
        np.testing.assert_array_equal(back.values, eps.values)

    def test_from_csv_rejects_nonuniform(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("s,value\n0.0,1.0\n0.3,1.0\n1.0,1.0\n")
        with pytest.raises(ValueError, match="uniform"):
            GridFunction.from_csv(path)

    def test_values_are_frozen(self):
        eps = GridFunction(np.ones(5))
        with pytest.raises(ValueError):
            eps.values[0] = 2.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            GridFunction(np.array([1.0, np.inf, 0.0]))

    def test_rejects_short(self):
        with pytest.raises(ValueError):
            GridFunction(np.array([1.0]))
