import numpy as np
import pytest
from numpy.testing import assert_allclose

from covmeans import (
    Partition,
    SingularMatrixError,
    ValidationError,
    arithmetic_mean,
    conditional_quadratic_expectation,
    fisher_sun_intensity,
    harmonic_mean,
    linear_shrinkage,
    rao_blackwell_factor,
    rao_blackwell_harmonic,
    rb_regularized_harmonic,
    sample_data,
    split_wisharts,
)
from covmeans.linalg import as_array, operator_norm, spd_inverse


def _blocks(p, n, n_splits, field="real", seed=0):
    data = sample_data(np.eye(p), n * n_splits, field, seed)
    return split_wisharts(data, Partition.equal(n * n_splits, n_splits))


class TestArithmeticMean:
    def test_is_entrywise_average(self):
        ws = _blocks(4, 8, 3)
        expected = sum(as_array(w) for w in ws) / 3
        assert_allclose(as_array(arithmetic_mean(ws)), expected, rtol=1e-14)

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            arithmetic_mean([])

    def test_rejects_mixed_shapes(self):
        with pytest.raises(ValidationError):
            arithmetic_mean([np.eye(2), np.eye(3)])


class TestHarmonicMean:
    def test_two_matrix_closed_form(self):
        # for two blocks, H = 2 W1 (W1 + W2)^-1 W2
        w1, w2 = (as_array(w) for w in _blocks(5, 9, 2))
        h = as_array(harmonic_mean([w1, w2]))
        expected = 2.0 * w1 @ np.linalg.inv(w1 + w2) @ w2
        assert_allclose(h, expected, rtol=1e-10)

    def test_commuting_diagonal_case(self):
        d1 = np.diag([1.0, 2.0, 4.0])
        d2 = np.diag([3.0, 2.0, 1.0])
        h = as_array(harmonic_mean([d1, d2]))
        expected = np.diag(2.0 / (1.0 / np.diag(d1) + 1.0 / np.diag(d2)))
        assert_allclose(h, expected, rtol=1e-14)

    def test_loewner_below_arithmetic(self):
        for field in ("real", "complex"):
            ws = _blocks(10, 15, 4, field=field, seed=3)
            a = as_array(arithmetic_mean(ws))
            h = as_array(harmonic_mean(ws))
            assert np.linalg.eigvalsh(a - h).min() > -1e-9 * operator_norm(a)

    def test_equal_inputs_fixed_point(self):
        w = as_array(_blocks(4, 10, 1)[0])
        assert_allclose(as_array(harmonic_mean([w, w])), w, rtol=1e-12)

    def test_singular_summand_raises(self):
        rank_def = np.zeros((3, 3))
        with pytest.raises(SingularMatrixError):
            harmonic_mean([np.eye(3), rank_def])


class TestRaoBlackwell:
    def test_factor_frozen_values(self):
        assert_allclose(rao_blackwell_factor(4, 10), 160.0 / 209.0, rtol=1e-15)
        assert_allclose(rao_blackwell_factor(20, 40), 2400.0 / 3239.0, rtol=1e-15)

    def test_factor_large_n_limit(self):
        # n(2n - p) / ((2n - 1)(n + 1)) -> 1 - gamma with gamma = p / (2n)
        gamma = 0.25
        for n in (10_000, 100_000):
            p = int(2 * n * gamma)
            assert_allclose(rao_blackwell_factor(p, n), 1 - gamma, atol=2e-4)

    def test_factor_degenerate_regime(self):
        with pytest.raises(ValidationError):
            rao_blackwell_factor(11, 10)

    def test_estimator_scales_arithmetic(self):
        ws = _blocks(4, 9, 2)
        a = arithmetic_mean(ws)
        rb = rao_blackwell_harmonic(a, 4, 9)
        assert_allclose(
            as_array(rb), rao_blackwell_factor(4, 9) * as_array(a), rtol=1e-14
        )

    def test_rejects_complex_input(self):
        ws = _blocks(4, 9, 2, field="complex")
        a = arithmetic_mean(ws)
        with pytest.raises(ValidationError):
            rao_blackwell_harmonic(a, 4, 9)


class TestConditionalQuadraticExpectation:
    def test_scalar_oracle(self):
        # p = 1, n = 3, F = 1, A = 1: (2n(n+1) - 2 + n) / ((2n-1)(n+1)) = 25/20
        out = conditional_quadratic_expectation(np.array([[1.0]]), np.array([[1.0]]), 3)
        assert_allclose(out, np.array([[1.25]]), rtol=1e-15)

    def test_at_inverse_of_a(self):
        # F = A^-1 collapses to a known multiple of A
        ws = _blocks(4, 12, 2, seed=5)
        a = as_array(arithmetic_mean(ws))
        n, p = 12, 4
        out = conditional_quadratic_expectation(a, spd_inverse(a), n)
        coeff = (2 * n * (n + 1) - 2 + p * n) / ((2 * n - 1) * (n + 1))
        assert_allclose(out, coeff * a, rtol=1e-10)

    def test_linear_in_f(self):
        ws = _blocks(3, 10, 2, seed=6)
        a = as_array(arithmetic_mean(ws))
        f1 = np.diag([1.0, 2.0, 3.0])
        f2 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.5], [0.0, 0.5, 0.0]])
        lhs = conditional_quadratic_expectation(a, f1 + 2 * f2, 10)
        rhs = conditional_quadratic_expectation(a, f1, 10) + 2 * conditional_quadratic_expectation(a, f2, 10)
        assert_allclose(lhs, rhs, rtol=1e-12)


class TestRbRegularized:
    def test_reduces_to_plain_rb_at_zero_shift(self):
        ws = _blocks(5, 12, 2, seed=2)
        a = arithmetic_mean(ws)
        plain = as_array(rao_blackwell_harmonic(a, 5, 12))
        reduced = as_array(rb_regularized_harmonic(a, 1.0, 0.0, np.eye(5), 5, 12))
        assert_allclose(reduced, plain, rtol=1e-13)

    def test_identity_target_specialization(self):
        # c = 1 - lam, d = lam / (1 - lam) with identity target gives the
        # three-term form in lam directly; check against a hand evaluation
        ws = _blocks(4, 11, 2, seed=9)
        a = as_array(arithmetic_mean(ws))
        p, n, lam = 4, 11, 0.3
        c, d = 1.0 - lam, lam / (1.0 - lam)
        out = as_array(rb_regularized_harmonic(a, c, d, np.eye(p), p, n))
        atil = c * (a + d * np.eye(p))
        atil_inv = spd_inverse(atil)
        tr_term = lam * np.trace(atil_inv).real
        den = (2 * n - 1) * (n + 1)
        expected = (
            n * (2 * n - p + tr_term) / den * atil
            + (1 - n) / den * lam**2 * atil_inv
            + (2 * n + n * p - 2 - n * tr_term) / den * lam * np.eye(p)
        )
        assert_allclose(out, expected, rtol=1e-12)

    def test_result_is_symmetric(self):
        ws = _blocks(4, 11, 2, seed=9)
        a = arithmetic_mean(ws)
        out = as_array(rb_regularized_harmonic(a, 0.8, 0.5, np.eye(4), 4, 11))
        assert_allclose(out, out.T, atol=1e-14)


class TestLinearShrinkage:
    def test_endpoints(self):
        ws = _blocks(3, 8, 2, seed=1)
        a = as_array(arithmetic_mean(ws))
        eye = np.eye(3)
        assert_allclose(as_array(linear_shrinkage(a, 0.0, eye)), a, rtol=1e-14)
        assert_allclose(as_array(linear_shrinkage(a, 1.0, eye)), eye, rtol=1e-14)

    def test_interpolation(self):
        ws = _blocks(3, 8, 2, seed=1)
        a = as_array(arithmetic_mean(ws))
        eye = np.eye(3)
        out = as_array(linear_shrinkage(a, 0.25, eye))
        assert_allclose(out, 0.75 * a + 0.25 * eye, rtol=1e-14)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            linear_shrinkage(np.eye(2), 1.5, np.eye(2))


class TestFisherSunIntensity:
    def test_identity_population_shrinks_hard(self):
        # Sigma = I: dispersion alpha^2 = 0, so the intensity should sit
        # near 1 apart from sampling noise in the moment estimates
        ws = _blocks(40, 80, 2, seed=0)
        lam = fisher_sun_intensity(arithmetic_mean(ws), 160)
        assert 0.9 <= lam <= 1.0

    def test_dispersed_population_shrinks_less(self):
        rng = np.random.default_rng(0)
        p, t = 40, 160
        sigma_half = np.diag(np.sqrt(np.linspace(0.2, 5.0, p)))
        x = sigma_half @ rng.standard_normal((p, t))
        a = x @ x.T / t
        lam = fisher_sun_intensity(a, t)
        assert 0.0 <= lam <= 0.5

    def test_bounds_always_hold(self):
        for seed in range(5):
            ws = _blocks(10, 12, 2, seed=seed)
            lam = fisher_sun_intensity(arithmetic_mean(ws), 24)
            assert 0.0 <= lam <= 1.0

    def test_moment_estimates_unbiased(self):
        # the dispersion estimate a2 underlying the intensity was built to
        # satisfy E[a2] = (1/p) tr(Sigma^2); check by Monte Carlo at Sigma = I
        rng = np.random.default_rng(7)
        p, t, trials = 8, 20, 4000
        vals = np.empty(trials)
        const = t**2 / ((t - 1) * (t + 2))
        for i in range(trials):
            x = rng.standard_normal((p, t))
            a = x @ x.T / t
            tr = np.trace(a)
            tr2 = np.trace(a @ a)
            vals[i] = const * (tr2 - tr**2 / t) / p
        se = vals.std(ddof=1) / np.sqrt(trials)
        assert abs(vals.mean() - 1.0) < 4 * se
