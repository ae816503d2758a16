import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vpecho.equilibrium import (GridSpec, QuadratureSpec, dv_mu_hat,
                                laplace_kernel_transform, laplace_symbol,
                                laplace_tail_bound, make_gaussian, make_table,
                                make_two_stream, penrose_margin, penrose_scan)
from vpecho.errors import AccuracyError, DivergenceError, ResolutionWarning

SQ2PI = np.sqrt(2.0 * np.pi)

# quad-oracle values (scipy.integrate.quad of exp(-v^2/2) exp(-i eta v))
MU_HAT_ORACLE = {0.0: 2.5066282746309994, 1.0: 1.5203469010662811,
                 3.0: 0.027846124825535327}
D_ZERO_ONE_ORACLE = 3.5066282746309994


class TestMuHat:
    def test_gaussian_against_quadrature_oracle(self, gaussian):
        for eta, expected in MU_HAT_ORACLE.items():
            assert gaussian.mu_hat(eta) == pytest.approx(expected, rel=1e-12)

    def test_gaussian_at_zero_is_sqrt_2pi(self, gaussian):
        assert gaussian.mu_hat(0.0) == pytest.approx(2.5066282746310002, abs=1e-15)

    def test_negative_argument_is_conjugate_and_real(self, gaussian):
        assert gaussian.mu_hat(-3.0) == np.conj(gaussian.mu_hat(3.0))
        assert gaussian.mu_hat(-3.0).imag == 0.0

    def test_envelope_example(self, gaussian):
        # |mu_hat(5)| = 9.34e-6 is far below 3 exp(-5) = 2.02e-2
        assert abs(gaussian.mu_hat(5.0)) == pytest.approx(9.341334210875703e-06, rel=1e-12)
        assert abs(gaussian.mu_hat(5.0)) <= 3.0 * np.exp(-5.0)

    @pytest.mark.parametrize("factory", [make_gaussian, lambda: make_two_stream(3.0)])
    def test_constructed_envelope_holds_everywhere(self, factory):
        eq = factory()
        eta = np.linspace(-30.0, 30.0, 4001)
        assert np.all(np.abs(eq.mu_hat(eta)) <= eq.envelope(eta) * (1 + 1e-12))

    @given(st.floats(-25.0, 25.0))
    def test_hermitian_symmetry(self, eta):
        for eq in (make_gaussian(), make_two_stream(2.0)):
            assert eq.mu_hat(-eta) == pytest.approx(np.conj(eq.mu_hat(eta)), abs=1e-14)

    def test_two_stream_matches_cosine_form(self, two_stream):
        eta = np.linspace(-8, 8, 201)
        expected = SQ2PI * np.exp(-0.5 * eta**2) * np.cos(3.0 * eta)
        np.testing.assert_allclose(two_stream.mu_hat(eta), expected, atol=1e-14)


class TestDvMuHat:
    def test_vanishes_at_zero(self, gaussian):
        assert dv_mu_hat(gaussian, 0.0) == 0.0

    def test_closed_form_at_one(self, gaussian):
        assert dv_mu_hat(gaussian, 1.0) == pytest.approx(1j * 1.5203469010662807, abs=1e-14)

    @given(st.floats(-20.0, 20.0))
    def test_hermitian_symmetry(self, eta):
        # mu real => dv mu real => Hermitian transform
        eq = make_two_stream(2.5)
        assert dv_mu_hat(eq, -eta) == pytest.approx(np.conj(dv_mu_hat(eq, eta)), abs=1e-14)

    def test_pure_imaginary_and_odd_for_even_mu(self, gaussian):
        eta = np.linspace(-10, 10, 101)
        vals = dv_mu_hat(gaussian, eta)
        assert np.abs(vals.real).max() == 0.0
        np.testing.assert_allclose(vals, -vals[::-1], atol=1e-15)


class TestTable:
    def test_hermitian_symmetrization_of_two_sided_samples(self):
        eta = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        vals = np.array([1 - 0.5j, 2 - 1j, 3 + 0.2j, 2 + 1j, 1 + 0.5j])
        eq = make_table(eta, vals)
        grid = np.linspace(-2, 2, 41)
        np.testing.assert_allclose(eq.mu_hat(-grid), np.conj(eq.mu_hat(grid)), atol=1e-14)
        assert eq.mu_hat(0.0).imag == 0.0

    def test_zero_outside_sampled_range(self):
        eq = make_table(np.array([0.0, 1.0]), np.array([1.0, 0.5], dtype=complex))
        assert eq.mu_hat(5.0) == 0.0

    def test_fitted_envelope_covers_samples(self, gaussian_table):
        eta = np.linspace(-20, 20, 801)
        assert np.all(np.abs(gaussian_table.mu_hat(eta))
                      <= gaussian_table.envelope(eta) * (1 + 1e-9))


class TestLaplaceSymbol:
    def test_value_at_zero_matches_quad_oracle(self, gaussian):
        assert laplace_symbol(gaussian, 1, 0.0) == pytest.approx(
            D_ZERO_ONE_ORACLE, rel=1e-10)

    def test_simpson_route_matches_closed_form(self, gaussian, gaussian_table):
        for lam in (0.0, 0.3 + 2.0j, -0.4 + 5.0j):
            closed = laplace_symbol(gaussian, 2, lam)
            simpson = laplace_symbol(gaussian_table, 2, lam, QuadratureSpec(tol=1e-10))
            # the table is a piecewise-linear stand-in, accurate to O(table step^2)
            assert simpson == pytest.approx(closed, rel=3e-5)

    def test_large_real_abscissa_tends_to_one(self, gaussian):
        d10 = abs(laplace_symbol(gaussian, 1, 10.0) - 1.0)
        d50 = abs(laplace_symbol(gaussian, 1, 50.0) - 1.0)
        assert d50 < d10 < 0.03
        assert d50 < 2e-3

    @pytest.mark.parametrize("k", [5, 10, 20])
    def test_inverse_square_scaling_in_k(self, gaussian, k):
        # exact for the Gaussian: (D(0,k) - 1) * k^2 = sqrt(2 pi)
        d = laplace_symbol(gaussian, k, 0.0)
        assert (d - 1.0) * k * k == pytest.approx(SQ2PI, rel=1e-12)

    @given(st.complex_numbers(max_magnitude=6.0))
    def test_conjugation_symmetry(self, lam):
        eq = make_gaussian()
        if lam.real <= -0.4:
            lam = complex(-0.4, lam.imag)
        assert laplace_symbol(eq, 1, np.conj(lam)) == pytest.approx(
            np.conj(laplace_symbol(eq, 1, lam)), rel=1e-12, abs=1e-12)

    def test_step_halving_changes_less_than_tail_bound(self, gaussian_table):
        lam = 0.2 + 1.5j
        spec = QuadratureSpec(t_max=8.0, step=0.02, tol=0.05)
        half = QuadratureSpec(t_max=8.0, step=0.01, tol=0.05)
        d1 = laplace_symbol(gaussian_table, 1, lam, spec)
        d2 = laplace_symbol(gaussian_table, 1, lam, half)
        assert abs(d1 - d2) < laplace_tail_bound(gaussian_table, 1, lam, 8.0)

    def test_divergence_error_beyond_the_abscissa(self, gaussian):
        with pytest.raises(DivergenceError):
            laplace_symbol(gaussian, 1, -1.5)

    def test_accuracy_error_when_truncation_too_short(self, gaussian_table):
        with pytest.raises(AccuracyError):
            laplace_symbol(gaussian_table, 1, 0.0, QuadratureSpec(t_max=1.0, tol=1e-12))

    def test_vectorized_over_lambda(self, gaussian):
        lam = np.array([0.0, 1j, 2j])
        np.testing.assert_allclose(
            laplace_kernel_transform(gaussian, 1, lam),
            [laplace_kernel_transform(gaussian, 1, x) for x in lam], rtol=1e-12)


class TestPenroseMargin:
    def test_gaussian_margin_regression(self, gaussian):
        # regression constant; the minimiser sits at k=1, |tau| ~ 2.62
        report = penrose_scan(gaussian, 8, 20.0, GridSpec(n_tau=4001, tol=0.1))
        assert report.margin == pytest.approx(0.4843, rel=5e-3)
        assert report.argmin_k == 1

    def test_gaussian_margin_stable_under_refinement(self, gaussian):
        coarse = penrose_margin(gaussian, 4, 12.0, GridSpec(n_tau=4001, tol=0.1))
        fine = penrose_margin(gaussian, 4, 12.0, GridSpec(n_tau=8001, tol=0.1))
        assert abs(fine - coarse) <= 0.01 * abs(coarse)

    def test_two_stream_margin_regression(self, two_stream):
        margin = penrose_margin(two_stream, 5, 30.0, GridSpec(n_tau=12001, tol=0.1))
        assert margin == pytest.approx(0.510, rel=2e-2)

    def test_tail_floor_reported(self, gaussian):
        report = penrose_scan(gaussian, 8, 20.0, GridSpec(n_tau=2001, tol=0.1))
        assert 0.0 < report.tail_floor < 1.0
        assert report.margin <= report.sampled_min

    def test_resolution_warning_on_coarse_grid(self, gaussian):
        with pytest.warns(ResolutionWarning):
            penrose_margin(gaussian, 2, 10.0, GridSpec(n_tau=51, tol=1e-4))

    def test_large_wavenumbers_stay_near_one(self, gaussian):
        # restricting to |k| >= K0 the margin obeys 1 - C/K0^2
        report = penrose_scan(gaussian, 8, 20.0, GridSpec(n_tau=2001, tol=0.1))
        for k0 in (5, 8):
            taus = np.linspace(-20, 20, 2001)
            from vpecho.equilibrium import laplace_kernel_transform
            mags = np.abs(1.0 + laplace_kernel_transform(gaussian, k0, 1j * taus))
            assert mags.min() >= 1.0 - report.symbol_constant / (1.0 + k0 * k0)

    def test_rejects_bad_arguments(self, gaussian):
        with pytest.raises(ValueError):
            penrose_margin(gaussian, 0, 10.0)
