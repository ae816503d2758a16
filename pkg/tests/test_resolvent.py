import numpy as np
import pytest
from scipy.signal import fftconvolve

from vpecho.equilibrium import make_gaussian, make_table
from vpecho.errors import (ContourUnsafeError, GridMismatchError,
                           IterationInstabilityError)
from vpecho.grids import TimeGrid
from vpecho.resolvent import (ContourSpec, apply_resolvent, kernel_contour,
                              kernel_volterra)

GRID = TimeGrid(10.0, 0.01)


@pytest.fixture(scope="module")
def gauss_kernels(gaussian):
    return {k: kernel_volterra(gaussian, k, GRID) for k in (1, 2, 3)}


class TestVolterraRoute:
    def test_zero_equilibrium_gives_zero_kernel(self, zero_equilibrium):
        kern = kernel_volterra(zero_equilibrium, 1, GRID)
        assert np.abs(kern.values).max() == 0.0

    def test_value_at_zero_vanishes(self, gauss_kernels):
        for kern in gauss_kernels.values():
            assert kern.values[0] == 0.0

    def test_discrete_residual_below_tolerance(self, gaussian):
        kern = kernel_volterra(gaussian, 1, TimeGrid(20.0, 0.01))
        assert kern.residual <= 1e-6

    def test_envelope_bound_holds_at_every_sample(self, gauss_kernels):
        for k, kern in gauss_kernels.items():
            env = kern.envelope(GRID.points)
            assert np.all(np.abs(kern.values) <= env * (1 + 1e-12))
            assert kern.fitted_theta1 > 0

    def test_decay_rate_grows_at_least_linearly_in_k(self, gauss_kernels):
        rates = {k: kern.fitted_theta1 * k for k, kern in gauss_kernels.items()}
        for k in (2, 3):
            assert rates[k] >= 0.95 * k * rates[1]

    def test_conjugate_wavenumber_symmetry(self):
        # Hermitian mu_hat with a genuine imaginary part
        eta = np.arange(0.0, 25.0, 0.01)
        vals = np.exp(-eta) * (1.0 + 0.4j * eta)
        eq = make_table(eta, vals, c0=6.0, theta0=0.5)
        k_pos = kernel_volterra(eq, 1, TimeGrid(5.0, 0.02))
        k_neg = kernel_volterra(eq, -1, TimeGrid(5.0, 0.02))
        np.testing.assert_allclose(k_neg.values, np.conj(k_pos.values), atol=1e-14)

    def test_instability_guard_trips_on_growing_kernel(self):
        eta = np.array([0.0, 1e7])
        eq = make_table(eta, np.array([50.0, 50.0], dtype=complex), c0=60.0, theta0=1e-6)
        with pytest.raises(IterationInstabilityError):
            kernel_volterra(eq, 1, TimeGrid(2000.0, 1.0), oversample=1)

    def test_rejects_zero_wavenumber(self, gaussian):
        with pytest.raises(ValueError):
            kernel_volterra(gaussian, 0, GRID)


class TestContourRoute:
    def test_agrees_with_volterra(self, gaussian, gauss_kernels):
        kern = gauss_kernels[1]
        route = kernel_contour(gaussian, 1, GRID.points)
        rel = np.abs(route - kern.values).max() / np.abs(kern.values).max()
        assert rel <= 1e-5

    def test_scalar_time_matches_vector_form(self, gaussian):
        spec = ContourSpec(tol=1e-7)
        vec = kernel_contour(gaussian, 2, np.array([0.5, 1.0]), spec)
        assert kernel_contour(gaussian, 2, 1.0, spec) == pytest.approx(vec[1], rel=1e-12)

    def test_decay_example_k3(self, gaussian, gauss_kernels):
        kern = kernel_volterra(gaussian, 3, GRID)
        val = kernel_contour(gaussian, 3, 4.0)
        assert abs(val) <= kern.fitted_c1 * np.exp(-kern.fitted_theta1 * 12.0)

    def test_zero_equilibrium_gives_zero(self, zero_equilibrium):
        assert kernel_contour(zero_equilibrium, 1, 1.5) == 0.0
        assert kernel_contour(zero_equilibrium, 1, 0.0) == 0.0

    def test_unsafe_line_is_rejected(self, gaussian):
        # the least-damped dispersion root for k=1 sits near Re(lambda) = -0.48,
        # so a pinned line at -0.5 lies beyond it and must be refused
        with pytest.raises(ContourUnsafeError):
            kernel_contour(gaussian, 1, 1.0, ContourSpec(theta1_prime=0.5))

    def test_auto_line_shrinks_to_safety(self, gaussian):
        # same case with the line left free: shrinks and agrees with Volterra
        val = kernel_contour(gaussian, 1, 2.0)
        kern = kernel_volterra(gaussian, 1, TimeGrid(2.0, 0.01))
        assert val == pytest.approx(complex(kern.values[-1]), abs=2e-6)


class TestApplyResolvent:
    def test_zero_source_maps_to_zero(self, gauss_kernels):
        out = apply_resolvent(gauss_kernels[1], np.zeros(len(GRID)))
        assert np.abs(out).max() == 0.0

    def test_zero_kernel_is_identity(self, zero_equilibrium):
        kern = kernel_volterra(zero_equilibrium, 1, GRID)
        s = np.cos(GRID.points) + 1j * GRID.points
        np.testing.assert_array_equal(apply_resolvent(kern, s), s)

    def test_solves_the_density_equation(self, gaussian):
        # residual of rho + int (t-s) mu_hat(k(t-s)) rho ds = S under the same
        # trapezoid rule; exact up to roundoff by construction
        grid = TimeGrid(10.0, 0.01)
        kern = kernel_volterra(gaussian, 1, grid, oversample=1)
        s = np.exp(-grid.points)
        rho = apply_resolvent(kern, s)
        m = grid.points * gaussian.mu_hat(grid.points)
        w = rho.copy()
        w[0] *= 0.5
        residual = rho + grid.dt * fftconvolve(m, w)[:len(rho)] - s
        assert np.abs(residual).max() <= 1e-6

    def test_linear_in_the_source(self, gauss_kernels):
        s1 = np.sin(GRID.points)
        s2 = np.exp(-0.3 * GRID.points)
        kern = gauss_kernels[2]
        lhs = apply_resolvent(kern, 2.0 * s1 + s2)
        rhs = 2.0 * apply_resolvent(kern, s1) + apply_resolvent(kern, s2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_grid_mismatch_is_rejected(self, gauss_kernels):
        with pytest.raises(GridMismatchError):
            apply_resolvent(gauss_kernels[1], np.zeros(7))
