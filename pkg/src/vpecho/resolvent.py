"""Resolvent kernel of the linearized dynamics, by two independent routes.

The density response to a source obeys a second-kind Volterra equation with
memory kernel m(t) = t mu_hat(k t).  Its resolvent G_k satisfies

    G_k(t) + (m * G_k)(t) = -m(t)          (* = Laplace convolution)

and the density is recovered as rho = S + G_k * S.  Route one solves the
discrete Volterra equation by forward substitution; route two inverts the
Laplace-domain expression G~ = -L/(1+L) on a vertical line Re(lambda) =
-theta1' |k| left of the imaginary axis.  For stable equilibria both routes
must coincide, and |G_k(t)| decays like exp(-theta1 |k| t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .equilibrium import Equilibrium, laplace_kernel_transform
from .errors import (AccuracyError, ContourUnsafeError, GridMismatchError,
                     IterationInstabilityError)
from .grids import TimeGrid


@dataclass(frozen=True)
class ResolventKernel:
    k: int
    t_grid: TimeGrid
    values: np.ndarray          # complex samples G_k(t_i), values[0] == 0
    fitted_c1: float
    fitted_theta1: float
    residual: float             # max discrete Volterra residual on the solve grid

    def envelope(self, t) -> np.ndarray:
        return self.fitted_c1 * np.exp(-self.fitted_theta1 * abs(self.k) * np.asarray(t))


def _memory_kernel(eq: Equilibrium, k: int, t: np.ndarray) -> np.ndarray:
    return t * eq.mu_hat(k * t)


def _fit_decay(t: np.ndarray, values: np.ndarray, k: int,
               fallback_rate: float) -> tuple[float, float]:
    """Upper-envelope exponential fit |G| <= c1 exp(-theta1 |k| t).

    The rate comes from a least-squares fit of the running maximum (from the
    right) of log|G| after the global peak; c1 is then the smallest constant
    making the envelope valid at every sample.  Identically zero kernels get
    (0, fallback_rate).
    """
    mag = np.abs(values)
    if mag.max() < 1e-300:
        return 0.0, fallback_rate
    i0 = int(np.argmax(mag))
    tail_t = t[i0:]
    env = np.maximum.accumulate(mag[i0:][::-1])[::-1]
    keep = env > 1e-300
    if np.count_nonzero(keep) < 3:
        theta1 = fallback_rate
    else:
        slope = np.polyfit(tail_t[keep], np.log(env[keep]), 1)[0]
        theta1 = -slope / abs(k)
    # smallest valid envelope constant, in log space (underflowed samples hold
    # trivially and would otherwise produce 0 * inf)
    big = mag > 1e-300
    log_c1 = np.max(np.log(mag[big]) + theta1 * abs(k) * t[big])
    c1 = float(np.exp(min(log_c1, 700.0)))
    return c1, float(theta1)


def kernel_volterra(eq: Equilibrium, k: int, t_grid: TimeGrid,
                    oversample: int = 8) -> ResolventKernel:
    """Forward-substitution solve of the discrete Volterra equation.

    Trapezoidal quadrature on an `oversample`-times refined grid, decimated
    back to t_grid; stable whenever dt^2 * sup|mu_hat| << 1.  The reported
    residual is the discrete equation's defect on the solve grid.
    """
    if k == 0:
        raise ValueError("k must be a nonzero integer")
    if oversample < 1:
        raise ValueError("oversample must be a positive integer")
    fine = t_grid.refined(oversample)
    h = fine.dt
    t = fine.points
    m = _memory_kernel(eq, k, t)
    sup_m = float(np.abs(m).max())
    n = len(t) - 1
    g = np.zeros(n + 1, dtype=complex)
    guard = 1e8 * (1.0 + sup_m)
    # m[0] = 0 empties the trapezoid endpoints, so the update stays explicit
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            g[i] = -m[i] - h * np.dot(m[i - 1:0:-1], g[1:i])
            if i % 256 == 0 and not abs(g[i]) <= guard:
                raise IterationInstabilityError(
                    f"|G| exceeded {guard:.2g} at t={t[i]:g}; decrease dt "
                    f"(criterion: dt^2 * sup|mu_hat| = {h * h * sup_m:.2g} << 1)")
    if not np.all(np.isfinite(g.view(float))) or np.abs(g).max() > guard:
        raise IterationInstabilityError("Volterra iteration grew beyond the safety bound")
    conv = h * fftconvolve(m, g)[:n + 1]
    residual = float(np.abs(g + conv + m).max())
    values = g[::oversample].copy()
    c1, theta1 = _fit_decay(t_grid.points, values, k, eq.theta0)
    return ResolventKernel(k, t_grid, values, c1, theta1, residual)


# ---------------------------------------------------------------------------
# Contour route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """Vertical-line inversion contour Re(lambda) = -theta1_prime * |k|.

    Unset geometry fields are derived from tol: the truncation Lambda comes
    from the cubic-remainder tail bound, the Simpson step from the oscillation
    exp(i tau t) at the largest requested t.  theta1_prime starts at
    min(theta0/2, 0.5) and is halved while the strip between the line and the
    imaginary axis fails the zero-freeness (argument-principle) check.
    """

    theta1_prime: float | None = None
    lambda_max: float | None = None
    d_tau: float | None = None
    tol: float = 1e-6
    kappa_floor: float = 1e-3
    max_nodes: int = 4_000_000
    max_shrink: int = 6


def _winding_number(eq: Equilibrium, k: int, a: float, lam_w: float,
                    kappa_floor: float, n_side: int = 3000) -> tuple[int, float]:
    """Winding of 1 + L around the rectangle [-a, 0] x [-lam_w, lam_w].

    A nonzero winding means the symbol vanishes inside the strip, so the line
    Re(lambda) = -a is on the wrong side of a dispersion root.
    """
    left = -a + 1j * np.linspace(-lam_w, lam_w, n_side)
    top = np.linspace(-a, 0.0, n_side // 2) + 1j * lam_w
    right = 1j * np.linspace(lam_w, -lam_w, n_side)
    bottom = np.linspace(0.0, -a, n_side // 2) - 1j * lam_w
    loop = np.concatenate([left, top, right, bottom, left[:1]])
    w = 1.0 + laplace_kernel_transform(eq, k, loop)
    min_mag = float(np.abs(w).min())
    if min_mag < kappa_floor:
        return 10, min_mag  # treated as unsafe by the caller
    phases = np.angle(w[1:] / w[:-1])
    return int(np.rint(phases.sum() / (2.0 * np.pi))), min_mag


def _line_parameters(eq: Equilibrium, k: int, t_max: float,
                     spec: ContourSpec) -> tuple[float, float, float]:
    """Pick (theta1_prime, Lambda, d_tau) for the truncated line integral."""
    a0 = spec.theta1_prime if spec.theta1_prime is not None else min(eq.theta0 / 2.0, 0.5)
    shrink = 0
    while True:
        a = a0 * abs(k)
        pre_tau = np.linspace(0.0, max(20.0, 10.0 * abs(k)), 2001)
        lap = laplace_kernel_transform(eq, k, -a + 1j * pre_tau)
        kappa_line = float(np.abs(1.0 + lap).min())
        c_fit = float(np.max(np.abs(lap) * (1.0 + k * k + pre_tau**2)))
        lam_w = max(np.sqrt(max(c_fit / 0.4 - 1.0 - k * k, 1.0)), 5.0)
        winding, min_strip = _winding_number(eq, k, a, lam_w, spec.kappa_floor)
        if kappa_line >= spec.kappa_floor and winding == 0:
            break
        shrink += 1
        if spec.theta1_prime is not None or shrink > spec.max_shrink:
            raise ContourUnsafeError(
                f"k={k}: line Re(lambda)=-{a:g} unsafe "
                f"(min |1+L| = {min(kappa_line, min_strip):.3g}, winding = {winding})")
        a0 *= 0.5
    if spec.lambda_max is not None:
        lam_max = spec.lambda_max
    else:
        lam_max = (2.0 * c_fit**3 / (np.pi * kappa_line * spec.tol)) ** 0.2
        lam_max = max(lam_max, 10.0)
    if spec.d_tau is not None:
        d_tau = spec.d_tau
    else:
        integ = c_fit**3 / kappa_line * (3.0 * np.pi / 8.0) / (1.0 + k * k) ** 2.5
        d_tau = (spec.tol * 18.0 / (max(t_max, 1.0) ** 4 * max(integ, 1e-12))) ** 0.25
        d_tau = min(d_tau, 0.02)
    if 2.0 * lam_max / d_tau > spec.max_nodes:
        raise AccuracyError(
            f"contour needs {2 * lam_max / d_tau:.3g} nodes > max_nodes={spec.max_nodes}")
    return a, lam_max, d_tau


def _conv_mm(eq: Equilibrium, k: int, t: np.ndarray, nodes: int = 96) -> np.ndarray:
    """(m * m)(t) by Gauss-Legendre, vectorized over the output times."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * np.outer(t, x + 1.0)
    wt = 0.5 * t[:, None] * w[None, :]
    return np.sum(_memory_kernel(eq, k, s)
                  * _memory_kernel(eq, k, t[:, None] - s) * wt, axis=1)


def kernel_contour(eq: Equilibrium, k: int, t, contour: ContourSpec | None = None):
    """Inverse Laplace transform of -L/(1+L) over a truncated vertical line.

    The two leading Neumann terms are inverted exactly in the time domain,
    G = -m + m*m - ILT[L^3/(1+L)], leaving an integrand that decays like
    |tau|^{-6} so the truncation tail is certified at tol/10.
    """
    if k == 0:
        raise ValueError("k must be a nonzero integer")
    spec = contour or ContourSpec()
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("kernel_contour requires t >= 0")
    a, lam_max, d_tau = _line_parameters(eq, k, float(t_arr.max(initial=0.0)), spec)

    n = int(np.ceil(2.0 * lam_max / d_tau))
    n += n % 2
    tau = np.linspace(-lam_max, lam_max, n + 1)
    lam = -a + 1j * tau
    lap = laplace_kernel_transform(eq, k, lam)
    mag = np.abs(1.0 + lap)
    if mag.min() < spec.kappa_floor:
        raise ContourUnsafeError(
            f"k={k}: |1+L| dropped to {mag.min():.3g} on the sampled line")
    integrand = lap**3 / (1.0 + lap)
    wts = np.ones(n + 1)
    wts[1:-1:2], wts[2:-1:2] = 4.0, 2.0
    wts *= (tau[1] - tau[0]) / 3.0
    coef = wts * integrand

    correction = np.zeros(t_arr.shape, dtype=complex)
    chunk = max(1, int(4e6 // max(len(t_arr), 1)))
    for i in range(0, n + 1, chunk):
        correction += np.exp(np.outer(t_arr, lam[i:i + chunk])) @ coef[i:i + chunk]
    correction /= 2.0 * np.pi

    out = -_memory_kernel(eq, k, t_arr) + _conv_mm(eq, k, t_arr) - correction
    out[t_arr == 0.0] = 0.0
    return out if np.ndim(t) else complex(out[0])


def apply_resolvent(kern: ResolventKernel, s_history: np.ndarray) -> np.ndarray:
    """rho = S + G * S by trapezoidal convolution on the kernel's grid."""
    s_history = np.asarray(s_history)
    if s_history.shape[0] != len(kern.t_grid):
        raise GridMismatchError(
            f"history has {s_history.shape[0]} samples, kernel grid has {len(kern.t_grid)}")
    weighted = s_history.astype(complex, copy=True)
    weighted[0] *= 0.5  # trapezoid endpoint at s=0; G(0)=0 empties the other one
    conv = fftconvolve(kern.values, weighted)[:s_history.shape[0]]
    return s_history + kern.t_grid.dt * conv
