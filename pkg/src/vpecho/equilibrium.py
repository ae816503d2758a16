"""Spatially homogeneous equilibria in Fourier velocity space.

An equilibrium enters the dynamics only through its Fourier transform
mu_hat(eta) = int mu(v) exp(-i eta v) dv and through the Laplace transform of
the memory kernel m(t) = t * mu_hat(k t).  The dispersion symbol

    D(lambda, k) = 1 + int_0^inf exp(-lambda t) t mu_hat(k t) dt

is bounded away from zero on {Re lambda >= 0} for stable equilibria; the
distance of |D| to zero on the imaginary axis is the stability margin that
`penrose_margin` estimates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import wofz

from .errors import AccuracyError, DivergenceError, ResolutionWarning

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class Equilibrium:
    """Background profile represented by mu_hat with an exponential envelope.

    The envelope |mu_hat(eta)| <= c0 * exp(-theta0 * |eta|) must hold at every
    sampled eta; mu_hat must be Hermitian (mu real).
    """

    mu_hat: Callable[[np.ndarray], np.ndarray]
    c0: float
    theta0: float
    kind: str
    params: dict = field(default_factory=dict)
    # closed-form Laplace transform of t*mu_hat(k t), used by the contour route
    laplace_m: Optional[Callable[[int, np.ndarray], np.ndarray]] = None

    def dv_mu_hat(self, eta) -> np.ndarray:
        """Fourier transform of the velocity derivative: i * eta * mu_hat(eta)."""
        eta = np.asarray(eta, dtype=float)
        return 1j * eta * self.mu_hat(eta)

    def envelope(self, eta) -> np.ndarray:
        return self.c0 * np.exp(-self.theta0 * np.abs(eta))


def dv_mu_hat(eq: Equilibrium, eta) -> np.ndarray:
    return eq.dv_mu_hat(eta)


def _gauss_lap_term(lam, k: int, shift: float = 0.0) -> np.ndarray:
    """int_0^inf t exp(-(kt)^2/2) exp(i*shift*t) exp(-lam t) dt via the Faddeeva
    function; stable on vertical lines Re lam = -a with a up to O(|k|)."""
    lam = np.asarray(lam, dtype=complex) - 1j * shift
    b = 0.5 * k * k
    sb = np.sqrt(b)
    j_fac = np.sqrt(np.pi) / (2.0 * sb) * wofz(1j * lam / (2.0 * sb))
    return (1.0 - lam * j_fac) / (2.0 * b)


def make_gaussian(theta0: float = 1.0) -> Equilibrium:
    """mu(v) = exp(-v^2/2), mu_hat(eta) = sqrt(2 pi) exp(-eta^2/2).

    Any positive theta0 is admissible; c0 is the smallest constant making the
    exponential envelope valid everywhere, c0 = sqrt(2 pi) exp(theta0^2/2).
    """
    c0 = float(SQRT_2PI * np.exp(0.5 * theta0**2))

    def mu_hat(eta):
        return SQRT_2PI * np.exp(-0.5 * np.asarray(eta, dtype=float) ** 2) + 0j

    def laplace_m(k, lam):
        return SQRT_2PI * _gauss_lap_term(lam, k)

    return Equilibrium(mu_hat, c0, float(theta0), "gaussian", laplace_m=laplace_m)


def make_two_stream(a: float = 3.0, theta0: float = 1.0) -> Equilibrium:
    """Counter-streaming pair mu(v) = (exp(-(v-a)^2/2) + exp(-(v+a)^2/2)) / 2.

    Same total mass as the Gaussian; mu_hat(eta) = sqrt(2 pi) exp(-eta^2/2) cos(a eta).
    """
    a = float(a)
    c0 = float(SQRT_2PI * np.exp(0.5 * theta0**2))

    def mu_hat(eta):
        eta = np.asarray(eta, dtype=float)
        return SQRT_2PI * np.exp(-0.5 * eta**2) * np.cos(a * eta) + 0j

    def laplace_m(k, lam):
        return 0.5 * SQRT_2PI * (
            _gauss_lap_term(lam, k, shift=a * k) + _gauss_lap_term(lam, k, shift=-a * k)
        )

    return Equilibrium(mu_hat, c0, float(theta0), "two_stream", params={"a": a},
                       laplace_m=laplace_m)


def make_table(eta: np.ndarray, values: np.ndarray,
               c0: float | None = None, theta0: float | None = None) -> Equilibrium:
    """Equilibrium from sampled mu_hat values.

    Samples are Hermitian-symmetrized, evaluated by linear interpolation on
    |eta| and extended by zero beyond the last sample.  If the envelope
    constants are not supplied they are fitted from the samples.
    """
    eta = np.asarray(eta, dtype=float)
    values = np.asarray(values, dtype=complex)
    if eta.ndim != 1 or eta.shape != values.shape:
        raise ValueError("table requires matching 1-d eta and value arrays")
    order = np.argsort(eta)
    eta, values = eta[order], values[order]

    # fold onto eta >= 0 with Hermitian averaging of any negative-side samples
    pos = eta >= 0
    eta_p = eta[pos].copy()
    val_p = values[pos].copy()
    for e, v in zip(eta[~pos], values[~pos]):
        i = np.searchsorted(eta_p, -e)
        if i < len(eta_p) and abs(eta_p[i] + e) < 1e-12 * max(1.0, abs(e)):
            val_p[i] = 0.5 * (val_p[i] + np.conj(v))
        else:
            eta_p = np.insert(eta_p, i, -e)
            val_p = np.insert(val_p, i, np.conj(v))
    if eta_p[0] > 1e-12:
        eta_p = np.insert(eta_p, 0, 0.0)
        val_p = np.insert(val_p, 0, val_p[0].real + 0j)
    val_p[0] = val_p[0].real + 0j  # Hermitian symmetry forces mu_hat(0) real

    if theta0 is None or c0 is None:
        mags = np.abs(val_p)
        big = mags > 1e-300
        if np.count_nonzero(big) >= 2:
            slope = np.polyfit(eta_p[big], np.log(mags[big]), 1)[0]
            theta0_fit = max(-slope, 1e-3)
        else:
            theta0_fit = 1.0
        theta0 = theta0 if theta0 is not None else float(theta0_fit)
        c0 = c0 if c0 is not None else float(max(np.max(mags * np.exp(theta0 * eta_p)), 1e-300))

    def mu_hat(x):
        x = np.asarray(x, dtype=float)
        mag = np.abs(x)
        re = np.interp(mag, eta_p, val_p.real, left=val_p[0].real, right=0.0)
        im = np.interp(mag, eta_p, val_p.imag, left=val_p[0].imag, right=0.0)
        return np.where(x >= 0, re + 1j * im, re - 1j * im)

    return Equilibrium(mu_hat, float(c0), float(theta0), "table")


# ---------------------------------------------------------------------------
# Laplace transform of the memory kernel m(t) = t mu_hat(k t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Composite-Simpson truncation for the Laplace integral.

    With t_max/step left as None both are chosen from the envelope constants so
    that the certified tail bound stays below tol/10.
    """

    t_max: float | None = None
    step: float | None = None
    tol: float = 1e-8


def laplace_tail_bound(eq: Equilibrium, k: int, lam: complex, t_max: float) -> float:
    """Bound on the truncated tail using |m(t)| <= c0 t exp(-theta0 |k| t)."""
    decay = eq.theta0 * abs(k) + min(np.real(lam), 0.0)
    if decay <= 0:
        return np.inf
    return float(eq.c0 * np.exp(-decay * t_max) * (t_max / decay + 1.0 / decay**2))


def _auto_t_max(eq: Equilibrium, k: int, lam: complex, tol: float) -> float:
    t_max = 2.0 / (eq.theta0 * abs(k))
    while laplace_tail_bound(eq, k, lam, t_max) >= 0.1 * tol and t_max < 1e6:
        t_max *= 1.3
    return t_max


def laplace_kernel_transform(eq: Equilibrium, k: int, lam,
                             quad: QuadratureSpec | None = None) -> np.ndarray:
    """L[t mu_hat(kt)](lambda), vectorized over lambda.

    Uses the closed form when the equilibrium provides one, otherwise composite
    Simpson on [0, t_max] with a step resolving both the envelope and the
    oscillation exp(-i Im(lambda) t).
    """
    if k == 0:
        raise ValueError("k must be a nonzero integer")
    lam = np.asarray(lam, dtype=complex)
    quad = quad or QuadratureSpec()
    min_re = float(np.min(lam.real)) if lam.size else 0.0
    if min_re <= -eq.theta0 * abs(k):
        raise DivergenceError(
            f"Re(lambda) = {min_re:g} <= -theta0*|k| = {-eq.theta0 * abs(k):g}")

    if eq.laplace_m is not None:
        return eq.laplace_m(k, lam)

    im_max = float(np.max(np.abs(lam.imag))) if lam.size else 0.0
    lam_ref = complex(min_re, im_max)
    t_max = quad.t_max if quad.t_max is not None else _auto_t_max(eq, k, lam_ref, quad.tol)
    tail = laplace_tail_bound(eq, k, lam_ref, t_max)
    if tail >= quad.tol:
        raise AccuracyError(
            f"tail bound {tail:.3g} exceeds tol {quad.tol:.3g} at t_max={t_max:g}")
    if quad.step is not None:
        step = quad.step
    else:
        step = min(0.05 / max(eq.theta0 * abs(k), 1.0), 0.5 / (1.0 + im_max), 0.05)
    n = int(np.ceil(t_max / step))
    n += n % 2
    t = np.linspace(0.0, t_max, n + 1)
    m = t * eq.mu_hat(k * t)
    w = np.ones(n + 1)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w *= (t[1] - t[0]) / 3.0
    flat = lam.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    chunk = max(1, int(4e6 // (n + 1)))
    wm = w * m
    for i in range(0, flat.size, chunk):
        block = flat[i:i + chunk]
        out[i:i + chunk] = np.exp(-np.outer(block, t)) @ wm
    return out.reshape(lam.shape) if lam.shape else out[()]


def laplace_symbol(eq: Equilibrium, k: int, lam, quad: QuadratureSpec | None = None):
    """Dispersion symbol D(lambda, k) = 1 + L[t mu_hat(kt)](lambda)."""
    return 1.0 + laplace_kernel_transform(eq, k, lam, quad)


# ---------------------------------------------------------------------------
# Stability margin on the imaginary axis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Sampling of the boundary line lambda = i tau."""

    n_tau: int = 2001
    tol: float = 1e-2


@dataclass(frozen=True)
class MarginReport:
    margin: float
    sampled_min: float
    tail_floor: float
    argmin_k: int
    argmin_tau: float
    symbol_constant: float  # fitted C with |L| <= C / (1 + k^2 + tau^2)


def penrose_scan(eq: Equilibrium, k_max: int, tau_max: float,
                 grid: GridSpec | None = None,
                 quad: QuadratureSpec | None = None) -> MarginReport:
    """Scan |D(i tau, k)| over 1 <= k <= k_max, |tau| <= tau_max.

    Negative k is covered by the Hermitian symmetry |D(i tau, -k)| =
    |D(-i tau, k)| together with the symmetric tau range.  The region outside
    the scan is certified by the decay |L| <= C (1 + k^2 + tau^2)^{-1} with C
    fitted on the computed samples.
    """
    if k_max < 1 or tau_max <= 0:
        raise ValueError("penrose_margin requires k_max >= 1 and tau_max > 0")
    grid = grid or GridSpec()
    taus = np.linspace(-tau_max, tau_max, grid.n_tau)
    best = (np.inf, 0, 0.0)
    c_fit = 0.0
    warned = False
    for k in range(1, k_max + 1):
        lap = laplace_kernel_transform(eq, k, 1j * taus, quad)
        mag = np.abs(1.0 + lap)
        i = int(np.argmin(mag))
        if mag[i] < best[0]:
            best = (float(mag[i]), k, float(taus[i]))
        c_fit = max(c_fit, float(np.max(np.abs(lap) * (1.0 + k * k + taus**2))))
        jump = float(np.max(np.abs(np.diff(mag))))
        if jump > grid.tol and not warned:
            warned = True
            warnings.warn(
                f"margin scan resolution: adjacent |D| samples differ by {jump:.3g} "
                f"(> tol {grid.tol:g}); refine n_tau", ResolutionWarning)
    tail_floor = 1.0 - c_fit / (1.0 + min((k_max + 1) ** 2, 1.0 + tau_max**2))
    return MarginReport(margin=min(best[0], tail_floor), sampled_min=best[0],
                        tail_floor=tail_floor, argmin_k=best[1], argmin_tau=best[2],
                        symbol_constant=c_fit)


def penrose_margin(eq: Equilibrium, k_max: int, tau_max: float,
                   grid: GridSpec | None = None,
                   quad: QuadratureSpec | None = None) -> float:
    return penrose_scan(eq, k_max, tau_max, grid, quad).margin
