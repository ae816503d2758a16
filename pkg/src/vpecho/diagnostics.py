"""Echo detection, damping-rate fits and weighted-envelope verification."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .cascade import CascadeState, jbracket
from .errors import InsufficientWindowError


@dataclass(frozen=True)
class BoundProfile:
    """Time- and layer-dependent weight rate lam_p(t) = lambda0 + <t>^-delta + p^-delta."""

    lambda0: float
    delta: float = 0.1
    sigma: float | None = None    # time-decay exponent, fitted per run when None

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")

    def rate(self, p: int, t) -> np.ndarray:
        return self.lambda0 + jbracket(t) ** (-self.delta) + float(p) ** (-self.delta)


@dataclass(frozen=True)
class EchoEvent:
    mode: int                    # physical spatial wavenumber
    time: float
    amplitude: float
    predicted_time: float | None
    order: int | None = None     # filled by amplitude-ratio estimation across runs

    @property
    def matched(self) -> bool:
        return self.predicted_time is not None


def predicted_echo_times(wave_modes, K: int, L: int, depth: int = 2):
    """Candidate burst times from combining up to `depth` waves.

    A combination with index sums (Sk, Se) radiates near t = L Se / (K Sk);
    combinations with Sk = 0 carry no field and nonpositive times never occur.
    Returns a list of (mode, time, contributors) sorted by time, unique in
    (mode, time); `mode` is the physical wavenumber K * Sk.
    """
    waves = sorted({(int(k), int(eta)) for k, eta in wave_modes})
    found = {}
    for r in range(1, depth + 1):
        for combo in combinations_with_replacement(waves, r):
            sk = sum(k for k, _ in combo)
            se = sum(eta for _, eta in combo)
            if sk == 0:
                continue
            tau = L * se / (K * sk)
            if tau <= 0:
                continue
            key = (K * sk, round(tau, 12))
            if key not in found:
                found[key] = combo
    out = [(mode, tau, found[(mode, tau)]) for (mode, tau) in sorted(found, key=lambda x: (x[1], x[0]))]
    return out


def _local_maxima(times: np.ndarray, amps: np.ndarray, floor: float):
    for i in range(1, len(amps) - 1):
        if amps[i] > floor and amps[i] > amps[i - 1] and amps[i] >= amps[i + 1]:
            yield float(times[i]), float(amps[i])


def detect_echoes(times: np.ndarray, kprimes: np.ndarray, fields: np.ndarray,
                  noise_floor: float, predicted=None,
                  window: float | None = None) -> tuple[list[EchoEvent], list[EchoEvent]]:
    """Local maxima of |E| per mode above noise_floor, matched to predictions.

    `fields` has shape (n_modes, n_times).  Matching window defaults to
    max(5 dt, 2% of the horizon).  Returns (matched, unmatched) event lists.
    """
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0] if len(times) > 1 else 0.0
    if window is None:
        window = max(5.0 * dt, 0.02 * (times[-1] - times[0]))
    predicted = predicted or []
    matched, unmatched = [], []
    for i, mode in enumerate(kprimes):
        if mode == 0:
            continue
        for t_peak, amp in _local_maxima(times, np.abs(fields[i]), noise_floor):
            best = None
            for pmode, ptime, _ in predicted:
                if pmode == mode and abs(ptime - t_peak) <= window:
                    if best is None or abs(ptime - t_peak) < abs(best - t_peak):
                        best = ptime
            event = EchoEvent(int(mode), t_peak, amp, best)
            (matched if best is not None else unmatched).append(event)
    return matched, unmatched


def estimate_echo_orders(events: list[EchoEvent], events_half: list[EchoEvent],
                         window: float) -> list[EchoEvent]:
    """Order estimates from the amplitude ratio between an epsilon run and an
    epsilon/2 run: a burst of order p shrinks by 2^p."""
    out = []
    for ev in events:
        ratio = None
        for ev2 in events_half:
            if ev2.mode == ev.mode and abs(ev2.time - ev.time) <= window:
                ratio = ev.amplitude / ev2.amplitude if ev2.amplitude > 0 else None
                break
        order = int(round(np.log2(ratio))) if ratio and ratio > 0 else None
        out.append(EchoEvent(ev.mode, ev.time, ev.amplitude, ev.predicted_time, order))
    return out


@dataclass(frozen=True)
class DecayFit:
    rate: float
    prefactor: float
    residual: float               # sqrt(1 - R^2) of the log-linear fit


def fit_field_decay(times: np.ndarray, sup_field: np.ndarray,
                    window: tuple[float, float], peaks_only: bool = False) -> DecayFit:
    """Least-squares fit log sup_x|E| ~ log C - rate * t over the window.

    `residual` is the RMS misfit of the log-amplitudes relative to their
    centered RMS, i.e. sqrt(1 - R^2); small values mean a clean exponential.
    For real oscillating fields |E| passes near zero twice per period; with
    peaks_only=True the fit uses the local maxima of the windowed signal (the
    usual way a damping rate is read off a ringing field).
    """
    times = np.asarray(times, dtype=float)
    sup_field = np.asarray(sup_field, dtype=float)
    mask = (times >= window[0]) & (times <= window[1]) & (sup_field > 0)
    if peaks_only and np.count_nonzero(mask) >= 3:
        idx = np.flatnonzero(mask)
        inner = idx[1:-1]
        is_peak = (sup_field[inner] > sup_field[inner - 1]) & \
                  (sup_field[inner] >= sup_field[inner + 1])
        peak_mask = np.zeros_like(mask)
        peak_mask[inner[is_peak]] = True
        if np.count_nonzero(peak_mask) >= 4:
            mask = peak_mask
    if np.count_nonzero(mask) < 4:
        raise InsufficientWindowError(
            f"only {np.count_nonzero(mask)} usable samples in window {window}")
    t = times[mask]
    y = np.log(sup_field[mask])
    coef = np.polyfit(t, y, 1)
    fit = np.polyval(coef, t)
    denom = float(np.sqrt(np.mean((y - y.mean()) ** 2)))
    if denom == 0.0:
        residual = 0.0
    else:
        residual = float(np.sqrt(np.mean((y - fit) ** 2)) / denom)
    return DecayFit(rate=float(-coef[0]), prefactor=float(np.exp(coef[1])),
                    residual=residual)


@dataclass(frozen=True)
class LayerBoundReport:
    p: int
    m_profile: float              # sup |f| e^{lambda0 <k,eta,p,eta'>} <k>
    m_profile_decaying: float     # same with the time/layer dependent rate lam_p(t)
    m_density: float              # sup |rho| e^{lam_p(t) <k,eta,p,L eta - K k t>} <t>^sigma


def fit_sigma(state: CascadeState, floor: float = 1e-300) -> float:
    """Time-decay exponent of the density envelope: slope of log sup_rho
    against log <t> over the second half of the run."""
    t = state.cfg.t_grid.points
    sup_rho = np.zeros_like(t)
    for p in state.layers:
        for layer in state.layers[p].values():
            np.maximum(sup_rho, np.abs(layer.history.rho), out=sup_rho)
    half = len(t) // 2
    mask = sup_rho[half:] > floor
    if np.count_nonzero(mask) < 4:
        return 1.0
    slope = np.polyfit(np.log(jbracket(t[half:][mask])),
                       np.log(sup_rho[half:][mask]), 1)[0]
    return float(max(-slope, 0.0))


def verify_layer_bound(state: CascadeState,
                       profile: BoundProfile) -> list[LayerBoundReport]:
    """Weighted sup-norm constants per layer.

    m_profile uses the flat weight e^{lambda0 <k,eta,p,eta'>} <k>; bounded
    M_p^{1/p} across p is the empirical signature that the hierarchy stays a
    geometric series.  The density constant carries the decaying rate
    lam_p(t) along the moving point plus the fitted <t>^sigma factor.
    """
    cfg = state.cfg
    t = cfg.t_grid.points
    etap = cfg.etap_grid.points
    sigma = profile.sigma if profile.sigma is not None else fit_sigma(state)
    reports = []
    for p in sorted(state.layers):
        m_f = m_fd = m_rho = 0.0
        lam_p = profile.rate(p, t)
        for (k, eta), layer in state.layers[p].items():
            w_eta = jbracket(k, eta, p, etap)[None, :]
            k_fac = jbracket(k)
            vals = np.abs(layer.profile.values)
            m_f = max(m_f, float(np.max(vals * np.exp(profile.lambda0 * w_eta)) * k_fac))
            m_fd = max(m_fd, float(np.max(vals * np.exp(lam_p[:, None] * w_eta)) * k_fac))
            w_mov = jbracket(k, eta, p, cfg.L * eta - cfg.K * k * t)
            rho_w = np.abs(layer.history.rho) * np.exp(lam_p * w_mov) * jbracket(t) ** sigma
            m_rho = max(m_rho, float(rho_w.max()))
        reports.append(LayerBoundReport(p, m_f, m_fd, m_rho))
    return reports
