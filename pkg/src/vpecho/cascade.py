"""Layer-by-layer construction of the interacting wave hierarchy.

Initial data is a family of oscillatory modes indexed by (k, eta) whose
profiles are sampled in the velocity-frequency variable eta'.  Layer p collects
everything of order epsilon^p: layer one is the linear response of each datum,
and each higher layer is driven by the quadratic interaction of all lower-layer
pairs whose indices sum to its own.  Per key the update chain is

    source  S(t, eta') = S(0, eta') + int_0^t N(s, eta') ds
    density rho(t)     = S(t, x(t)) + int_0^t G(t-s) S(s, x(s)) ds,
                         x(s) = K k s - L eta   (moving evaluation point)
    field   E(t)       = rho(t) / (i K k)            (zero for k = 0)
    profile f(t, eta') = S(t, eta') - int_0^t E(s) dv_mu_hat(eta' + L eta - K k s) ds

with G the resolvent kernel for wavenumber K k.  Layers are stored without
epsilon powers; synthesis weights layer p by epsilon^p, so re-scaling epsilon
is exact re-weighting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.ndimage import map_coordinates

from .equilibrium import Equilibrium
from .interp import edge_magnitude, sample_moving, shift_rows
from .errors import (BoundViolationError, GridMismatchError,
                     IncompleteLayerError, InterpolationRangeWarning)
from .grids import FreqGrid, TimeGrid
from .resolvent import ResolventKernel, apply_resolvent, kernel_volterra


def jbracket(*components) -> np.ndarray:
    """sqrt(1 + sum of squares); the index weight used throughout."""
    total = 1.0
    for c in components:
        total = total + np.square(np.asarray(c, dtype=float))
    return np.sqrt(total)


@dataclass(frozen=True)
class CascadeConfig:
    K: int
    L: int
    epsilon: float
    lambda0: float
    k_max: int
    eta_max: int
    p_max: int
    etap_grid: FreqGrid
    t_grid: TimeGrid
    l_over_k: float = 1.0        # enforces L <= l_over_k * K
    prune_floor: float = 1e-14
    kernel_oversample: int = 8
    time_refine: int = 1         # internal quadrature refinement; outputs stay on t_grid

    def __post_init__(self):
        if self.time_refine < 1:
            raise ValueError("time_refine must be a positive integer")
        if self.K < 1 or self.L < 0:
            raise ValueError("K >= 1 and L >= 0 required")
        if self.L > self.l_over_k * self.K + 1e-12:
            raise ValueError(
                f"L = {self.L} exceeds {self.l_over_k:g} * K = {self.l_over_k * self.K:g}")
        if self.epsilon <= 0 or self.lambda0 <= 0:
            raise ValueError("epsilon and lambda0 must be positive")
        if self.k_max < 1 or self.eta_max < 0 or self.p_max < 1:
            raise ValueError("k_max >= 1, eta_max >= 0, p_max >= 1 required")


class LayerKey(NamedTuple):
    k: int
    eta: int
    p: int


@dataclass
class ModeProfile:
    key: LayerKey
    values: np.ndarray           # (n_t, n_eta) complex


@dataclass
class FieldHistory:
    key: LayerKey
    rho: np.ndarray              # (n_t,) complex
    field: np.ndarray            # (n_t,) complex


@dataclass
class Layer:
    profile: ModeProfile
    history: FieldHistory


@dataclass
class InitialData:
    """Mode coefficients on the eta' grid, bounded by the admissible envelope.

    `scales` records modes of the exact form scale * envelope, letting them be
    re-evaluated on refined grids without interpolation error.
    """

    grid: FreqGrid
    lambda0: float
    modes: dict[tuple[int, int], np.ndarray]
    scales: dict[tuple[int, int], complex] = field(default_factory=dict)

    @staticmethod
    def envelope(lambda0: float, k: int, eta: int, etap: np.ndarray) -> np.ndarray:
        return np.exp(-2.0 * lambda0 * jbracket(k, eta, etap))

    @classmethod
    def saturating(cls, cfg: CascadeConfig) -> "InitialData":
        """Envelope-saturating coefficients for every retained (k, eta), k != 0."""
        etap = cfg.etap_grid.points
        modes, scales = {}, {}
        for k in range(-cfg.k_max, cfg.k_max + 1):
            if k == 0:
                continue
            for eta in range(-cfg.eta_max, cfg.eta_max + 1):
                modes[(k, eta)] = cls.envelope(cfg.lambda0, k, eta, etap).astype(complex)
                scales[(k, eta)] = 1.0 + 0.0j
        return cls(cfg.etap_grid, cfg.lambda0, modes, scales)

    @classmethod
    def from_modes(cls, cfg: CascadeConfig, entries, symmetrize: bool = True) -> "InitialData":
        """Sparse list of (k, eta, scale); each profile is scale times the
        saturating envelope.  With symmetrize=True the conjugate partner
        (-k, -eta) is added so the physical datum is real."""
        etap = cfg.etap_grid.points
        scales: dict[tuple[int, int], complex] = {}
        for k, eta, scale in entries:
            k, eta = int(k), int(eta)
            if k == 0:
                raise ValueError("initial data requires k != 0")
            scales[(k, eta)] = scales.get((k, eta), 0.0) + complex(scale)
            if symmetrize and (k, eta) != (-k, -eta):
                scales[(-k, -eta)] = scales.get((-k, -eta), 0.0) + np.conj(complex(scale))
        scales = dict(sorted(scales.items()))
        modes = {ke: s * cls.envelope(cfg.lambda0, *ke, etap)
                 for ke, s in scales.items()}
        return cls(cfg.etap_grid, cfg.lambda0, modes, scales)

    def profile_on(self, etap: np.ndarray, k: int, eta: int) -> np.ndarray:
        """Coefficient profile of mode (k, eta) at arbitrary eta' points."""
        if (k, eta) in self.scales:
            return self.scales[(k, eta)] * self.envelope(self.lambda0, k, eta, etap)
        vals = self.modes[(k, eta)]
        re = np.interp(etap, self.grid.points, vals.real, left=0.0, right=0.0)
        im = np.interp(etap, self.grid.points, vals.imag, left=0.0, right=0.0)
        return re + 1j * im

    def validate(self):
        etap = self.grid.points
        for (k, eta), vals in self.modes.items():
            if k == 0:
                raise BoundViolationError("initial data contains a k = 0 mode")
            if vals.shape != etap.shape:
                raise GridMismatchError(f"mode {(k, eta)} not sampled on the eta' grid")
            bound = self.envelope(self.lambda0, k, eta, etap)
            excess = np.abs(vals) - bound * (1.0 + 1e-9)
            if np.any(excess > 0):
                j = int(np.argmax(excess))
                raise BoundViolationError(
                    f"mode {(k, eta)} exceeds the envelope at eta'={etap[j]:g}: "
                    f"|f0|={abs(vals[j]):.3e} > {bound[j]:.3e}")


@dataclass
class CascadeState:
    cfg: CascadeConfig
    eq: Equilibrium
    data: InitialData
    layers: dict[int, dict[tuple[int, int], Layer]] = field(default_factory=dict)
    kernels: dict[int, ResolventKernel] = field(default_factory=dict)
    stats: dict = field(default_factory=lambda: {
        "shift_out_of_range": 0, "moving_out_of_range": 0, "pruned": 0})

    def complete_through(self, p: int) -> bool:
        return all(q in self.layers for q in range(1, p + 1))

    def kernel_for(self, k: int) -> ResolventKernel | None:
        """Resolvent kernel for wavenumber K*k; conjugate symmetry covers k < 0."""
        m = self.cfg.K * k
        if m == 0:
            return None
        if m not in self.kernels:
            if -m in self.kernels:
                base = self.kernels[-m]
                self.kernels[m] = ResolventKernel(
                    m, base.t_grid, np.conj(base.values), base.fitted_c1,
                    base.fitted_theta1, base.residual)
            else:
                self.kernels[m] = kernel_volterra(
                    self.eq, m, self.cfg.t_grid, self.cfg.kernel_oversample)
        return self.kernels[m]


# ---------------------------------------------------------------------------
# per-key operations
# ---------------------------------------------------------------------------

def init_layer_one(data: InitialData) -> dict[tuple[int, int], np.ndarray]:
    """Time-independent layer-one sources: S(t, eta') = f0(eta')."""
    data.validate()
    return dict(sorted(data.modes.items()))


def _interaction_pairs(state: CascadeState, key: LayerKey) -> Iterator[
        tuple[np.ndarray, ModeProfile, int, int]]:
    """Ordered pairs (field of (k1,eta1,p1), profile of (k2,eta2,p2)) with
    k1+k2 = k, eta1+eta2 = eta, p1+p2 = p; k1 = 0 terms vanish and are skipped."""
    for p1 in range(1, key.p):
        p2 = key.p - p1
        lower1 = state.layers.get(p1)
        lower2 = state.layers.get(p2)
        if lower1 is None or lower2 is None:
            raise IncompleteLayerError(f"layers below p={key.p} are not complete")
        for (k1, eta1) in sorted(lower1):
            if k1 == 0:
                continue
            mate = (key.k - k1, key.eta - eta1)
            if mate in lower2:
                yield (lower1[(k1, eta1)].history.field,
                       lower2[mate].profile, k1, eta1)


def _assemble_source_all(state: CascadeState, key: LayerKey) -> np.ndarray:
    """Quadratic interaction term N(t, eta') for all grid times at once.

    Moving the quadratic coupling to the right-hand side of the per-key
    evolution equation carries a minus sign, hence the overall -i (a +i here
    flips the sign of every even layer against the direct solver).
    """
    cfg = state.cfg
    t = cfg.t_grid.points
    etap = cfg.etap_grid.points
    weight = etap[None, :] + cfg.L * key.eta - cfg.K * key.k * t[:, None]
    total = np.zeros((len(t), len(etap)), dtype=complex)
    for e1, prof2, k1, eta1 in _interaction_pairs(state, key):
        shifted, hits = shift_rows(prof2.values, cfg.L * eta1 - cfg.K * k1 * t,
                                    cfg.etap_grid)
        state.stats["shift_out_of_range"] += hits
        total += e1[:, None] * shifted
    return -1j * weight * total


def assemble_source(state: CascadeState, key: LayerKey, t_index: int) -> np.ndarray:
    """N(t_i, eta') for a single grid time (vectorized form used by advance_layer)."""
    return _assemble_source_all(state, key)[t_index]


def accumulate_source(key: LayerKey, n_hat: np.ndarray, t_grid: TimeGrid) -> np.ndarray:
    """Running time integral of the interaction term (layers p >= 2 start at zero)."""
    if n_hat.shape[0] != len(t_grid):
        raise GridMismatchError("interaction history not sampled on the time grid")
    return cumulative_trapezoid(n_hat, dx=t_grid.dt, axis=0, initial=0.0)


def update_density(kern: ResolventKernel | None, key: LayerKey, s_vals: np.ndarray,
                   cfg: CascadeConfig, state: CascadeState | None = None) -> np.ndarray:
    """Density along the moving point, resolvent-corrected for k != 0."""
    t = cfg.t_grid.points
    positions = cfg.K * key.k * t - cfg.L * key.eta
    s_mov, hits = sample_moving(s_vals, positions, cfg.etap_grid)
    if state is not None:
        state.stats["moving_out_of_range"] += hits
    if hits and edge_magnitude(s_vals) > 1e-6 * (np.abs(s_vals).max() + 1e-300):
        warnings.warn(
            f"{tuple(key)}: moving point left the eta' grid while the source "
            "was not yet negligible; enlarge the grid range",
            InterpolationRangeWarning, stacklevel=2)
    if key.k == 0:
        if kern is not None:
            raise ValueError("k = 0 density takes no resolvent kernel")
        return s_mov
    if kern is None:
        raise ValueError("k != 0 density requires the resolvent kernel for K*k")
    return apply_resolvent(kern, s_mov)


def update_field(key: LayerKey, rho: np.ndarray, cfg: CascadeConfig) -> np.ndarray:
    """E = rho / (i K k); the torus field has no mean mode, so k = 0 gives zero."""
    if key.k == 0:
        return np.zeros_like(rho)
    return rho / (1j * cfg.K * key.k)


def update_profile(key: LayerKey, s_vals: np.ndarray, field_vals: np.ndarray,
                   eq: Equilibrium, cfg: CascadeConfig) -> ModeProfile:
    t = cfg.t_grid.points
    etap = cfg.etap_grid.points
    arg = etap[None, :] + cfg.L * key.eta - cfg.K * key.k * t[:, None]
    integrand = field_vals[:, None] * eq.dv_mu_hat(arg)
    correction = cumulative_trapezoid(integrand, dx=cfg.t_grid.dt, axis=0, initial=0.0)
    return ModeProfile(key, s_vals - correction)


def _complete_key(state: CascadeState, key: LayerKey, s_vals: np.ndarray) -> Layer:
    kern = state.kernel_for(key.k)
    rho = update_density(kern, key, s_vals, state.cfg, state)
    e_vals = update_field(key, rho, state.cfg)
    profile = update_profile(key, s_vals, e_vals, state.eq, state.cfg)
    return Layer(profile, FieldHistory(key, rho, e_vals))


def advance_layer(state: CascadeState, p: int) -> CascadeState:
    """Build every key of layer p from the completed layers below it."""
    cfg = state.cfg
    if p < 1 or p > cfg.p_max:
        raise ValueError(f"layer index p={p} outside 1..p_max")
    if not state.complete_through(p - 1):
        raise IncompleteLayerError(f"layers below p={p} are not complete")
    n_t = len(cfg.t_grid)
    entries: dict[tuple[int, int], Layer] = {}
    if p == 1:
        for (k, eta), seed in init_layer_one(state.data).items():
            key = LayerKey(k, eta, 1)
            s_vals = np.repeat(seed[None, :], n_t, axis=0)
            entries[(k, eta)] = _complete_key(state, key, s_vals)
    else:
        candidates = set()
        for p1 in range(1, p):
            for (k1, eta1) in state.layers[p1]:
                if k1 == 0:
                    continue
                for (k2, eta2) in state.layers[p - p1]:
                    candidates.add((k1 + k2, eta1 + eta2))
        for (k, eta) in sorted(candidates):
            if abs(k) > p * cfg.k_max or abs(eta) > p * cfg.eta_max:
                continue
            key = LayerKey(k, eta, p)
            n_hat = _assemble_source_all(state, key)
            s_vals = accumulate_source(key, n_hat, cfg.t_grid)
            if np.abs(s_vals).max() < cfg.prune_floor:
                state.stats["pruned"] += 1
                continue
            entries[(k, eta)] = _complete_key(state, key, s_vals)
    state.layers[p] = entries
    return state


def build_cascade(eq: Equilibrium, cfg: CascadeConfig, data: InitialData) -> CascadeState:
    if cfg.lambda0 > eq.theta0 / 4.0 + 1e-12:
        raise ValueError(
            f"lambda0 = {cfg.lambda0:g} exceeds theta0/4 = {eq.theta0 / 4.0:g}")
    if data.grid != cfg.etap_grid:
        raise GridMismatchError("initial data grid differs from the cascade grid")
    if cfg.time_refine > 1:
        return _build_refined(eq, cfg, data)
    state = CascadeState(cfg, eq, data)
    for p in range(1, cfg.p_max + 1):
        advance_layer(state, p)
    return state


def _build_refined(eq: Equilibrium, cfg: CascadeConfig, data: InitialData) -> CascadeState:
    """Run the whole build on a time_refine-times finer grid, then decimate.

    Every stored history stays on cfg.t_grid; the finer internal grid only
    reduces the quadrature error of the time integrals and convolutions.
    """
    r = cfg.time_refine
    fine_cfg = replace(cfg, t_grid=cfg.t_grid.refined(r), time_refine=1)
    fine = build_cascade(eq, fine_cfg, data)
    state = CascadeState(cfg, eq, data, stats=fine.stats)
    for p, entries in fine.layers.items():
        state.layers[p] = {
            ke: Layer(ModeProfile(l.profile.key, l.profile.values[::r].copy()),
                      FieldHistory(l.history.key, l.history.rho[::r].copy(),
                                   l.history.field[::r].copy()))
            for ke, l in entries.items()}
    for m, kern in fine.kernels.items():
        state.kernels[m] = ResolventKernel(m, cfg.t_grid, kern.values[::r].copy(),
                                           kern.fitted_c1, kern.fitted_theta1,
                                           kern.residual)
    return state


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

def synthesize_distribution(state: CascadeState, t: float, kprime: int,
                            etap: float, epsilon: float | None = None) -> complex:
    """Truncated hierarchy sum for f_hat(t, kprime, eta'); zero off the K-lattice."""
    cfg = state.cfg
    if kprime % cfg.K != 0:
        return 0.0 + 0.0j
    k = kprime // cfg.K
    eps = cfg.epsilon if epsilon is None else epsilon
    row = t / cfg.t_grid.dt
    total = 0.0 + 0.0j
    for p in range(1, cfg.p_max + 1):
        if p not in state.layers:
            raise IncompleteLayerError(f"layer p={p} has not been built")
        for (kk, eta), layer in state.layers[p].items():
            if kk != k:
                continue
            x = etap - cfg.L * eta + cfg.K * k * t
            col = cfg.etap_grid.float_index(x)
            val = map_coordinates(layer.profile.values,
                                  [[row], [col]], order=3,
                                  mode="grid-constant", cval=0.0)
            total += eps**p * complex(val[0])
    return total


@dataclass
class FieldSynthesis:
    times: np.ndarray
    modes: np.ndarray            # physical wavenumbers K*k, k != 0
    amplitudes: np.ndarray       # (n_t, n_modes) complex

    def sup_x_bound(self) -> np.ndarray:
        """Triangle-inequality bound sum_k |E_k(t)| on sup_x |E(t, x)|."""
        return np.abs(self.amplitudes).sum(axis=1)

    def on_x_grid(self, n_x: int = 256) -> tuple[np.ndarray, np.ndarray]:
        x = 2.0 * np.pi * np.arange(n_x) / n_x
        waves = np.exp(1j * np.outer(self.modes, x))
        return x, self.amplitudes @ waves

    def sup_x(self, n_x: int = 256) -> np.ndarray:
        _, e_x = self.on_x_grid(n_x)
        return np.abs(e_x.real).max(axis=1)

    def max_imag(self, n_x: int = 256) -> float:
        _, e_x = self.on_x_grid(n_x)
        return float(np.abs(e_x.imag).max())


def synthesize_field_history(state: CascadeState,
                             epsilon: float | None = None) -> FieldSynthesis:
    cfg = state.cfg
    eps = cfg.epsilon if epsilon is None else epsilon
    mode_ks = sorted({kk for p in state.layers for (kk, _) in state.layers[p] if kk != 0})
    amps = np.zeros((len(cfg.t_grid), len(mode_ks)), dtype=complex)
    col = {kk: j for j, kk in enumerate(mode_ks)}
    for p in range(1, cfg.p_max + 1):
        for (kk, eta), layer in state.layers.get(p, {}).items():
            if kk == 0:
                continue
            amps[:, col[kk]] += eps**p * layer.history.field
    return FieldSynthesis(cfg.t_grid.points.copy(),
                          cfg.K * np.asarray(mode_ks), amps)


def synthesize_field(state: CascadeState, t: float,
                     epsilon: float | None = None) -> dict[int, complex]:
    """Map from physical mode K*k to the synthesized field amplitude at time t."""
    syn = synthesize_field_history(state, epsilon)
    row = t / state.cfg.t_grid.dt
    out = {}
    for j, mode in enumerate(syn.modes):
        re = map_coordinates(syn.amplitudes[:, j].real, [[row]], order=3,
                             mode="nearest")
        im = map_coordinates(syn.amplitudes[:, j].imag, [[row]], order=3,
                             mode="nearest")
        out[int(mode)] = complex(re[0] + 1j * im[0])
    return out
