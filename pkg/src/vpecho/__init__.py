"""Numerical laboratory for plasma echoes and Landau damping in 1D Vlasov-Poisson.

The pieces fit together as follows: an `Equilibrium` supplies the background
in Fourier velocity space and its dispersion symbol; `resolvent` builds the
kernel through which the linearized density responds to sources (by two
independent routes); `cascade` constructs the interacting wave hierarchy layer
by layer and synthesizes distribution and field; `direct` is an independent
spectral solver for the full perturbative dynamics used as ground truth;
`diagnostics` detects echoes, fits damping rates and verifies weighted
envelope bounds; `cli` orchestrates config-driven, byte-reproducible runs.
"""

from .cascade import (CascadeConfig, CascadeState, FieldHistory, InitialData,
                      LayerKey, ModeProfile, accumulate_source, advance_layer,
                      assemble_source, build_cascade, init_layer_one, jbracket,
                      synthesize_distribution, synthesize_field,
                      synthesize_field_history, update_density, update_field,
                      update_profile)
from .config import ExperimentConfig, config_from_dict, load_config
from .diagnostics import (BoundProfile, DecayFit, EchoEvent, LayerBoundReport,
                          detect_echoes, estimate_echo_orders, fit_field_decay,
                          fit_sigma, predicted_echo_times, verify_layer_bound)
from .direct import (DirectRunResult, SpectralState, commensurate_grid,
                     field_from_state, free_transport_step, init_from_modes,
                     nonlinear_step, run, run_direct)
from .equilibrium import (Equilibrium, GridSpec, QuadratureSpec, dv_mu_hat,
                          laplace_symbol, make_gaussian, make_table,
                          make_two_stream, penrose_margin, penrose_scan)
from .grids import FreqGrid, TimeGrid
from .resolvent import (ContourSpec, ResolventKernel, apply_resolvent,
                        kernel_contour, kernel_volterra)

__version__ = "0.1.0"

__all__ = [
    "BoundProfile", "CascadeConfig", "CascadeState", "ContourSpec", "DecayFit",
    "DirectRunResult", "EchoEvent", "Equilibrium", "ExperimentConfig",
    "FieldHistory", "FreqGrid", "GridSpec", "InitialData", "LayerBoundReport",
    "LayerKey", "ModeProfile", "QuadratureSpec", "ResolventKernel",
    "SpectralState", "TimeGrid", "accumulate_source", "advance_layer",
    "apply_resolvent", "assemble_source", "build_cascade", "commensurate_grid",
    "config_from_dict", "detect_echoes", "dv_mu_hat", "estimate_echo_orders",
    "field_from_state", "fit_field_decay", "fit_sigma", "free_transport_step",
    "init_from_modes", "init_layer_one", "jbracket", "kernel_contour",
    "kernel_volterra", "laplace_symbol", "load_config", "make_gaussian",
    "make_table", "make_two_stream", "nonlinear_step", "penrose_margin",
    "penrose_scan", "predicted_echo_times", "run", "run_direct",
    "synthesize_distribution", "synthesize_field", "synthesize_field_history",
    "update_density", "update_field", "update_profile", "verify_layer_bound",
]
