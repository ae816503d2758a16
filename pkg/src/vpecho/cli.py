"""Command-line entry point: config-driven experiment orchestration.

Subcommands: penrose, kernel, cascade, direct, compare, echoes, verify-bounds.
Every run echoes its fully resolved configuration into the output directory
and writes byte-stable artifacts (rerunning with the same config reproduces
identical files).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import cascade as casc
from . import diagnostics as diag
from . import direct as drct
from .config import ExperimentConfig, load_config
from .equilibrium import GridSpec, penrose_scan
from .errors import VpechoError
from .io import write_csv, write_json, write_snapshot
from .resolvent import ContourSpec, kernel_contour, kernel_volterra

MODES = ("penrose", "kernel", "cascade", "direct", "compare", "echoes", "verify-bounds")


def export(results: dict, out_dir) -> list[Path]:
    """Write each result artifact into out_dir; returns the written paths."""
    out_dir = Path(out_dir)
    written = []
    for name, (kind, payload) in results.items():
        if kind == "json":
            path = out_dir / f"{name}.json"
            write_json(path, payload)
        elif kind == "csv":
            path = out_dir / f"{name}.csv"
            write_csv(path, *payload)
        elif kind == "snapshot":
            path = out_dir / f"{name}.bin"
            write_snapshot(path, *payload)
        else:
            raise ValueError(f"unknown artifact kind {kind!r}")
        written.append(path)
    return written


def _sup_x_history(times, kprimes, fields, x_points: int):
    nz = kprimes != 0
    waves = np.exp(1j * np.outer(kprimes[nz], 2.0 * np.pi * np.arange(x_points) / x_points))
    e_x = fields[nz].T @ waves
    return np.abs(e_x.real).max(axis=1)


def _run_penrose(cfg: ExperimentConfig, tol: float) -> dict:
    eq = cfg.make_equilibrium()
    report = penrose_scan(eq, cfg["penrose_k_max"], cfg["penrose_tau_max"],
                          GridSpec(n_tau=cfg["penrose_n_tau"], tol=max(tol, 1e-3) * 10))
    payload = {"margin": report.margin, "sampled_min": report.sampled_min,
               "tail_floor": report.tail_floor, "argmin_k": report.argmin_k,
               "argmin_tau": report.argmin_tau,
               "symbol_constant": report.symbol_constant,
               "equilibrium": cfg["equilibrium"]}
    return {"penrose": ("json", payload)}


def _run_kernel(cfg: ExperimentConfig, threads: int, tol: float) -> dict:
    eq = cfg.make_equilibrium()
    ccfg = cfg.make_cascade_config()
    k_list = list(cfg["kernel_k_list"])
    # keep the refined Volterra step below ~3e-3 so its quadrature error stays
    # under the route-agreement tolerance
    oversample = max(ccfg.kernel_oversample, int(np.ceil(ccfg.t_grid.dt / 3e-3)))

    def build(k):
        kern = kernel_volterra(eq, k, ccfg.t_grid, oversample)
        route = kernel_contour(eq, k, ccfg.t_grid.points, ContourSpec(tol=tol / 10))
        rel = float(np.abs(route - kern.values).max()
                    / max(np.abs(kern.values).max(), 1e-300))
        return kern, rel

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(build, k_list))
    else:
        built = [build(k) for k in k_list]

    rows = []
    fits = []
    for (kern, rel), k in zip(built, k_list):
        env = kern.envelope(ccfg.t_grid.points)
        for t, g, e in zip(ccfg.t_grid.points, kern.values, env):
            rows.append((k, t, g.real, g.imag, e))
        fits.append({"k": k, "fitted_c1": kern.fitted_c1,
                     "fitted_theta1": kern.fitted_theta1,
                     "volterra_residual": kern.residual,
                     "route_rel_diff": rel})
    return {"kernel": ("csv", (["k", "t", "re_G", "im_G", "envelope_bound"], rows)),
            "kernel_fits": ("json", {"kernels": fits})}


def _cascade_artifacts(cfg: ExperimentConfig, state, syn) -> dict:
    layer_rows = []
    for p in sorted(state.layers):
        for (k, eta), layer in state.layers[p].items():
            for i, t in enumerate(state.cfg.t_grid.points):
                rho, e = layer.history.rho[i], layer.history.field[i]
                layer_rows.append((k, eta, p, t, rho.real, rho.imag, e.real, e.imag))
    sup = syn.sup_x(cfg["x_points"])
    field_rows = []
    for i, t in enumerate(syn.times):
        for j, mode in enumerate(syn.modes):
            a = syn.amplitudes[i, j]
            field_rows.append((t, int(mode), a.real, a.imag, sup[i]))
    info = {"layer_counts": {str(p): len(state.layers[p]) for p in state.layers},
            "stats": state.stats,
            "max_imag_on_x_grid": syn.max_imag(cfg["x_points"])}
    return {
        "layers": ("csv", (["k", "eta", "p", "t", "re_rho", "im_rho", "re_E", "im_E"],
                           layer_rows)),
        "field": ("csv", (["t", "mode", "re_E", "im_E", "sup_x_E"], field_rows)),
        "cascade": ("json", info),
    }


def _run_cascade(cfg: ExperimentConfig) -> tuple[dict, object, object]:
    eq = cfg.make_equilibrium()
    ccfg = cfg.make_cascade_config()
    data = cfg.make_initial_data(ccfg)
    state = casc.build_cascade(eq, ccfg, data)
    syn = casc.synthesize_field_history(state)
    return _cascade_artifacts(cfg, state, syn), state, syn


def _direct_artifacts(cfg: ExperimentConfig, res) -> dict:
    rows = []
    for i, t in enumerate(res.times):
        for j, kp in enumerate(res.kprimes):
            if kp == 0:
                continue
            e = res.fields[j, i]
            rows.append((t, int(kp), e.real, e.imag))
    out = {"direct_field": ("csv", (["t", "k_prime", "re_E", "im_E"], rows)),
           "direct": ("json", {"mass_drift": res.mass_drift,
                               "hermitian_defect": res.hermitian_defect,
                               "n_snapshots": len(res.snapshots)})}
    for i, (t, values) in enumerate(res.snapshots):
        kprimes = res.kprimes
        eta = np.linspace(-cfg["etap_range"], cfg["etap_range"], values.shape[1])
        out[f"snapshot_{i:04d}"] = ("snapshot", (t, kprimes, eta, values))
    return out


def _run_direct(cfg: ExperimentConfig) -> tuple[dict, object]:
    eq = cfg.make_equilibrium()
    ccfg = cfg.make_cascade_config()
    data = cfg.make_initial_data(ccfg)
    res = drct.run_direct(eq, ccfg, data, refine_t=cfg["direct_refine_t"],
                          linearized=cfg["direct_linearized"],
                          mode_cushion=cfg["direct_mode_cushion"],
                          snapshot_every=cfg["snapshot_every"])
    return _direct_artifacts(cfg, res), res


def compare_fields(syn, res, rel_floor: float) -> dict:
    """Per-mode difference report between the synthesized and direct fields."""
    global_sup = float(np.abs(res.fields).max())
    floor = rel_floor * global_sup
    per_mode = []
    worst = 0.0
    syn_modes = list(syn.modes)
    for j, kp in enumerate(res.kprimes):
        if kp == 0:
            continue
        e_direct = res.fields[j]
        sup_d = float(np.abs(e_direct).max())
        if int(kp) in syn_modes:
            e_casc = syn.amplitudes[:, syn_modes.index(int(kp))]
        else:
            e_casc = np.zeros_like(e_direct)
        sup_c = float(np.abs(e_casc).max())
        diff = float(np.abs(e_direct - e_casc).max())
        rel = diff / max(sup_d, floor)
        if max(sup_d, sup_c) > floor:
            worst = max(worst, rel)
        per_mode.append({"mode": int(kp), "sup_direct": sup_d, "sup_cascade": sup_c,
                         "max_abs_diff": diff, "rel_to_mode": rel,
                         "rel_to_global": diff / max(global_sup, 1e-300)})
    return {"per_mode": per_mode, "max_rel_to_mode": worst,
            "global_sup": global_sup, "rel_floor": rel_floor}


def _run_compare(cfg: ExperimentConfig) -> dict:
    casc_art, state, syn = _run_cascade(cfg)
    dir_art, res = _run_direct(cfg)
    report = compare_fields(syn, res, cfg["compare_rel_floor"])
    rows = [(m["mode"], m["sup_direct"], m["sup_cascade"], m["max_abs_diff"],
             m["rel_to_mode"], m["rel_to_global"]) for m in report["per_mode"]]
    out = {}
    out.update(casc_art)
    out.update(dir_art)
    out["compare"] = ("json", report)
    out["compare_table"] = ("csv", (["mode", "sup_direct", "sup_cascade",
                                     "max_abs_diff", "rel_to_mode", "rel_to_global"],
                                    rows))
    return out


def _echo_report(cfg: ExperimentConfig) -> dict:
    eq = cfg.make_equilibrium()
    ccfg = cfg.make_cascade_config()
    data = cfg.make_initial_data(ccfg)
    res = drct.run_direct(eq, ccfg, data, refine_t=cfg["direct_refine_t"])
    predicted = diag.predicted_echo_times(data.modes.keys(), ccfg.K, ccfg.L,
                                          cfg["echo_depth"])
    matched, unmatched = diag.detect_echoes(res.times, res.kprimes, res.fields,
                                            cfg["noise_floor"], predicted)
    # order estimates from a halved-amplitude companion run
    half = ExperimentConfig(dict(cfg.raw, epsilon=cfg["epsilon"] / 2), cfg.base_dir)
    ccfg_half = half.make_cascade_config()
    res_half = drct.run_direct(eq, ccfg_half, half.make_initial_data(ccfg_half),
                               refine_t=cfg["direct_refine_t"])
    matched_half, _ = diag.detect_echoes(res_half.times, res_half.kprimes,
                                         res_half.fields, cfg["noise_floor"] / 4,
                                         predicted)
    window = max(5.0 * ccfg.t_grid.dt, 0.02 * ccfg.t_grid.t_max)
    matched = diag.estimate_echo_orders(matched, matched_half, window)

    sup = _sup_x_history(res.times, res.kprimes, res.fields, cfg["x_points"])
    last_echo = max((t for _, t, _ in predicted if t <= ccfg.t_grid.t_max),
                    default=0.0)
    decay = diag.fit_field_decay(res.times, sup, (last_echo + ccfg.t_grid.dt,
                                                  ccfg.t_grid.t_max), peaks_only=True)
    payload = {
        "predicted": [{"mode": m, "time": t, "waves": list(map(list, c))}
                      for m, t, c in predicted],
        "echoes": [vars(e) | {"matched": e.matched} for e in matched],
        "unmatched": [vars(e) | {"matched": False} for e in unmatched],
        "decay": {"rate": decay.rate, "prefactor": decay.prefactor,
                  "residual": decay.residual, "window_start": last_echo},
    }
    return {"report": ("json", payload)}


def _bounds_report(cfg: ExperimentConfig) -> dict:
    _, state, _ = _run_cascade(cfg)
    profile = diag.BoundProfile(cfg["lambda0"], cfg["delta"])
    sigma = diag.fit_sigma(state)
    reports = diag.verify_layer_bound(state, diag.BoundProfile(
        cfg["lambda0"], cfg["delta"], sigma))
    per_p = [{"p": r.p, "M_f": r.m_profile, "M_f_decaying": r.m_profile_decaying,
              "M_rho": r.m_density, "M_f_root": r.m_profile ** (1.0 / r.p)}
             for r in reports]
    payload = {"bounds": {"per_p": per_p}, "sigma": sigma, "delta": profile.delta,
               "lambda0": profile.lambda0}
    return {"report": ("json", payload)}


def run_experiment(cfg: ExperimentConfig, mode: str, out_dir, threads: int = 1,
                   tol: float = 1e-5) -> list[Path]:
    """Run one pipeline and export its artifacts; returns the written paths."""
    if mode not in MODES:
        raise VpechoError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "resolved_config.json", cfg.resolved())
    if mode == "penrose":
        results = _run_penrose(cfg, tol)
    elif mode == "kernel":
        results = _run_kernel(cfg, threads, tol)
    elif mode == "cascade":
        results = _run_cascade(cfg)[0]
    elif mode == "direct":
        results = _run_direct(cfg)[0]
    elif mode == "compare":
        results = _run_compare(cfg)
    elif mode == "echoes":
        results = _echo_report(cfg)
    else:
        results = _bounds_report(cfg)
    return [out_dir / "resolved_config.json"] + export(results, out_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vpecho",
        description="Plasma-echo laboratory for the 1D Vlasov-Poisson system")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--tol", type=float, default=1e-5)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        written = run_experiment(cfg, args.mode, args.out, args.threads, args.tol)
    except VpechoError as err:
        json.dump({"error": type(err).__name__, "message": str(err),
                   "field": getattr(err, "field", None)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
