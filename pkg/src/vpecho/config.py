"""Experiment configuration: JSON ingestion, validation and defaulting.

Every run is fully described by one JSON document; all defaults are resolved
at load time and the resolved document is echoed into the output directory, so
a run can be reproduced from its artifacts alone.  There is no randomness
anywhere in the pipeline, hence no seed field.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cascade import CascadeConfig, InitialData
from .equilibrium import Equilibrium, make_gaussian, make_table, make_two_stream
from .errors import ConfigError
from .grids import FreqGrid, TimeGrid

_REQUIRED = ("K", "L", "epsilon")

_DEFAULTS = {
    "equilibrium": {"kind": "gaussian"},
    "theta0": 1.0,
    "lambda0": None,             # resolved to theta0 / 4
    "l_over_k": 1.0,
    "k_max": 1,
    "eta_max": 2,
    "p_max": 4,
    "etap_range": 60.0,
    "etap_step": 0.25,
    "t_max": 20.0,
    "dt": 0.05,
    "prune_floor": 1e-14,
    "kernel_oversample": 8,
    "time_refine": 1,
    "initial_data": {"type": "uniform"},
    "kernel_k_list": [1, 2, 3, 4, 5],
    "direct_refine_t": 4,
    "direct_mode_cushion": 2,
    "direct_linearized": False,
    "snapshot_every": 0,
    "noise_floor": 1e-12,
    "echo_depth": 2,
    "delta": 0.1,
    "penrose_k_max": 8,
    "penrose_tau_max": 20.0,
    "penrose_n_tau": 4001,
    "compare_rel_floor": 1e-6,
    "x_points": 256,
}


@dataclass
class ExperimentConfig:
    raw: dict
    base_dir: Path

    def __getitem__(self, key):
        return self.raw[key]

    def resolved(self) -> dict:
        return dict(self.raw)

    # ---- factories -------------------------------------------------------
    def make_equilibrium(self) -> Equilibrium:
        spec = self.raw["equilibrium"]
        kind = spec["kind"]
        theta0 = self.raw["theta0"]
        if kind == "gaussian":
            return make_gaussian(theta0=theta0)
        if kind == "two_stream":
            return make_two_stream(a=spec.get("a", 3.0), theta0=theta0)
        if kind == "table":
            path = Path(spec["path"])
            if not path.is_absolute():
                path = self.base_dir / path
            eta, re_v, im_v = [], [], []
            with open(path, newline="") as fh:
                for row in csv.DictReader(fh):
                    eta.append(float(row["eta"]))
                    re_v.append(float(row["re_mu_hat"]))
                    im_v.append(float(row["im_mu_hat"]))
            return make_table(np.asarray(eta), np.asarray(re_v) + 1j * np.asarray(im_v),
                              c0=spec.get("c0"), theta0=spec.get("theta0"))
        raise ConfigError("equilibrium.kind", f"unknown kind {kind!r}")

    def make_cascade_config(self) -> CascadeConfig:
        r = self.raw
        return CascadeConfig(
            K=r["K"], L=r["L"], epsilon=r["epsilon"], lambda0=r["lambda0"],
            k_max=r["k_max"], eta_max=r["eta_max"], p_max=r["p_max"],
            etap_grid=FreqGrid(r["etap_range"], r["etap_step"]),
            t_grid=TimeGrid(r["t_max"], r["dt"]),
            l_over_k=r["l_over_k"], prune_floor=r["prune_floor"],
            kernel_oversample=r["kernel_oversample"], time_refine=r["time_refine"])

    def make_initial_data(self, cfg: CascadeConfig | None = None) -> InitialData:
        cfg = cfg or self.make_cascade_config()
        spec = self.raw["initial_data"]
        if spec["type"] == "uniform":
            return InitialData.saturating(cfg)
        if spec["type"] == "modes":
            entries = [(int(m[0]), int(m[1]), complex(m[2])) for m in spec["modes"]]
            return InitialData.from_modes(cfg, entries,
                                          symmetrize=spec.get("symmetrize", True))
        raise ConfigError("initial_data.type", f"unknown type {spec['type']!r}")


def _check_number(raw: dict, key: str, lo=None, hi=None, integer=False):
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(v).__name__}")
    if integer and int(v) != v:
        raise ConfigError(key, f"expected an integer, got {v}")
    if lo is not None and v < lo:
        raise ConfigError(key, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(key, f"must be <= {hi}, got {v}")


def validate(raw: dict) -> dict:
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(key, "required field is missing")
    unknown = set(raw) - set(_DEFAULTS) - set(_REQUIRED)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    merged = dict(_DEFAULTS)
    merged.update(raw)
    _check_number(merged, "K", lo=1, integer=True)
    _check_number(merged, "L", lo=0, integer=True)
    _check_number(merged, "epsilon", lo=0.0)
    if merged["epsilon"] <= 0:
        raise ConfigError("epsilon", "must be positive")
    _check_number(merged, "theta0", lo=1e-12)
    if merged["lambda0"] is None:
        merged["lambda0"] = merged["theta0"] / 4.0
    _check_number(merged, "lambda0", lo=1e-15)
    if merged["lambda0"] > merged["theta0"] / 4.0 + 1e-12:
        raise ConfigError("lambda0", f"must not exceed theta0/4 = {merged['theta0'] / 4:g}")
    _check_number(merged, "l_over_k", lo=0.0)
    if merged["L"] > merged["l_over_k"] * merged["K"] + 1e-12:
        raise ConfigError(
            "L", f"exceeds l_over_k * K = {merged['l_over_k'] * merged['K']:g}")
    for key, opts in [("k_max", dict(lo=1, integer=True)),
                      ("eta_max", dict(lo=0, integer=True)),
                      ("p_max", dict(lo=1, integer=True)),
                      ("etap_range", dict(lo=1e-9)), ("etap_step", dict(lo=1e-12)),
                      ("t_max", dict(lo=1e-12)), ("dt", dict(lo=1e-12)),
                      ("prune_floor", dict(lo=0.0)),
                      ("kernel_oversample", dict(lo=1, integer=True)),
                      ("time_refine", dict(lo=1, integer=True)),
                      ("direct_refine_t", dict(lo=1, integer=True)),
                      ("direct_mode_cushion", dict(lo=0, integer=True)),
                      ("snapshot_every", dict(lo=0, integer=True)),
                      ("noise_floor", dict(lo=0.0)),
                      ("echo_depth", dict(lo=1, integer=True)),
                      ("delta", dict(lo=1e-9, hi=1.0 - 1e-9)),
                      ("penrose_k_max", dict(lo=1, integer=True)),
                      ("penrose_tau_max", dict(lo=1e-9)),
                      ("penrose_n_tau", dict(lo=3, integer=True)),
                      ("compare_rel_floor", dict(lo=0.0)),
                      ("x_points", dict(lo=8, integer=True))]:
        _check_number(merged, key, **opts)
    eq_spec = merged["equilibrium"]
    if not isinstance(eq_spec, dict) or "kind" not in eq_spec:
        raise ConfigError("equilibrium", "expected an object with a 'kind' field")
    if eq_spec["kind"] not in ("gaussian", "two_stream", "table"):
        raise ConfigError("equilibrium.kind", f"unknown kind {eq_spec['kind']!r}")
    if eq_spec["kind"] == "table" and "path" not in eq_spec:
        raise ConfigError("equilibrium.path", "table equilibrium requires a path")
    data_spec = merged["initial_data"]
    if not isinstance(data_spec, dict) or data_spec.get("type") not in ("uniform", "modes"):
        raise ConfigError("initial_data.type", "expected 'uniform' or 'modes'")
    if data_spec["type"] == "modes":
        modes = data_spec.get("modes")
        if not isinstance(modes, list) or not modes:
            raise ConfigError("initial_data.modes", "expected a nonempty list")
        for m in modes:
            if len(m) != 3 or int(m[0]) == 0:
                raise ConfigError("initial_data.modes",
                                  f"entries are [k != 0, eta, scale]; got {m}")
    if not isinstance(merged["kernel_k_list"], list) or not all(
            isinstance(k, int) and k != 0 for k in merged["kernel_k_list"]):
        raise ConfigError("kernel_k_list", "expected a list of nonzero integers")
    if not isinstance(merged["direct_linearized"], bool):
        raise ConfigError("direct_linearized", "expected true or false")
    return merged


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError("<json>", f"line {err.lineno} column {err.colno}: {err.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "top level must be a JSON object")
    return ExperimentConfig(validate(raw), path.resolve().parent)


def config_from_dict(raw: dict, base_dir=".") -> ExperimentConfig:
    return ExperimentConfig(validate(dict(raw)), Path(base_dir))
