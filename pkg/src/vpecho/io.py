"""Deterministic result export: CSV/JSON with lossless floats, binary snapshots.

Identical inputs must produce byte-identical files: floats are written with 17
significant digits, JSON keys are sorted, newlines are fixed to "\n" and no
timestamps or environment data are recorded.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(_sanitize(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# binary full-state snapshots
# ---------------------------------------------------------------------------
# Layout (little-endian):
#   int64 n_modes, int64 n_eta, float64 time,
#   float64 eta_min, float64 eta_step, int64 kprime_first, int64 kprime_stride,
#   then n_modes * n_eta row-major complex samples as (re, im) float64 pairs.

_HEADER = struct.Struct("<qqdddqq")


def write_snapshot(path, time: float, kprimes: np.ndarray, eta: np.ndarray,
                   values: np.ndarray):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n_modes, n_eta = values.shape
    stride = int(kprimes[1] - kprimes[0]) if n_modes > 1 else 1
    header = _HEADER.pack(n_modes, n_eta, float(time), float(eta[0]),
                          float(eta[1] - eta[0]) if n_eta > 1 else 0.0,
                          int(kprimes[0]), stride)
    flat = np.empty(2 * n_modes * n_eta)
    flat[0::2] = values.real.ravel()
    flat[1::2] = values.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.astype("<f8").tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        n_modes, n_eta, time, eta_min, eta_step, k_first, k_stride = _HEADER.unpack(
            fh.read(_HEADER.size))
        flat = np.frombuffer(fh.read(), dtype="<f8")
    values = (flat[0::2] + 1j * flat[1::2]).reshape(n_modes, n_eta)
    kprimes = k_first + k_stride * np.arange(n_modes)
    eta = eta_min + eta_step * np.arange(n_eta)
    return time, kprimes, eta, values
