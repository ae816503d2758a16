"""Cubic-spline evaluation on uniform grids with zero extension outside."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import map_coordinates

from .grids import FreqGrid


def shift_rows(values: np.ndarray, offsets: np.ndarray, grid: FreqGrid):
    """Row-wise shifted resample: out[i, j] = values[i](grid_j + offsets[i]).

    Returns (out, hits) where hits counts evaluation points that fell outside
    the sampled range and were taken as zero.
    """
    n_rows, n_eta = values.shape
    cols = grid.float_index(grid.points[None, :] + np.asarray(offsets)[:, None])
    rows = np.broadcast_to(np.arange(n_rows, dtype=float)[:, None], cols.shape)
    hits = int(np.count_nonzero((cols < 0.0) | (cols > n_eta - 1.0)))
    out = map_coordinates(values, [rows, cols], order=3, mode="grid-constant",
                          cval=0.0, prefilter=True)
    return out, hits


def sample_moving(values: np.ndarray, positions: np.ndarray, grid: FreqGrid):
    """Trace evaluation: out[i] = values[i](positions[i])."""
    n_rows, n_eta = values.shape
    cols = grid.float_index(positions)
    rows = np.arange(n_rows, dtype=float)
    hits = int(np.count_nonzero((cols < 0.0) | (cols > n_eta - 1.0)))
    out = map_coordinates(values, [rows, cols], order=3, mode="grid-constant",
                          cval=0.0, prefilter=True)
    return out, hits


def edge_magnitude(values: np.ndarray) -> float:
    return float(max(np.abs(values[..., 0]).max(), np.abs(values[..., -1]).max()))
