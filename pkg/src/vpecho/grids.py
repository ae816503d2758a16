"""Uniform sample grids shared by the kernel, cascade and direct-solver modules."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0, dt, ..., t_max (t_max is rounded to a whole number of steps)."""

    t_max: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError("TimeGrid requires dt > 0 and t_max > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @cached_property
    def points(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    def __len__(self) -> int:
        return self.n_steps + 1

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.t_max, self.dt / factor)


@dataclass(frozen=True)
class FreqGrid:
    """Symmetric uniform grid -r, -r+h, ..., r for the velocity-frequency variable."""

    r: float
    h: float

    def __post_init__(self):
        if self.r <= 0 or self.h <= 0:
            raise ValueError("FreqGrid requires r > 0 and h > 0")
        n_half = round(self.r / self.h)
        if abs(n_half * self.h - self.r) > 1e-9 * self.r:
            raise ValueError("FreqGrid range r must be an integer multiple of step h")

    @property
    def n_half(self) -> int:
        return int(round(self.r / self.h))

    @cached_property
    def points(self) -> np.ndarray:
        return self.h * np.arange(-self.n_half, self.n_half + 1)

    def __len__(self) -> int:
        return 2 * self.n_half + 1

    @property
    def zero_index(self) -> int:
        return self.n_half

    def float_index(self, x) -> np.ndarray:
        """Fractional sample index of coordinate x (0 at the left edge)."""
        return (np.asarray(x, dtype=float) + self.r) / self.h

    def refined(self, factor: int) -> "FreqGrid":
        return FreqGrid(self.r, self.h / factor)

    def subsample_stride(self, coarse: "FreqGrid") -> int:
        """Stride that maps this (finer) grid onto `coarse`; raises if incompatible."""
        ratio = coarse.h / self.h
        stride = int(round(ratio))
        if abs(ratio - stride) > 1e-9 or abs(coarse.r - self.r) > 1e-9:
            raise ValueError("grids are not nested")
        return stride
