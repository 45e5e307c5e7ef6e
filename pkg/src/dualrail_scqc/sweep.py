"""Noise-strength sweeps and log-log slope fits."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["FitError", "SweepTable", "fit_loglog_slope", "run_sweep", "validate_grid"]

MIN_POINTS = 4
WINDOW_MIN_POINTS = 5


class FitError(ValueError):
    """The sweep grid or data cannot support a slope fit."""


@dataclass(frozen=True)
class SweepTable:
    """Per-point results of a noise sweep and the fitted small-noise slope.

    ``window`` holds the ``(lo, hi)`` noise values bounding the points used
    in the fit.
    """

    noise: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    window: tuple[float, float]
    axis: str = "xi"
    metric: str = "infidelity"
    extra: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.noise.tolist(), self.values.tolist()))

    def summary(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "window": list(self.window)}


def validate_grid(grid: Sequence[float]) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} grid points, got {g.size}")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise FitError("noise grid must be strictly positive")
    if np.any(np.diff(g) <= 0):
        raise FitError("noise grid must be strictly ascending")
    return g


def fit_window(grid: np.ndarray) -> np.ndarray:
    """Indices of the lowest decade of ``grid``, widened to at least five points."""
    mask = grid <= grid[0] * 10 * (1 + 1e-12)
    n = max(int(mask.sum()), min(WINDOW_MIN_POINTS, grid.size))
    return np.arange(n)


def fit_loglog_slope(grid, values) -> tuple[float, float, tuple[float, float]]:
    """Least-squares slope and intercept of ``log(values)`` vs ``log(grid)`` in the fit window."""
    g = validate_grid(grid)
    v = np.asarray(values, dtype=float)
    if v.shape != g.shape:
        raise FitError("grid and values differ in length")
    idx = fit_window(g)
    if np.any(v[idx] <= 0):
        raise FitError("non-positive values inside the fit window")
    slope, intercept = np.polyfit(np.log(g[idx]), np.log(v[idx]), 1)
    return float(slope), float(intercept), (float(g[idx[0]]), float(g[idx[-1]]))


def run_sweep(evaluate: Callable[[float], float], grid, *, axis: str = "xi",
              metric: str = "infidelity", threads: int = 1) -> SweepTable:
    """Evaluate ``evaluate`` on every grid point and fit the small-noise slope.

    Points may be evaluated in parallel; results are stored in grid order so
    the table does not depend on ``threads``.
    """
    g = validate_grid(grid)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(evaluate, g.tolist()))
    else:
        vals = [evaluate(x) for x in g.tolist()]
    vals = np.asarray(vals, dtype=float)
    slope, intercept, window = fit_loglog_slope(g, vals)
    return SweepTable(g, vals, slope, intercept, window, axis, metric)
