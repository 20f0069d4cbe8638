"""Initial-data factory shared by the CLI and the test suites."""
from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .exponents import FlowParams
from .geometry import RadialField, RadialGrid

__all__ = ["power_profile", "bubble_profile", "profile_from_csv", "make_profile"]


def power_profile(grid: RadialGrid, amplitude: float, exponent: float) -> RadialField:
    """amplitude * r^(-exponent); the origin node carries the capped value at r_1."""
    return RadialField.from_function(
        grid, lambda r: amplitude * np.where(r > 0.0, r, np.nan) ** (-exponent)
    )


def bubble_profile(grid: RadialGrid, amplitude: float) -> RadialField:
    """Smooth compactly supported bump amplitude * (1 - (r/R)^2)."""
    return RadialField(grid, amplitude * (1.0 - (grid.radii / grid.R) ** 2))


def profile_from_csv(grid: RadialGrid, path, amplitude: float = 1.0) -> RadialField:
    """Load (radius, value) rows and resample onto the grid radii."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ParameterError(f"profile file {path} must have (radius, value) columns")
    r, v = data[:, 0], data[:, 1]
    order = np.argsort(r)
    return RadialField(grid, amplitude * np.interp(grid.radii, r[order], v[order]))


def make_profile(grid: RadialGrid, kind: str, amplitude: float,
                 params: FlowParams, path=None) -> RadialField:
    if kind == "power":
        return power_profile(grid, amplitude, params.alpha)
    if kind == "bubble":
        return bubble_profile(grid, amplitude)
    if kind == "custom-csv":
        if path is None:
            raise ParameterError("custom-csv profile needs a file path")
        return profile_from_csv(grid, path, amplitude)
    raise ParameterError(f"unknown profile kind {kind!r}; pick power, bubble or custom-csv")
