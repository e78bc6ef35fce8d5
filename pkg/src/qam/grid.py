"""Compact working intervals and uniformly sampled grid functions.

GridFunction is the numerical carrier for everything the lattice code
manipulates pointwise: log-derivatives, curvature ratios, envelope
functions, and cumulative integrals. Samples live on a uniform grid and
are interpreted piecewise-linearly between nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfDomain

#: Default number of grid nodes (2^12 + 1); must be 2^k + 1 so that dyadic
#: refinement and pathway cross-checks share nodes.
DEFAULT_GRID_N = 4097

#: Smallest accepted grid.
MIN_GRID_N = 33


def is_pow2_plus_1(n: int) -> bool:
    m = n - 1
    return m >= 2 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class Interval:
    """Compact working interval [lo, hi], lo < hi, both finite."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise DomainError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise DomainError(f"interval requires lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def span(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def grid(self, n: int = DEFAULT_GRID_N) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def contains(self, x, slack_rel: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        slack = slack_rel * self.span
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)


@dataclass(frozen=True)
class GridFunction:
    """Uniform samples of a scalar function on an interval.

    Between nodes the function is read by linear interpolation, which keeps
    every operation (min/max envelopes, increments, cumulative integrals)
    exactly representable on refinements of the node partition.
    """

    interval: Interval
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("grid function needs a 1-d array of at least 2 samples")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid function samples must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def h(self) -> float:
        return self.interval.span / (self.n - 1)

    def xs(self) -> np.ndarray:
        return self.interval.grid(self.n)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not self.interval.contains(x):
            raise OutOfDomain(
                f"argument outside [{self.interval.lo}, {self.interval.hi}]"
            )
        out = np.interp(x, self.xs(), self.values)
        return float(out) if out.ndim == 0 else out

    def slopes(self) -> np.ndarray:
        """Per-cell finite-difference slopes (length n-1)."""
        return np.diff(self.values) / self.h

    def node_index(self, x: float) -> int:
        """Index of the grid node nearest to x."""
        i = int(round((x - self.interval.lo) / self.h))
        return min(max(i, 0), self.n - 1)


def cumulative_trapezoid(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative composite-trapezoid integral, starting at 0.

    Exactly the integral of the piecewise-linear interpolant of `values`,
    so cumulative arrays stay consistent with slope-based reasoning.
    """
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(0.5 * h * (values[1:] + values[:-1]), out=out[1:])
    return out


def anchored_cumulative(values: np.ndarray, h: float, anchor_index: int) -> np.ndarray:
    """Cumulative trapezoid integral re-anchored to vanish at a given node."""
    cum = cumulative_trapezoid(values, h)
    return cum - cum[anchor_index]
