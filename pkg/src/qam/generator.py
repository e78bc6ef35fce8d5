"""Strictly monotone generator functions on a compact working interval.

A generator is what turns an averaging rule into a mean: the mean of a
vector v is the generator's inverse applied to the average of its values.
Generators are immutable after construction and safe to share across
threads. Two generators produce the same mean exactly when they are related
by a nonzero affine substitution, so all equality-like checks here work on
affinely normalized representatives.

Families provided:

* ``Power(p)`` and ``Log`` — the power-mean generators (positive interval).
* ``Exponential(p)`` — exponential generators, any interval.
* ``AffineOf(base, alpha, beta)`` — affine reparametrization, same mean.
* ``PiecewiseLinearScaled(base, kinks)`` — a base generator rescaled through
  a continuous piecewise-linear value map, producing finitely many
  non-differentiability points with prescribed one-sided slope ratios.
* ``GridSampled(grid[, derivatives])`` — tabulated values with monotone
  piecewise-linear interpolation, optionally annotated with derivative
  samples.

Inversion is by monotone bisection (unconditionally safe), run to bracket
collapse, which lands well inside the 1e-12 relative contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import (
    DomainError,
    IntervalMismatch,
    InvalidGenerator,
    NonPositiveInterval,
    OutOfDomain,
    OutOfRange,
    SecondDerivativeUnavailable,
)
from .grid import GridFunction, Interval

#: Relative tolerance contract for inversion (bisection actually runs to
#: bracket collapse, i.e. a few ulps, which is strictly tighter).
TOL_INV = 1e-12

#: Sup-norm tolerance on normalized generators for equivalence testing.
TOL_EQ = 1e-9

#: Hard cap on bisection iterations.
MAX_INVERSE_ITER = 200

#: Grid used by equivalence checks; 2^11 + 1 so its nodes are a subset of
#: the default 4097-node computation grid.
EQUIV_GRID_N = 2049


class Direction(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


@dataclass(frozen=True)
class Kink:
    """One non-differentiability point with one-sided slopes.

    `left` and `right` are the one-sided derivatives of the generator at z
    (for the first kink; for later kinks only the left:right ratio binds,
    since the absolute scale is fixed by continuity from the left).
    """

    z: float
    left: float
    right: float

    def __post_init__(self):
        for name in ("z", "left", "right"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (math.isfinite(self.z) and math.isfinite(self.left) and math.isfinite(self.right)):
            raise InvalidGenerator("kink fields must be finite")
        if self.left <= 0.0 or self.right <= 0.0:
            raise InvalidGenerator(
                "one-sided kink slopes must be strictly positive; a vanishing "
                "slope empties both comparability classes"
            )


@dataclass(frozen=True)
class KinkSpec:
    """Sorted, strictly increasing finite list of kinks."""

    points: tuple

    def __post_init__(self):
        pts = tuple(
            k if isinstance(k, Kink) else Kink(*k) for k in self.points
        )
        zs = [k.z for k in pts]
        if any(b <= a for a, b in zip(zs, zs[1:])):
            raise InvalidGenerator("kink locations must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def zs(self) -> np.ndarray:
        return np.array([k.z for k in self.points], dtype=float)

    def all_upper(self) -> bool:
        """True when every kink has left >= right (upper-projection shape)."""
        return all(k.left >= k.right for k in self.points)

    def all_lower(self) -> bool:
        return all(k.left <= k.right for k in self.points)


class Generator:
    """Base class: continuous strictly monotone function on an interval."""

    _interval: Interval

    @property
    def interval(self) -> Interval:
        return self._interval

    @property
    def direction(self) -> Direction:
        raise NotImplementedError

    @property
    def increasing(self) -> bool:
        return self.direction is Direction.INCREASING

    @property
    def has_second_derivative(self) -> bool:
        return True

    # -- evaluation ----------------------------------------------------------

    def value(self, x):
        raise NotImplementedError

    def derivative(self, x):
        raise NotImplementedError

    def second_derivative(self, x):
        raise NotImplementedError

    def _check_domain(self, x) -> np.ndarray:
        iv = self._interval
        x = np.asarray(x, dtype=float)
        if not iv.contains(x):
            raise OutOfDomain(
                f"argument outside working interval [{iv.lo}, {iv.hi}]"
            )
        return np.clip(x, iv.lo, iv.hi)

    @staticmethod
    def _unwrap(x_in, out):
        out = np.asarray(out)
        return float(out) if np.ndim(x_in) == 0 else out

    # -- range and inversion -------------------------------------------------

    def value_range(self) -> tuple:
        """(min, max) of the value over the interval (attained at endpoints)."""
        a = self.value(self._interval.lo)
        b = self.value(self._interval.hi)
        return (a, b) if a <= b else (b, a)

    def inverse(self, y, max_iter: int = MAX_INVERSE_ITER):
        """Monotone bisection solve of value(x) = y.

        Accepts scalars or arrays. Raises OutOfRange when y is outside the
        value range beyond a 1e-9 relative slack; values inside the slack
        are clipped to the range first.
        """
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        vmin, vmax = self.value_range()
        slack = 1e-9 * max(vmax - vmin, abs(vmin), abs(vmax))
        if np.any(y < vmin - slack) or np.any(y > vmax + slack):
            raise OutOfRange(
                f"target outside the value range [{vmin}, {vmax}]"
            )
        y = np.clip(y, vmin, vmax)

        iv = self._interval
        a = np.full(y.shape, iv.lo)
        b = np.full(y.shape, iv.hi)
        inc = self.increasing
        xtol = 4.0 * np.finfo(float).eps * max(abs(iv.lo), abs(iv.hi), 1.0)
        for _ in range(max_iter):
            mid = 0.5 * (a + b)
            fm = np.asarray(self.value(mid))
            go_right = (fm < y) if inc else (fm > y)
            a = np.where(go_right, mid, a)
            b = np.where(go_right, b, mid)
            if float(np.max(b - a)) <= xtol:
                break
        x = 0.5 * (a + b)
        x = np.clip(x, iv.lo, iv.hi)
        return float(x[0]) if scalar else x

    # -- serialization -------------------------------------------------------

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        iv = self._interval
        return f"{self.__class__.__name__}({self.descriptor()} on [{iv.lo}, {iv.hi}])"


class Power(Generator):
    """x ** p on a positive interval, p != 0 (p = 0 is the job of Log)."""

    def __init__(self, p: float, interval: Interval):
        p = float(p)
        if p == 0.0:
            raise InvalidGenerator("Power(0) is disallowed; use Log")
        if interval.lo <= 0.0:
            raise NonPositiveInterval(
                f"power generators need lo > 0, got lo = {interval.lo}"
            )
        self.p = p
        self._interval = interval

    @property
    def direction(self) -> Direction:
        return Direction.INCREASING if self.p > 0 else Direction.DECREASING

    def value(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, np.power(xv, self.p))

    def derivative(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, self.p * np.power(xv, self.p - 1.0))

    def second_derivative(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, self.p * (self.p - 1.0) * np.power(xv, self.p - 2.0))

    def descriptor(self) -> dict:
        return {"family": "power", "p": self.p}


class Log(Generator):
    """Natural logarithm on a positive interval (the p = 0 power mean)."""

    def __init__(self, interval: Interval):
        if interval.lo <= 0.0:
            raise NonPositiveInterval(
                f"log generator needs lo > 0, got lo = {interval.lo}"
            )
        self._interval = interval

    @property
    def direction(self) -> Direction:
        return Direction.INCREASING

    def value(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, np.log(xv))

    def derivative(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, 1.0 / xv)

    def second_derivative(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, -1.0 / (xv * xv))

    def descriptor(self) -> dict:
        return {"family": "log"}


class Exponential(Generator):
    """exp(p * x), p != 0, on any compact interval."""

    def __init__(self, p: float, interval: Interval):
        p = float(p)
        if p == 0.0:
            raise InvalidGenerator("Exponential(0) is constant, not a generator")
        self.p = p
        self._interval = interval

    @property
    def direction(self) -> Direction:
        return Direction.INCREASING if self.p > 0 else Direction.DECREASING

    def value(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, np.exp(self.p * xv))

    def derivative(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, self.p * np.exp(self.p * xv))

    def second_derivative(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, self.p * self.p * np.exp(self.p * xv))

    def descriptor(self) -> dict:
        return {"family": "exp", "p": self.p}


class AffineOf(Generator):
    """alpha * base + beta, alpha != 0. Generates the same mean as base.

    Nested affine wrappers are flattened, so normalization is idempotent
    up to rounding.
    """

    def __init__(self, base: Generator, alpha: float, beta: float):
        alpha = float(alpha)
        beta = float(beta)
        if alpha == 0.0 or not (math.isfinite(alpha) and math.isfinite(beta)):
            raise InvalidGenerator("affine substitution needs finite alpha != 0")
        if isinstance(base, AffineOf):
            alpha, beta = alpha * base.alpha, alpha * base.beta + beta
            base = base.base
        self.base = base
        self.alpha = alpha
        self.beta = beta
        self._interval = base.interval

    @property
    def direction(self) -> Direction:
        flip = self.alpha < 0
        inc = self.base.increasing ^ flip
        return Direction.INCREASING if inc else Direction.DECREASING

    @property
    def has_second_derivative(self) -> bool:
        return self.base.has_second_derivative

    def value(self, x):
        return self._unwrap(x, self.alpha * np.asarray(self.base.value(x)) + self.beta)

    def derivative(self, x):
        return self._unwrap(x, self.alpha * np.asarray(self.base.derivative(x)))

    def second_derivative(self, x):
        return self._unwrap(x, self.alpha * np.asarray(self.base.second_derivative(x)))

    def descriptor(self) -> dict:
        return {
            "family": "affine",
            "alpha": self.alpha,
            "beta": self.beta,
            "base": self.base.descriptor(),
        }


class PiecewiseLinearScaled(Generator):
    """A base generator rescaled through a continuous piecewise-linear map.

    The value map has breakpoints at the base values of the kink locations;
    its slope starts at kinks[0].left / base'(z_1) on the leftmost segment
    (anchored so the result agrees with the base at z_1) and multiplies by
    right/left at each kink. The result is strictly increasing, continuous,
    and non-differentiable exactly at the kink locations.
    """

    def __init__(self, base: Generator, kinks: KinkSpec):
        if len(kinks) == 0:
            raise InvalidGenerator("PiecewiseLinearScaled needs at least one kink")
        inc = as_increasing(base)
        iv = base.interval
        zs = kinks.zs()
        if zs[0] <= iv.lo or zs[-1] >= iv.hi:
            raise InvalidGenerator("kinks must lie in the interval interior")
        bprime = float(np.asarray(inc.derivative(zs[0])))
        slopes = [kinks.points[0].left / bprime]
        for k in kinks.points:
            slopes.append(slopes[-1] * (k.right / k.left))
        slopes = np.array(slopes, dtype=float)
        breaks = np.asarray(inc.value(zs), dtype=float)
        # Anchor: agree with the base at the first kink, then continuity.
        nodes = np.empty(zs.size)
        nodes[0] = breaks[0]
        for i in range(1, zs.size):
            nodes[i] = nodes[i - 1] + slopes[i] * (breaks[i] - breaks[i - 1])
        self._init_arrays(base, zs, slopes, nodes)

    @classmethod
    def _from_arrays(
        cls,
        base: Generator,
        z_points: np.ndarray,
        slopes: np.ndarray,
        node_values: np.ndarray,
    ) -> "PiecewiseLinearScaled":
        self = cls.__new__(cls)
        self._init_arrays(base, z_points, slopes, node_values)
        return self

    def _init_arrays(self, base, z_points, slopes, node_values):
        self.base = base
        self._inc_base = as_increasing(base)
        self._interval = base.interval
        self._z = np.asarray(z_points, dtype=float)
        self._m = np.asarray(slopes, dtype=float)
        self._nodes = np.asarray(node_values, dtype=float)
        if np.any(self._m <= 0.0):
            raise InvalidGenerator("value-map slopes must be strictly positive")
        self._breaks = np.asarray(self._inc_base.value(self._z), dtype=float)

    @property
    def direction(self) -> Direction:
        return Direction.INCREASING

    @property
    def has_second_derivative(self) -> bool:
        return False

    @property
    def kink_points(self) -> np.ndarray:
        return self._z.copy()

    @property
    def kink_count(self) -> int:
        return int(self._z.size)

    def kink_spec(self) -> KinkSpec:
        """Kinks with the actual one-sided derivatives of this generator."""
        bp = np.asarray(self._inc_base.derivative(self._z))
        return KinkSpec(
            tuple(
                Kink(z, self._m[i] * bp[i], self._m[i + 1] * bp[i])
                for i, z in enumerate(self._z)
            )
        )

    def one_sided_slopes(self, z: float) -> tuple:
        """(left, right) derivatives at a kink location."""
        i = self._kink_index(z)
        bp = float(np.asarray(self._inc_base.derivative(self._z[i])))
        return self._m[i] * bp, self._m[i + 1] * bp

    def _kink_index(self, z: float) -> int:
        hits = np.nonzero(np.isclose(self._z, z, rtol=0.0, atol=1e-12 * self._interval.span))[0]
        if hits.size != 1:
            raise DomainError(f"{z} is not a kink location of this generator")
        return int(hits[0])

    def _map(self, y):
        j = np.searchsorted(self._breaks, y, side="right")
        ref = np.clip(j - 1, 0, self._z.size - 1)
        return self._nodes[ref] + self._m[j] * (y - self._breaks[ref])

    def value(self, x):
        xv = self._check_domain(x)
        y = np.asarray(self._inc_base.value(xv))
        return self._unwrap(x, self._map(y))

    def derivative(self, x):
        """Right-continuous derivative (right slope at the kink points)."""
        xv = self._check_domain(x)
        y = np.asarray(self._inc_base.value(xv))
        j = np.searchsorted(self._breaks, y, side="right")
        return self._unwrap(x, self._m[j] * np.asarray(self._inc_base.derivative(xv)))

    def second_derivative(self, x):
        raise SecondDerivativeUnavailable(
            "piecewise-rescaled generators are not twice differentiable"
        )

    def heal(self, z_minus: Optional[float], z_plus: Optional[float]) -> Generator:
        """Slope-matching step removing up to one kink on each side.

        Values strictly below z_minus are rescaled about f(z_minus) by the
        right:left slope ratio there; values strictly above z_plus are
        rescaled about f(z_plus) by the left:right ratio there. Everything
        in between (in particular the differentiability anchor) keeps its
        value, up to roundoff of the re-anchored evaluation. With every
        kink healed the result collapses to an affine image of the base
        generator.
        """
        jm = self._kink_index(z_minus) if z_minus is not None else None
        jp = self._kink_index(z_plus) if z_plus is not None else None
        if jm is None and jp is None:
            return self
        if jm is not None and jp is not None and jm >= jp:
            raise DomainError("z_minus must lie strictly below z_plus")

        m = self._m.copy()
        nodes = self._nodes.copy()
        # The two rescalings act on disjoint regions of the original data.
        if jp is not None:
            rho = self._m[jp] / self._m[jp + 1]
            m[jp + 1:] *= rho
            m[jp + 1] = self._m[jp]
            nodes[jp + 1:] = nodes[jp] + rho * (self._nodes[jp + 1:] - self._nodes[jp])
        if jm is not None:
            sigma = self._m[jm + 1] / self._m[jm]
            m[: jm + 1] *= sigma
            m[jm] = self._m[jm + 1]
            nodes[:jm] = nodes[jm] + sigma * (self._nodes[:jm] - self._nodes[jm])

        drop_breaks = [j for j in (jm, jp) if j is not None]
        drop_slopes = ([jm] if jm is not None else []) + ([jp + 1] if jp is not None else [])
        new_z = np.delete(self._z, drop_breaks)
        new_nodes = np.delete(nodes, drop_breaks)
        new_m = np.delete(m, drop_slopes)
        if new_z.size == 0:
            ref = jp if jp is not None else jm
            alpha = float(new_m[0])
            beta = float(self._nodes[ref] - alpha * self._breaks[ref])
            return AffineOf(self._inc_base, alpha, beta)
        return PiecewiseLinearScaled._from_arrays(self.base, new_z, new_m, new_nodes)

    def descriptor(self) -> dict:
        return {
            "family": "piecewise",
            "base": self.base.descriptor(),
            "kinks": [
                {"z": k.z, "left": k.left, "right": k.right}
                for k in self.kink_spec()
            ],
        }


class GridSampled(Generator):
    """Tabulated generator: strictly monotone samples, linear interpolation.

    Without derivative samples the derivative is the interpolant slope
    (a step function) and no second derivative exists. With them, the
    derivative interpolates the samples and the second derivative is the
    slope of that interpolant — the representation used for computed
    envelope generators, whose node derivatives are known exactly.
    """

    def __init__(self, grid: GridFunction, derivatives: Optional[np.ndarray] = None):
        diffs = np.diff(grid.values)
        if np.all(diffs > 0.0):
            self._dir = Direction.INCREASING
        elif np.all(diffs < 0.0):
            self._dir = Direction.DECREASING
        else:
            raise InvalidGenerator("grid samples must be strictly monotone")
        self.grid = grid
        self._interval = grid.interval
        if derivatives is not None:
            derivatives = np.asarray(derivatives, dtype=float)
            if derivatives.shape != grid.values.shape:
                raise InvalidGenerator("derivative samples must match the grid")
            if not np.all(np.isfinite(derivatives)):
                raise InvalidGenerator("derivative samples must be finite")
            sign = 1.0 if self._dir is Direction.INCREASING else -1.0
            if not np.all(sign * derivatives > 0.0):
                raise InvalidGenerator(
                    "derivative samples must be nonzero with the sign of the trend"
                )
        self.derivatives = derivatives
        self._slopes = diffs / grid.h

    @property
    def direction(self) -> Direction:
        return self._dir

    @property
    def has_second_derivative(self) -> bool:
        return self.derivatives is not None

    @property
    def annotated(self) -> bool:
        return self.derivatives is not None

    def value(self, x):
        xv = self._check_domain(x)
        return self._unwrap(x, np.interp(xv, self.grid.xs(), self.grid.values))

    def _cell(self, xv: np.ndarray) -> np.ndarray:
        idx = np.floor((xv - self._interval.lo) / self.grid.h).astype(int)
        return np.clip(idx, 0, self.grid.n - 2)

    def derivative(self, x):
        xv = self._check_domain(x)
        if self.derivatives is None:
            return self._unwrap(x, self._slopes[self._cell(xv)])
        return self._unwrap(x, np.interp(xv, self.grid.xs(), self.derivatives))

    def second_derivative(self, x):
        if self.derivatives is None:
            raise SecondDerivativeUnavailable(
                "value-only grid generator carries no second derivative"
            )
        xv = self._check_domain(x)
        curv = np.gradient(self.derivatives, self.grid.h)
        return self._unwrap(x, np.interp(xv, self.grid.xs(), curv))

    def descriptor(self) -> dict:
        d = {
            "family": "grid",
            "lo": self._interval.lo,
            "hi": self._interval.hi,
            "values": self.grid.values.tolist(),
        }
        if self.derivatives is not None:
            d["derivatives"] = self.derivatives.tolist()
        return d


# -- constructors and affine machinery ---------------------------------------


def make_power(p: float, interval: Interval) -> Generator:
    """Generator of the p-th power mean: x**p for p != 0, ln x for p = 0."""
    if interval.lo <= 0.0:
        raise NonPositiveInterval(
            f"power-mean generators need lo > 0, got lo = {interval.lo}"
        )
    return Log(interval) if float(p) == 0.0 else Power(p, interval)


def make_exponential(p: float, interval: Interval) -> Generator:
    return Exponential(p, interval)


def as_increasing(g: Generator) -> Generator:
    """Canonical increasing representative of g's equivalence class."""
    return g if g.increasing else AffineOf(g, -1.0, 0.0)


def normalize_affine(g: Generator) -> Generator:
    """Affine representative with value 0 at lo and 1 at hi (increasing)."""
    a = float(np.asarray(g.value(g.interval.lo)))
    b = float(np.asarray(g.value(g.interval.hi)))
    alpha = 1.0 / (b - a)
    return AffineOf(g, alpha, -(alpha * a))


def equivalent(f: Generator, g: Generator, tol: float = TOL_EQ, n: int = EQUIV_GRID_N) -> bool:
    """True when f and g generate the same mean, within tol.

    Tested as the sup-norm distance of the affinely normalized versions on
    a shared evaluation grid.
    """
    return normalized_distance(f, g, n=n) <= tol


def normalized_distance(f: Generator, g: Generator, n: int = EQUIV_GRID_N) -> float:
    """Sup-norm distance between the normalized generators on an n-grid."""
    if f.interval != g.interval:
        raise IntervalMismatch(
            f"generators live on different intervals: {f.interval} vs {g.interval}"
        )
    xs = f.interval.grid(n)
    nf = np.asarray(normalize_affine(f).value(xs))
    ng = np.asarray(normalize_affine(g).value(xs))
    return float(np.max(np.abs(nf - ng)))


# -- JSON descriptors ---------------------------------------------------------


def generator_from_descriptor(desc: dict, interval: Optional[Interval] = None) -> Generator:
    """Build a generator from its JSON descriptor.

    The working interval comes from the descriptor for "grid" (which embeds
    lo/hi) and from the `interval` argument for every other family.
    """
    if not isinstance(desc, dict) or "family" not in desc:
        raise DomainError("generator descriptor must be an object with a 'family' key")
    family = desc["family"]
    if family == "grid":
        iv = Interval(float(desc["lo"]), float(desc["hi"]))
        values = np.asarray(desc["values"], dtype=float)
        derivs = desc.get("derivatives")
        derivs = None if derivs is None else np.asarray(derivs, dtype=float)
        return GridSampled(GridFunction(iv, values), derivs)
    if interval is None:
        raise DomainError(f"family '{family}' needs an explicit working interval")
    if family == "power":
        return make_power(float(desc["p"]), interval)
    if family == "log":
        return Log(interval)
    if family == "exp":
        return Exponential(float(desc["p"]), interval)
    if family == "affine":
        base = generator_from_descriptor(desc["base"], interval)
        return AffineOf(base, float(desc["alpha"]), float(desc["beta"]))
    if family == "piecewise":
        base = generator_from_descriptor(desc["base"], interval)
        kinks = KinkSpec(
            tuple(Kink(k["z"], k["left"], k["right"]) for k in desc["kinks"])
        )
        return PiecewiseLinearScaled(base, kinks)
    raise DomainError(f"unknown generator family '{family}'")
