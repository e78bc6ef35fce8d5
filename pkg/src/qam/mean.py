"""Quasi-arithmetic mean evaluation and sampled-vector machinery.

The mean of a vector v under a generator g is g⁻¹ of the plain average of
g(vᵢ). Averages use exact (fsum) summation so the mean is bit-for-bit
permutation invariant, and the inverted value is clipped into
[min v, max v], which is where the exact mean provably lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateProbe, DomainError, OutOfDomain
from .generator import Generator
from .grid import Interval


def as_vector(v, interval: Interval) -> np.ndarray:
    """Validate an argument vector: nonempty, finite, inside the interval."""
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("argument vector must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument vector entries must be finite")
    if not interval.contains(arr):
        raise OutOfDomain(
            f"vector entries outside working interval [{interval.lo}, {interval.hi}]"
        )
    return interval.clip(arr)


def qa_mean(g: Generator, v) -> float:
    """Quasi-arithmetic mean of v under generator g."""
    arr = as_vector(v, g.interval)
    avg = math.fsum(np.asarray(g.value(arr)).tolist()) / arr.size
    x = g.inverse(avg)
    return float(min(max(x, arr.min()), arr.max()))


def qa_means(g: Generator, vectors: Sequence) -> np.ndarray:
    """Means of many vectors under one generator, with a single batched solve."""
    arrs = [as_vector(v, g.interval) for v in vectors]
    avgs = np.array(
        [math.fsum(np.asarray(g.value(a)).tolist()) / a.size for a in arrs]
    )
    xs = np.atleast_1d(g.inverse(avgs))
    lows = np.array([a.min() for a in arrs])
    highs = np.array([a.max() for a in arrs])
    return np.clip(xs, lows, highs)


@dataclass
class VectorSampler:
    """Deterministic sampler of argument vectors.

    Entries are drawn uniformly from the interval shrunk by span/1000 on
    each side, keeping inversion away from its ill-conditioned range
    endpoints. Vector lengths are uniform on [n_min, n_max].
    """

    seed: int = 42
    n_min: int = 2
    n_max: int = 8
    count: int = 1000

    def __post_init__(self):
        if self.n_min < 2 or self.n_max < self.n_min:
            raise DomainError("need 2 <= n_min <= n_max")

    def sample(self, interval: Interval) -> list:
        rng = np.random.default_rng(self.seed)
        margin = interval.span / 1000.0
        lo, hi = interval.lo + margin, interval.hi - margin
        lengths = rng.integers(self.n_min, self.n_max + 1, size=self.count)
        return [rng.uniform(lo, hi, size=int(n)) for n in lengths]


def default_probes(interval: Interval, n: int = 33) -> list:
    """Ratio probes (x, y, z): interior sweep of x against the endpoints.

    With y = hi and z = lo the probed ratio is precisely the affinely
    normalized generator value at x, so probe distances are directly
    comparable to normalized sup-norm distances.
    """
    xs = interval.grid(n + 2)[1:-1]
    probes = [(float(x), interval.hi, interval.lo) for x in xs]
    mid = interval.midpoint
    probes += [(interval.lo, mid, interval.hi), (interval.hi, mid, interval.lo)]
    return probes


def pal91_ratio_distance(f: Generator, g: Generator, probes: Iterable) -> float:
    """Worst discrepancy of the three-point value ratios of f and g.

    The ratio (f(x) - f(z)) / (f(y) - f(z)) is invariant under affine
    substitution, and two generators produce the same mean exactly when
    their ratio functions agree; the maximum absolute discrepancy over the
    probes is therefore a mean-level distance.
    """
    worst = 0.0
    scale_f = abs(f.value(f.interval.hi) - f.value(f.interval.lo))
    scale_g = abs(g.value(g.interval.hi) - g.value(g.interval.lo))
    for (x, y, z) in probes:
        if y == z:
            raise DomainError(f"probe needs y != z, got y = z = {y}")
        fy, fz, fx = f.value(y), f.value(z), f.value(x)
        gy, gz, gx = g.value(y), g.value(z), g.value(x)
        den_f = fy - fz
        den_g = gy - gz
        if abs(den_f) < 1e-13 * scale_f or abs(den_g) < 1e-13 * scale_g:
            raise DegenerateProbe(
                f"ratio denominator underflow at probe (x={x}, y={y}, z={z})"
            )
        worst = max(worst, abs((fx - fz) / den_f - (gx - gz) / den_g))
    return worst
