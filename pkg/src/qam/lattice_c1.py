"""Order-suprema of continuous functions and the log-derivative pathway.

Continuous functions are ordered by "a below b iff a - b is nonincreasing".
The least upper bound of a family under this order is built from increment
infima: with

    small_delta(x, y) = min over members of  f(x) - f(y)        (x <= y)
    capital_delta(x, y) = inf over partitions of the sum of small_delta
                          over consecutive partition points,

the function h(x) = capital_delta(x, x0) for x <= x0 and -capital_delta(x0, x)
beyond is the supremum, anchored to vanish at x0. capital_delta is additive
over adjacent intervals, which is what the tests certify.

Applied to the log-derivatives of a family of C1 generators and pushed
through u(x) = cumulative integral of exp(h), this produces the least upper
bound generator of the family's means (dually for greatest lower bounds).

Partition refinement is dyadic starting from the carrier grid's own nodes.
The carriers are piecewise linear, so refining inside a cell cannot change
a min-of-linear-increments sum and the refinement stabilizes immediately;
the machinery still verifies that instead of assuming it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .compare import compare_ratio
from .errors import (
    DerivativeUnavailable,
    DomainError,
    EnvelopeOverflow,
    IntervalMismatch,
    NoConvergence,
    OutOfDomain,
)
from .generator import Generator, GridSampled, PiecewiseLinearScaled, as_increasing
from .grid import DEFAULT_GRID_N, GridFunction, anchored_cumulative
from .lattice_smooth import EnvelopeResult, Kind, _shared_interval, _snap_anchor

DEFAULT_REFINE_TOL = 1e-10
MAX_REFINE_DEPTH = 20


@dataclass(frozen=True)
class LogDerivativeEnvelope:
    """Order-supremum of the family's log-derivatives, anchored at zero."""

    kind: Kind
    log_derivative: GridFunction
    anchor: float
    family_logds: tuple = ()


def _check_family(family: Sequence[GridFunction]) -> GridFunction:
    if not family:
        raise DomainError("family must be nonempty")
    first = family[0]
    for f in family[1:]:
        if f.interval != first.interval or f.n != first.n:
            raise IntervalMismatch("family members must share one grid")
    return first


def _check_pair(first: GridFunction, x: float, y: float):
    if x > y:
        raise DomainError(f"need x <= y, got x = {x} > y = {y}")
    iv = first.interval
    if not (iv.contains(x) and iv.contains(y)):
        raise OutOfDomain(f"pair ({x}, {y}) outside [{iv.lo}, {iv.hi}]")


def small_delta(family: Sequence[GridFunction], x: float, y: float) -> float:
    """Infimum over the family of the increment f(x) - f(y), x <= y."""
    first = _check_family(family)
    _check_pair(first, x, y)
    return float(min(f(x) - f(y) for f in family))


def _delta_sum(family: Sequence[GridFunction], pts: np.ndarray) -> float:
    vals = np.vstack([np.interp(pts, f.xs(), f.values) for f in family])
    increments = vals[:, :-1] - vals[:, 1:]
    return float(increments.min(axis=0).sum())


def _refine(pts: np.ndarray) -> np.ndarray:
    out = np.empty(2 * pts.size - 1)
    out[0::2] = pts
    out[1::2] = 0.5 * (pts[:-1] + pts[1:])
    return out


def capital_delta(
    family: Sequence[GridFunction],
    x: float,
    y: float,
    refine_tol: float = DEFAULT_REFINE_TOL,
    max_depth: int = MAX_REFINE_DEPTH,
) -> float:
    """Partition infimum of small_delta sums over [x, y].

    Starts from the grid nodes inside [x, y] and refines dyadically until
    one refinement step moves the sum by less than refine_tol. Always at
    most small_delta(x, y); raises NoConvergence (carrying the best value)
    if the depth cap is hit first.
    """
    first = _check_family(family)
    _check_pair(first, x, y)
    if x == y:
        return 0.0
    xs = first.xs()
    inside = xs[(xs > x) & (xs < y)]
    pts = np.concatenate([[x], inside, [y]])
    best = _delta_sum(family, pts)
    for _ in range(max_depth):
        pts = _refine(pts)
        new = _delta_sum(family, pts)
        if abs(new - best) < refine_tol:
            return new
        best = new
    raise NoConvergence(
        f"partition refinement did not stabilize within depth {max_depth}",
        best=best,
    )


def sup_order(
    family: Sequence[GridFunction],
    x0: Optional[float] = None,
    refine_tol: float = DEFAULT_REFINE_TOL,
    max_depth: int = MAX_REFINE_DEPTH,
) -> GridFunction:
    """Least upper bound of the family in the nonincreasing-difference order.

    Returned on the family's own grid, anchored to vanish at the node
    nearest x0 (default: the interval midpoint). One global dyadic
    refinement serves every node: per-cell increment infima can only
    decrease under refinement, so once their total stabilizes every
    partial sum has too.
    """
    first = _check_family(family)
    iv = first.interval
    x0s, i0 = _snap_anchor(iv, first.n, x0)
    xs = first.xs()
    pts = xs.copy()
    stride = 1

    def cell_deltas(p: np.ndarray) -> np.ndarray:
        vals = np.vstack([np.interp(p, f.xs(), f.values) for f in family])
        return (vals[:, :-1] - vals[:, 1:]).min(axis=0)

    deltas = cell_deltas(pts)
    best = deltas.sum()
    for _ in range(max_depth):
        pts = _refine(pts)
        stride *= 2
        deltas = cell_deltas(pts)
        new = deltas.sum()
        if abs(new - best) < refine_tol:
            break
        best = new
    else:
        raise NoConvergence(
            f"global refinement did not stabilize within depth {max_depth}",
            best=float(best),
        )
    cum = np.concatenate([[0.0], np.cumsum(deltas)])
    node_cum = cum[::stride]
    h = node_cum[i0] - node_cum
    return GridFunction(iv, h)


def derivative_envelope_oracle(
    family: Sequence[GridFunction], x0: Optional[float] = None
) -> GridFunction:
    """Brute-force check value for sup_order.

    Integrates the per-cell pointwise maximum of finite-difference slopes,
    anchored to vanish at the node nearest x0. Shares no code with the
    partition machinery.
    """
    first = _check_family(family)
    iv = first.interval
    _, i0 = _snap_anchor(iv, first.n, x0)
    max_slope = np.vstack([f.slopes() for f in family]).max(axis=0)
    integral = np.concatenate([[0.0], np.cumsum(max_slope * first.h)])
    return GridFunction(iv, integral - integral[i0])


def _log_derivative_grids(
    family: Sequence[Generator], n: int
) -> tuple:
    iv = _shared_interval(family)
    xs = iv.grid(n)
    logds = []
    for g in family:
        if isinstance(g, PiecewiseLinearScaled):
            raise DerivativeUnavailable(
                "family member has kinks; regularize it before taking envelopes"
            )
        if isinstance(g, GridSampled) and not g.annotated:
            raise DerivativeUnavailable(
                "value-only grid generator has no usable derivative"
            )
        gi = as_increasing(g)
        logds.append(GridFunction(iv, np.log(np.asarray(gi.derivative(xs)))))
    return iv, tuple(logds)


def envelope_generator_c1(
    family: Sequence[Generator],
    kind: Kind = Kind.SUP,
    n: int = DEFAULT_GRID_N,
    anchor: Optional[float] = None,
    refine_tol: float = DEFAULT_REFINE_TOL,
) -> EnvelopeResult:
    """Envelope generator of a C1 family via the log-derivative supremum.

    sup case: s = order-supremum of the members' log-derivatives, then
    u = cumulative integral of exp(s) anchored at x0 — strictly increasing,
    published with exp(s) as its node derivative. inf case dually (the
    order-infimum is the negated supremum of the negated members). The
    ratio test against every member is attached as dominance evidence.
    """
    kind = Kind(kind)
    iv, logds = _log_derivative_grids(family, n)
    x0, i0 = _snap_anchor(iv, n, anchor)
    if kind is Kind.SUP:
        s = sup_order(logds, x0, refine_tol=refine_tol)
    else:
        negated = [GridFunction(iv, -ld.values) for ld in logds]
        s = GridFunction(iv, -sup_order(negated, x0, refine_tol=refine_tol).values)
    with np.errstate(over="ignore"):
        w = np.exp(s.values)
    if not np.all(np.isfinite(w)):
        raise EnvelopeOverflow("exp of the log-derivative envelope overflowed")
    u = anchored_cumulative(w, s.h, i0)
    gen = GridSampled(GridFunction(iv, u), derivatives=w)
    certs = tuple(compare_ratio(f, gen) for f in family)
    return EnvelopeResult(
        generator=gen,
        envelope=LogDerivativeEnvelope(kind, s, x0, logds),
        family=tuple(family),
        kind=kind,
        dominance_certificates=certs,
    )
