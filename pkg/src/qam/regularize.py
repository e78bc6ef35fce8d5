"""Projection of finitely-kinked generators onto smooth ones.

A generator with finitely many kinks whose one-sided slopes all drop
left-to-right (left >= right) has the same *upper* comparability class as
a smooth generator obtained by repeated slope matching: each step picks
the nearest unhealed kink on each side of a differentiability anchor and
rescales the outer branches so the one-sided slopes there agree. After all
kinks are healed the limit is an affine image of the base generator and
generates the best smooth stand-in for the original mean. Kinks rising
left-to-right dually admit the lower projection; mixed requests are
impossible for a genuinely kinked generator.

Convergence of the iterates' means to the projection's mean is monitored
through the three-point ratio criterion distance, which hits zero exactly
at termination for finite kink sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, EmptyProjection, SlopeOrderViolation
from .generator import Generator, PiecewiseLinearScaled
from .mean import default_probes, pal91_ratio_distance


@dataclass(frozen=True)
class RegularizationTrace:
    """Iterates of the slope-matching projection, oldest first.

    The last iterate is the returned projection itself, so the distance
    sequence ends in an exact zero.
    """

    iterates: tuple
    kinks_remaining: tuple
    pal91_distances: tuple
    anchor: float


def _kink_count(g: Generator) -> int:
    return g.kink_count if isinstance(g, PiecewiseLinearScaled) else 0


def regularize_step(
    f: Generator,
    z_minus: Optional[float] = None,
    z_plus: Optional[float] = None,
) -> Generator:
    """One slope-matching step healing up to one kink per side.

    z_minus names a kink below the anchor, z_plus one above. A generator
    without kinks is returned unchanged.
    """
    if _kink_count(f) == 0:
        return f
    return f.heal(z_minus, z_plus)


def default_anchor(f: Generator) -> float:
    """Midpoint of the largest kink-free gap (a differentiability point)."""
    iv = f.interval
    if _kink_count(f) == 0:
        return iv.midpoint
    edges = np.concatenate([[iv.lo], f.kink_points, [iv.hi]])
    widths = np.diff(edges)
    i = int(np.argmax(widths))
    return float(0.5 * (edges[i] + edges[i + 1]))


def regularize(
    f: Generator,
    direction: str = "upper",
    x0: Optional[float] = None,
    probes: Optional[Sequence] = None,
) -> tuple:
    """Project a finitely-kinked generator onto its smooth stand-in.

    direction "upper" requires every kink to satisfy left >= right (the
    projection preserves the set of dominating smooth means), "lower" the
    reverse. "both" is only possible for an already smooth input; with any
    kink present both bound sets cannot be simultaneously nonempty, which
    is reported as EmptyProjection.

    Returns (projection, trace). The projection of a kink-free input is
    the input itself.
    """
    if direction not in ("upper", "lower", "both"):
        raise DomainError(f"unknown direction '{direction}'")
    probes = list(probes) if probes is not None else default_probes(f.interval)

    if _kink_count(f) == 0:
        trace = RegularizationTrace(
            iterates=(f,),
            kinks_remaining=(0,),
            pal91_distances=(0.0,),
            anchor=f.interval.midpoint if x0 is None else float(x0),
        )
        return f, trace

    if direction == "both":
        raise EmptyProjection(
            "a generator with kinks cannot have both projection directions; "
            "both bound sets nonempty would force it to be smooth already"
        )

    kinks = f.kink_spec()
    if direction == "upper" and not kinks.all_upper():
        bad = [k.z for k in kinks if k.left < k.right]
        raise SlopeOrderViolation(
            f"upper projection needs left >= right at every kink; violated at {bad}"
        )
    if direction == "lower" and not kinks.all_lower():
        bad = [k.z for k in kinks if k.left > k.right]
        raise SlopeOrderViolation(
            f"lower projection needs left <= right at every kink; violated at {bad}"
        )

    anchor = default_anchor(f) if x0 is None else float(x0)
    zs = f.kink_points
    if np.any(np.isclose(zs, anchor, rtol=0.0, atol=1e-12 * f.interval.span)):
        raise DomainError(f"anchor {anchor} must be a differentiability point")

    below = sorted([z for z in zs if z < anchor], reverse=True)
    above = sorted([z for z in zs if z > anchor])

    iterates = [f]
    counts = [len(zs)]
    current = f
    while below or above:
        z_minus = below.pop(0) if below else None
        z_plus = above.pop(0) if above else None
        current = regularize_step(current, z_minus, z_plus)
        iterates.append(current)
        counts.append(_kink_count(current))

    distances = tuple(
        pal91_ratio_distance(it, current, probes) for it in iterates
    )
    trace = RegularizationTrace(
        iterates=tuple(iterates),
        kinks_remaining=tuple(counts),
        pal91_distances=distances,
        anchor=anchor,
    )
    return current, trace


def pal91_convergence_report(
    trace: RegularizationTrace,
    m: Generator,
    probes: Optional[Sequence] = None,
) -> list:
    """Ratio-criterion distances of every iterate to the projection."""
    if not trace.iterates:
        raise DomainError("trace holds no iterates")
    probes = list(probes) if probes is not None else default_probes(m.interval)
    return [pal91_ratio_distance(it, m, probes) for it in trace.iterates]
