"""Envelope generators for twice-differentiable families.

The pointwise sup (or inf) of the curvature ratios f''/f' over a family,
integrated twice through an exponential,

    u(x) = integral from the anchor of exp(integral of the ratio envelope),

is the generator of the least upper (greatest lower) bound of the family's
means. Both cumulative integrals are composite trapezoid on a uniform
grid, and the integrand of the outer integral is published as the node
derivative of the resulting grid generator, so certificates can check the
exact data the construction used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .compare import Relation, compare_ratio
from .errors import (
    DomainError,
    EnvelopeOverflow,
    IntervalMismatch,
    SecondDerivativeUnavailable,
)
from .generator import Generator, GridSampled
from .grid import DEFAULT_GRID_N, GridFunction, Interval, anchored_cumulative


class Kind(str, Enum):
    SUP = "sup"
    INF = "inf"


def _shared_interval(family: Sequence[Generator]) -> Interval:
    if not family:
        raise DomainError("family must be nonempty")
    iv = family[0].interval
    for g in family[1:]:
        if g.interval != iv:
            raise IntervalMismatch("family members must share the working interval")
    return iv


def _snap_anchor(iv: Interval, n: int, anchor: Optional[float]) -> tuple:
    """Anchor snapped to the nearest interior grid node; returns (x0, index)."""
    x0 = iv.midpoint if anchor is None else float(anchor)
    if not (iv.lo < x0 < iv.hi):
        raise DomainError(f"anchor {x0} must be interior to [{iv.lo}, {iv.hi}]")
    h = iv.span / (n - 1)
    i0 = int(round((x0 - iv.lo) / h))
    i0 = min(max(i0, 1), n - 2)
    return iv.lo + i0 * h, i0


@dataclass(frozen=True)
class RatioEnvelope:
    """Pointwise sup/inf of f''/f' over a family, sampled on a grid."""

    kind: Kind
    ratio: GridFunction
    anchor: float
    family: tuple = ()

    @property
    def anchor_index(self) -> int:
        return self.ratio.node_index(self.anchor)


@dataclass(frozen=True)
class EnvelopeResult:
    """Computed envelope generator plus its construction evidence.

    `envelope` is the intermediate object the pathway built: a
    RatioEnvelope here, a LogDerivativeEnvelope from the log-derivative
    pathway.
    """

    generator: GridSampled
    envelope: object
    family: tuple
    kind: Kind
    dominance_certificates: tuple = ()
    minimality_certificates: tuple = field(default=())

    @property
    def member_relation(self) -> Relation:
        """Expected verdict of compare_ratio(member, envelope generator)."""
        return Relation.LEQ if self.kind is Kind.SUP else Relation.GEQ

    def certificates_ok(self) -> bool:
        want = self.member_relation
        return all(
            c.relation in (want, Relation.EQUIV) for c in self.dominance_certificates
        )


def ratio_envelope(
    family: Sequence[Generator],
    kind: Kind = Kind.SUP,
    n: int = DEFAULT_GRID_N,
    anchor: Optional[float] = None,
) -> RatioEnvelope:
    """Pointwise envelope of f''/f' over the family at each grid node.

    The curvature ratio is invariant under affine substitution (both
    derivatives scale alike), so members need no canonicalization, only a
    second derivative.
    """
    kind = Kind(kind)
    iv = _shared_interval(family)
    for g in family:
        if not g.has_second_derivative:
            raise SecondDerivativeUnavailable(
                f"{g!r} carries no second derivative; use the log-derivative pathway"
            )
    xs = iv.grid(n)
    ratios = np.vstack(
        [np.asarray(g.second_derivative(xs)) / np.asarray(g.derivative(xs)) for g in family]
    )
    env = ratios.max(axis=0) if kind is Kind.SUP else ratios.min(axis=0)
    x0, _ = _snap_anchor(iv, n, anchor)
    return RatioEnvelope(kind, GridFunction(iv, env), x0, tuple(family))


def integrate_envelope(env: RatioEnvelope) -> EnvelopeResult:
    """Nested exponential integration of a ratio envelope.

    Inner pass: cumulative trapezoid of the envelope, anchored at zero.
    Outer pass: cumulative trapezoid of its exponential, anchored at zero.
    The result is strictly increasing with node derivative exp(inner);
    dominance certificates run the ratio test against every family member.
    """
    iv = env.ratio.interval
    h = env.ratio.h
    i0 = env.anchor_index
    inner = anchored_cumulative(env.ratio.values, h, i0)
    with np.errstate(over="ignore"):
        w = np.exp(inner)
    if not np.all(np.isfinite(w)):
        raise EnvelopeOverflow(
            "exp of the inner integral overflowed; the envelope is reported "
            "as unrepresentable, not clamped"
        )
    u = anchored_cumulative(w, h, i0)
    gen = GridSampled(GridFunction(iv, u), derivatives=w)
    certs = tuple(compare_ratio(f, gen) for f in env.family)
    return EnvelopeResult(
        generator=gen,
        envelope=env,
        family=env.family,
        kind=env.kind,
        dominance_certificates=certs,
    )


def envelope_generator_c2(
    family: Sequence[Generator],
    kind: Kind = Kind.SUP,
    n: int = DEFAULT_GRID_N,
    anchor: Optional[float] = None,
) -> EnvelopeResult:
    """Convenience: ratio_envelope followed by integrate_envelope."""
    return integrate_envelope(ratio_envelope(family, kind, n=n, anchor=anchor))
