"""Decide the dominance preorder between two means, three ways.

* ratio: the derivative-ratio criterion — the first mean is dominated by
  the second exactly when g'/f' is nondecreasing (both taken increasing).
  Sharp, needs derivatives.
* convexity: secant slopes of f∘g⁻¹ must be nonincreasing (concavity).
  Needs only values, so it also covers tabulated generators.
* empirical: direct definition test on sampled vectors. Can refute a
  direction, never prove one; its verdicts are labelled as such.

All three agree on comparable inputs; compare_all runs them together and
raises MethodsDisagree on any directed contradiction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import (
    DerivativeUnavailable,
    IntervalMismatch,
    MethodsDisagree,
)
from .generator import Generator, GridSampled, as_increasing
from .grid import DEFAULT_GRID_N
from .mean import VectorSampler, qa_means

#: Relative monotonicity slack on tested sequences.
EPS_MONO_REL = 1e-9

#: Absolute slack floor: classifies constant-up-to-roundoff sequences,
#: which a purely relative slack cannot.
EPS_MONO_FLOOR = 1e-10

#: Slack for sequences polluted by value-only grid interpolation
#: (staircase interpolant derivatives, kinked compositions).
EPS_STAIR_REL = 1e-4
EPS_STAIR_FLOOR = 1e-8

#: Level-proportional slack floor for grid generators with derivative
#: samples: cumulative-quadrature drift is O(h^2) relative to the ratio's
#: level, a few 1e-7 at default resolution. Matches the envelope-equality
#: tolerance; genuine misorderings sit three or more orders above it.
EPS_ANNOTATED_REL_LEVEL = 1e-6

#: Absolute tolerance on mean values in the empirical test (two bisection
#: inversions, each far below 1e-12 relative).
TOL_CMP = 1e-10

#: Mean tolerance per unit of interval span when an operand is a grid
#: generator: tabulated envelopes are only accurate to grid resolution, so
#: their means are too.
GRID_MEAN_TOL_REL = 1e-6


class Relation(str, Enum):
    LEQ = "LEQ"
    GEQ = "GEQ"
    EQUIV = "EQUIV"
    INCOMPARABLE = "INCOMPARABLE"
    UNKNOWN = "UNKNOWN"


class Method(str, Enum):
    RATIO = "ratio"
    CONVEXITY = "convexity"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of one comparability test.

    margin is the worst slack observed in the direction(s) the verdict
    claims (for INCOMPARABLE, the smaller of the two violations).
    witnesses holds counterexample vectors for refuted directions
    (empirical method only).
    """

    relation: Relation
    method: Method
    margin: float
    witnesses: tuple = ()
    note: str = ""

    @property
    def directed_leq(self) -> bool:
        return self.relation in (Relation.LEQ, Relation.EQUIV)

    @property
    def directed_geq(self) -> bool:
        return self.relation in (Relation.GEQ, Relation.EQUIV)

    def to_json_dict(self) -> dict:
        return {
            "relation": self.relation.value,
            "method": self.method.value,
            "margin": self.margin,
            "witness": [list(map(float, w)) for w in self.witnesses] or None,
            "note": self.note or None,
        }


def _monotone_violations(seq: np.ndarray):
    """(worst drop, worst rise, argmax drop, argmax rise) of a sequence."""
    steps = np.diff(seq)
    drop = float(max(0.0, -steps.min(initial=0.0)))
    rise = float(max(0.0, steps.max(initial=0.0)))
    i_drop = int(np.argmin(steps)) if steps.size else 0
    i_rise = int(np.argmax(steps)) if steps.size else 0
    return drop, rise, i_drop, i_rise


def _slack(seq: np.ndarray, staircase: bool, annotated: bool = False) -> float:
    spread = float(seq.max() - seq.min())
    scale = max(1.0, float(np.max(np.abs(seq))))
    if staircase:
        return EPS_STAIR_REL * spread + EPS_STAIR_FLOOR * scale
    slack = EPS_MONO_REL * spread + EPS_MONO_FLOOR * scale
    if annotated:
        slack += EPS_ANNOTATED_REL_LEVEL * float(np.max(np.abs(seq)))
    return slack


def _classify(seq, xs, method, staircase, leq_when="nondecreasing", annotated=False):
    """Map a monotonicity classification of seq onto a relation verdict."""
    slack = _slack(seq, staircase, annotated)
    drop, rise, i_drop, i_rise = _monotone_violations(seq)
    nondecr = drop <= slack
    noninc = rise <= slack
    flip = leq_when == "nonincreasing"
    if nondecr and noninc:
        return ComparisonVerdict(Relation.EQUIV, method, float(seq.max() - seq.min()))
    if nondecr:
        rel = Relation.GEQ if flip else Relation.LEQ
        return ComparisonVerdict(rel, method, drop)
    if noninc:
        rel = Relation.LEQ if flip else Relation.GEQ
        return ComparisonVerdict(rel, method, rise)
    note = (
        f"drop {drop:.3e} near x={xs[i_drop]:.6g}, "
        f"rise {rise:.3e} near x={xs[i_rise]:.6g}, slack {slack:.3e}"
    )
    return ComparisonVerdict(Relation.INCOMPARABLE, method, min(drop, rise), note=note)


def _require_same_interval(f: Generator, g: Generator):
    if f.interval != g.interval:
        raise IntervalMismatch(
            f"cannot compare generators on different intervals: "
            f"{f.interval} vs {g.interval}"
        )


def _is_plain_grid(g: Generator) -> bool:
    return isinstance(g, GridSampled) and not g.annotated


def _is_grid(g: Generator) -> bool:
    return isinstance(g, GridSampled)


def _eval_xs(f: Generator, g: Generator, n: int) -> np.ndarray:
    """Evaluation abscissae, aligned to a grid operand's own nodes."""
    grids = [h.grid for h in (f, g) if isinstance(h, GridSampled)]
    if grids:
        best = max(grids, key=lambda gr: gr.n)
        return best.xs()
    return f.interval.grid(n)


def compare_ratio(f: Generator, g: Generator, n: int = DEFAULT_GRID_N) -> ComparisonVerdict:
    """Derivative-ratio criterion: LEQ iff g'/f' is nondecreasing.

    Both generators are canonicalized to increasing first (the mean does
    not change). Raises DerivativeUnavailable for value-only grid
    generators, whose interpolant-slope staircase is not a usable
    derivative for this test.
    """
    _require_same_interval(f, g)
    for h in (f, g):
        if _is_plain_grid(h):
            raise DerivativeUnavailable(
                "ratio test needs derivatives; value-only grid generators "
                "route to compare_convexity / compare_empirical"
            )
    fi, gi = as_increasing(f), as_increasing(g)
    xs = _eval_xs(f, g, n)
    ratio = np.asarray(gi.derivative(xs)) / np.asarray(fi.derivative(xs))
    annotated = _is_grid(f) or _is_grid(g)
    return _classify(
        ratio, xs, Method.RATIO,
        staircase=False, leq_when="nondecreasing", annotated=annotated,
    )


def compare_convexity(f: Generator, g: Generator, n: int = DEFAULT_GRID_N) -> ComparisonVerdict:
    """Secant-slope criterion on f∘g⁻¹: LEQ iff the slopes are nonincreasing.

    Works from values only. For grid-backed operands the image grid is
    coarsened 8x and the slack widened to the interpolation resolution.
    """
    _require_same_interval(f, g)
    fi, gi = as_increasing(f), as_increasing(g)
    staircase = _is_grid(f) or _is_grid(g)
    if staircase:
        n = max(n // 8 + 1, 33)
    ylo = float(np.asarray(gi.value(gi.interval.lo)))
    yhi = float(np.asarray(gi.value(gi.interval.hi)))
    ys = np.linspace(ylo, yhi, n)
    xs = gi.inverse(ys)
    phi = np.asarray(fi.value(xs))
    slopes = np.diff(phi) / np.diff(ys)
    return _classify(
        slopes, xs[:-1], Method.CONVEXITY, staircase, leq_when="nonincreasing"
    )


def compare_empirical(
    f: Generator,
    g: Generator,
    sampler: Optional[VectorSampler] = None,
    tol: Optional[float] = None,
) -> ComparisonVerdict:
    """Definition-level test on sampled vectors. Refutes, never proves.

    The default mean tolerance widens to grid accuracy when an operand is
    a tabulated generator; a grid representation cannot witness mean
    differences below its own resolution.
    """
    _require_same_interval(f, g)
    if tol is None:
        tol = TOL_CMP
        if _is_grid(f) or _is_grid(g):
            tol = max(tol, GRID_MEAN_TOL_REL * f.interval.span)
    sampler = sampler or VectorSampler()
    vectors = sampler.sample(f.interval)
    mf = qa_means(f, vectors)
    mg = qa_means(g, vectors)
    diff = mf - mg
    leq_viol = diff > tol      # refutes QA_f <= QA_g
    geq_viol = (-diff) > tol   # refutes QA_f >= QA_g
    if not leq_viol.any() and not geq_viol.any():
        return ComparisonVerdict(
            Relation.EQUIV, Method.EMPIRICAL, float(np.max(np.abs(diff)))
        )
    if not leq_viol.any():
        return ComparisonVerdict(Relation.LEQ, Method.EMPIRICAL, float(diff.max()))
    if not geq_viol.any():
        return ComparisonVerdict(Relation.GEQ, Method.EMPIRICAL, float(-diff.min()))
    w_leq = vectors[int(np.argmax(diff))]
    w_geq = vectors[int(np.argmin(diff))]
    return ComparisonVerdict(
        Relation.INCOMPARABLE,
        Method.EMPIRICAL,
        float(min(diff.max(), -diff.min())),
        witnesses=(np.asarray(w_leq), np.asarray(w_geq)),
        note="both directions refuted on sampled vectors",
    )


def compare_all(
    f: Generator,
    g: Generator,
    sampler: Optional[VectorSampler] = None,
    n: int = DEFAULT_GRID_N,
) -> tuple:
    """Run every applicable method; return (merged verdict, per-method dict).

    The merged relation is the sharpest available proof method's (ratio,
    then convexity, then empirical). Directed contradictions between
    methods raise MethodsDisagree.
    """
    results = {}
    try:
        results[Method.RATIO] = compare_ratio(f, g, n=n)
    except DerivativeUnavailable as exc:
        results[Method.RATIO] = ComparisonVerdict(
            Relation.UNKNOWN, Method.RATIO, float("nan"), note=str(exc)
        )
    results[Method.CONVEXITY] = compare_convexity(f, g, n=n)
    results[Method.EMPIRICAL] = compare_empirical(f, g, sampler)

    decisive = [v for v in results.values() if v.relation is not Relation.UNKNOWN]
    claims_leq = [v for v in decisive if v.relation is Relation.LEQ]
    claims_geq = [v for v in decisive if v.relation is Relation.GEQ]
    claims_inc = [v for v in decisive if v.relation is Relation.INCOMPARABLE]
    claims_dir = [v for v in decisive if v.relation is not Relation.INCOMPARABLE]
    if claims_leq and claims_geq:
        raise MethodsDisagree(
            f"{claims_leq[0].method.value} says LEQ "
            f"(margin {claims_leq[0].margin:.3e}) but "
            f"{claims_geq[0].method.value} says GEQ "
            f"(margin {claims_geq[0].margin:.3e})"
        )
    if claims_inc and claims_dir:
        raise MethodsDisagree(
            f"{claims_inc[0].method.value} says INCOMPARABLE but "
            f"{claims_dir[0].method.value} says {claims_dir[0].relation.value}"
        )
    for m in (Method.RATIO, Method.CONVEXITY, Method.EMPIRICAL):
        if results[m].relation is not Relation.UNKNOWN:
            return results[m], results
    return results[Method.EMPIRICAL], results
