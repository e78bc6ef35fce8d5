"""Independent brute-force verification of envelopes and mean axioms.

Nothing here trusts the lattice constructions: dominance is re-checked
both by the ratio criterion and by definition-level sampling, minimality
is probed against every catalog generator that dominates the family, and
the whole battery reports worst margins and explicit witness vectors on
failure. The CLI maps a failed report to a nonzero exit status.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .compare import (
    ComparisonVerdict,
    Relation,
    compare_empirical,
    compare_ratio,
)
from .errors import (
    NoLowerBoundInCatalog,
    NoUpperBoundInCatalog,
    SlopeOrderViolation,
)
from .generator import (
    Generator,
    Kink,
    KinkSpec,
    PiecewiseLinearScaled,
    make_exponential,
    make_power,
)
from .grid import DEFAULT_GRID_N, Interval
from .lattice_c1 import envelope_generator_c1
from .lattice_smooth import EnvelopeResult, Kind, envelope_generator_c2
from .mean import VectorSampler, qa_mean, qa_means
from .regularize import regularize

CATALOG_POWERS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0)
CATALOG_EXPONENTS = (-1.0, 1.0, 2.0)


@dataclass(frozen=True)
class Catalog:
    """Named reference generators sharing one working interval."""

    interval: Interval
    generators: dict

    def items(self):
        return self.generators.items()

    def smooth_items(self):
        return [
            (name, g)
            for name, g in self.generators.items()
            if not isinstance(g, PiecewiseLinearScaled)
        ]

    def __getitem__(self, name: str) -> Generator:
        return self.generators[name]


def default_catalog(interval: Interval, include_piecewise: bool = True) -> Catalog:
    """Powers, exponentials, and two finitely-kinked examples."""
    gens = {}
    for p in CATALOG_POWERS:
        name = "log" if p == 0.0 else f"power:{p:g}"
        gens[name] = make_power(p, interval)
    for p in CATALOG_EXPONENTS:
        gens[f"exp:{p:g}"] = make_exponential(p, interval)
    if include_piecewise:
        base = make_power(1.0, interval)
        lo, span = interval.lo, interval.span
        gens["piecewise:1"] = PiecewiseLinearScaled(
            base, KinkSpec((Kink(lo + 0.35 * span, 1.0, 0.5),))
        )
        gens["piecewise:2"] = PiecewiseLinearScaled(
            base,
            KinkSpec(
                (
                    Kink(lo + 0.25 * span, 1.0, 0.7),
                    Kink(lo + 0.65 * span, 1.0, 0.6),
                )
            ),
        )
    return Catalog(interval, gens)


def _member_relation(kind: Kind) -> tuple:
    want = Relation.LEQ if Kind(kind) is Kind.SUP else Relation.GEQ
    return (want, Relation.EQUIV)


def dominating_members(
    catalog: Catalog, family: Sequence[Generator], kind: Kind = Kind.SUP
) -> dict:
    """Catalog generators bounding every family member on the right side."""
    ok = _member_relation(kind)
    out = {}
    for name, k in catalog.items():
        try:
            verdicts = [compare_ratio(f, k) for f in family]
        except Exception:
            continue
        if all(v.relation in ok for v in verdicts):
            out[name] = k
    return out


@dataclass
class EnvelopeReport:
    """verify_envelope outcome: certificates, margins, loud failures."""

    kind: Kind
    member_certificates: dict = field(default_factory=dict)
    minimality_certificates: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    worst_member_margin: float = float("-inf")
    worst_minimality_margin: float = float("-inf")

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "passed": self.passed,
            "failures": list(self.failures),
            "witnesses": [list(map(float, w)) for w in self.witnesses],
            "worst_member_margin": self.worst_member_margin,
            "worst_minimality_margin": self.worst_minimality_margin,
            "member_certificates": {
                name: {m: v.to_json_dict() for m, v in certs.items()}
                for name, certs in self.member_certificates.items()
            },
            "minimality_certificates": {
                name: {m: v.to_json_dict() for m, v in certs.items()}
                for name, certs in self.minimality_certificates.items()
            },
        }


def _hunt_witness(lhs: Generator, rhs: Generator, want, sampler: VectorSampler):
    """Vector violating the expected mean inequality worst, if any exists."""
    from .compare import GRID_MEAN_TOL_REL, TOL_CMP, _is_grid

    tol = TOL_CMP
    if _is_grid(lhs) or _is_grid(rhs):
        tol = max(tol, GRID_MEAN_TOL_REL * lhs.interval.span)
    vectors = sampler.sample(lhs.interval)
    diff = qa_means(lhs, vectors) - qa_means(rhs, vectors)
    if Relation.LEQ in want:
        i = int(np.argmax(diff))
        return vectors[i] if diff[i] > tol else None
    i = int(np.argmin(diff))
    return vectors[i] if diff[i] < -tol else None


def _record(
    report: EnvelopeReport,
    bucket: dict,
    name: str,
    verdict: ComparisonVerdict,
    expected: tuple,
    context: str,
    witness_pair: tuple = None,
    sampler: VectorSampler = None,
):
    bucket.setdefault(name, {})[verdict.method.value] = verdict
    if verdict.relation not in expected:
        report.failures.append(
            f"{context}: {verdict.method.value} returned {verdict.relation.value} "
            f"(margin {verdict.margin:.3e}), expected one of "
            f"{[e.value for e in expected]}"
        )
        report.witnesses.extend(verdict.witnesses)
        if not verdict.witnesses and witness_pair is not None:
            w = _hunt_witness(*witness_pair, expected, sampler)
            if w is not None:
                report.witnesses.append(w)


def verify_envelope(
    result: EnvelopeResult,
    family: Sequence[Generator],
    catalog: Catalog,
    sampler: Optional[VectorSampler] = None,
) -> EnvelopeReport:
    """Re-derive every claim an envelope result makes, independently.

    Dominance per member by ratio and by sampling; minimality against
    every catalog generator that itself bounds the family; worst margins
    throughout. Any wrong direction lands in report.failures with the
    offending witness vectors.
    """
    sampler = sampler or VectorSampler(count=300)
    kind = result.kind
    want_member = _member_relation(kind)
    report = EnvelopeReport(kind=kind)
    u = result.generator

    for i, f in enumerate(family):
        name = f"member[{i}]"
        rv = compare_ratio(f, u)
        ev = compare_empirical(f, u, sampler)
        _record(report, report.member_certificates, name, rv, want_member,
                f"dominance of {name}", witness_pair=(f, u), sampler=sampler)
        _record(report, report.member_certificates, name, ev, want_member,
                f"dominance of {name}", witness_pair=(f, u), sampler=sampler)
        report.worst_member_margin = max(report.worst_member_margin, ev.margin)

    # Any catalog bound of the whole family must also bound the envelope.
    want_env = want_member
    for name, k in dominating_members(catalog, family, kind).items():
        rv = compare_ratio(u, k)
        ev = compare_empirical(u, k, sampler)
        _record(report, report.minimality_certificates, name, rv, want_env,
                f"minimality against {name}", witness_pair=(u, k), sampler=sampler)
        _record(report, report.minimality_certificates, name, ev, want_env,
                f"minimality against {name}", witness_pair=(u, k), sampler=sampler)
        report.worst_minimality_margin = max(report.worst_minimality_margin, ev.margin)
    return report


def _family_for_envelope(family: Sequence[Generator], kind: Kind) -> list:
    """Replace finitely-kinked members by their projection for this side."""
    direction = "upper" if Kind(kind) is Kind.SUP else "lower"
    out = []
    for f in family:
        if isinstance(f, PiecewiseLinearScaled):
            m, _ = regularize(f, direction)
            out.append(m)
        else:
            out.append(f)
    return out


def uqa_lqa_report(
    family: Sequence[Generator],
    v,
    catalog: Catalog,
    kind: Kind = Kind.SUP,
    n: int = DEFAULT_GRID_N,
) -> tuple:
    """(best catalog bound value at v, computed envelope mean at v).

    sup case: the minimum over catalog generators dominating the family of
    their mean at v, next to the envelope generator's mean at v; the
    envelope value never exceeds the catalog value beyond mean tolerance.
    Kinked members enter through their projection; a member whose kinks
    oppose the requested side makes the bound set empty, which is reported
    as the corresponding missing-bound error, never synthesized.
    """
    kind = Kind(kind)
    doms = dominating_members(catalog, family, kind)
    if not doms:
        if kind is Kind.SUP:
            raise NoUpperBoundInCatalog("no catalog member dominates the family")
        raise NoLowerBoundInCatalog("no catalog member is dominated by the family")
    values = [qa_mean(k, v) for k in doms.values()]
    catalog_value = min(values) if kind is Kind.SUP else max(values)
    try:
        smooth = _family_for_envelope(family, kind)
    except SlopeOrderViolation as exc:
        if kind is Kind.SUP:
            raise NoUpperBoundInCatalog(
                f"family has no upper bound at all: {exc}"
            ) from exc
        raise NoLowerBoundInCatalog(
            f"family has no lower bound at all: {exc}"
        ) from exc
    result = envelope_generator_c1(smooth, kind, n=n)
    envelope_value = qa_mean(result.generator, v)
    return catalog_value, envelope_value


# -- compact verification battery for the CLI --------------------------------


@dataclass
class SuiteCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteReport:
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(SuiteCheck(name, bool(passed), detail))

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def run_verification_suite(
    interval: Optional[Interval] = None,
    grid_n: int = DEFAULT_GRID_N,
    seed: int = 42,
) -> SuiteReport:
    """Fast end-to-end battery mirroring the acceptance surface.

    Mean axioms on catalog draws, three-method comparison agreement,
    closed-form envelope recoveries, pathway agreement, the one-kink
    regularization example, and full envelope verification reports.
    """
    from .generator import equivalent, normalized_distance

    t0 = time.perf_counter()
    iv = interval or Interval(1.0, 10.0)
    catalog = default_catalog(iv)
    sampler = VectorSampler(seed=seed, count=200)
    report = SuiteReport()

    # Mean axioms over catalog draws.
    rng = np.random.default_rng(seed)
    bad = 0
    for name, g in catalog.items():
        vectors = VectorSampler(seed=seed + hash(name) % 1000, count=50).sample(iv)
        means = qa_means(g, vectors)
        for v, m in zip(vectors, means):
            if not (v.min() <= m <= v.max()):
                bad += 1
        perm = [rng.permutation(v) for v in vectors]
        if np.max(np.abs(qa_means(g, perm) - means)) > 1e-13 * iv.hi:
            bad += 1
    report.add("mean-axioms", bad == 0, f"{bad} violations")

    # Power order and method agreement on a pair subset.
    agree = True
    powers = [catalog[f"power:{p:g}" if p != 0 else "log"] for p in CATALOG_POWERS]
    for i in range(len(powers) - 1):
        r = compare_ratio(powers[i], powers[i + 1])
        e = compare_empirical(powers[i], powers[i + 1], sampler)
        if r.relation is not Relation.LEQ or e.relation not in (
            Relation.LEQ, Relation.EQUIV
        ):
            agree = False
    report.add("power-order", agree)

    # Closed-form envelope recoveries.
    iv12 = Interval(1.0, 2.0)
    fam = [make_power(0.5, iv12), make_power(2.0, iv12)]
    res = envelope_generator_c2(fam, Kind.SUP, n=grid_n)
    d1 = normalized_distance(res.generator, make_power(2.0, iv12))
    report.add("c2-closed-form", d1 <= 1e-5, f"distance {d1:.3e}")

    # Pathway agreement.
    res_c1 = envelope_generator_c1(fam, Kind.SUP, n=grid_n)
    d2 = normalized_distance(res.generator, res_c1.generator)
    report.add("pathway-agreement", d2 <= 1e-5, f"distance {d2:.3e}")

    # Envelope verification with zero witnesses.
    ver = verify_envelope(res, fam, default_catalog(iv12), sampler)
    report.add(
        "envelope-certificates",
        ver.passed and not ver.witnesses,
        "; ".join(ver.failures) or "clean",
    )

    # One-kink regularization desk example.
    base = make_power(1.0, Interval(0.5, 2.0))
    f = PiecewiseLinearScaled(base, KinkSpec((Kink(1.0, 1.0, 0.5),)))
    m, trace = regularize(f, "upper")
    ident = make_power(1.0, Interval(0.5, 2.0))
    ok = (
        len(trace.iterates) == 2
        and equivalent(m, ident)
        and trace.pal91_distances[-1] == 0.0
        and trace.pal91_distances[0] > 0.0
    )
    report.add("regularize-desk", ok, f"pal91 {list(trace.pal91_distances)}")

    report.seconds = time.perf_counter() - t0
    return report
