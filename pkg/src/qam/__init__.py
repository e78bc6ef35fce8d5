"""Quasi-arithmetic means: evaluation, comparability, envelope generators.

A quasi-arithmetic mean applies a strictly monotone generator to every
argument, averages, and inverts. This package evaluates such means,
decides the dominance preorder between generators by three mutually
checking methods, computes least-upper/greatest-lower envelope generators
of finite families by two independent constructions, projects finitely
kinked generators onto smooth representatives of their comparability
class, and verifies everything against brute-force oracles.
"""

from .compare import (
    ComparisonVerdict,
    Method,
    Relation,
    compare_all,
    compare_convexity,
    compare_empirical,
    compare_ratio,
)
from .errors import QamError
from .generator import (
    AffineOf,
    Direction,
    Exponential,
    Generator,
    GridSampled,
    Kink,
    KinkSpec,
    Log,
    PiecewiseLinearScaled,
    Power,
    as_increasing,
    equivalent,
    generator_from_descriptor,
    make_exponential,
    make_power,
    normalize_affine,
    normalized_distance,
)
from .grid import DEFAULT_GRID_N, GridFunction, Interval
from .lattice_c1 import (
    LogDerivativeEnvelope,
    capital_delta,
    derivative_envelope_oracle,
    envelope_generator_c1,
    small_delta,
    sup_order,
)
from .lattice_smooth import (
    EnvelopeResult,
    Kind,
    RatioEnvelope,
    envelope_generator_c2,
    integrate_envelope,
    ratio_envelope,
)
from .mean import (
    VectorSampler,
    default_probes,
    pal91_ratio_distance,
    qa_mean,
    qa_means,
)
from .oracle import (
    Catalog,
    default_catalog,
    dominating_members,
    run_verification_suite,
    uqa_lqa_report,
    verify_envelope,
)
from .regularize import (
    RegularizationTrace,
    pal91_convergence_report,
    regularize,
    regularize_step,
)

__version__ = "0.1.0"

__all__ = [
    "AffineOf",
    "Catalog",
    "ComparisonVerdict",
    "DEFAULT_GRID_N",
    "Direction",
    "EnvelopeResult",
    "Exponential",
    "Generator",
    "GridFunction",
    "GridSampled",
    "Interval",
    "Kind",
    "Kink",
    "KinkSpec",
    "Log",
    "LogDerivativeEnvelope",
    "Method",
    "PiecewiseLinearScaled",
    "Power",
    "QamError",
    "RatioEnvelope",
    "RegularizationTrace",
    "Relation",
    "VectorSampler",
    "as_increasing",
    "capital_delta",
    "compare_all",
    "compare_convexity",
    "compare_empirical",
    "compare_ratio",
    "default_catalog",
    "default_probes",
    "derivative_envelope_oracle",
    "dominating_members",
    "envelope_generator_c1",
    "envelope_generator_c2",
    "equivalent",
    "generator_from_descriptor",
    "integrate_envelope",
    "make_exponential",
    "make_power",
    "normalize_affine",
    "normalized_distance",
    "pal91_convergence_report",
    "pal91_ratio_distance",
    "qa_mean",
    "qa_means",
    "ratio_envelope",
    "regularize",
    "regularize_step",
    "run_verification_suite",
    "small_delta",
    "sup_order",
    "uqa_lqa_report",
    "verify_envelope",
]
