"""Slope-matching projection of kinked generators onto smooth ones."""

import numpy as np
import pytest

from qam import (
    AffineOf,
    Interval,
    Kink,
    KinkSpec,
    PiecewiseLinearScaled,
    Relation,
    VectorSampler,
    compare_convexity,
    compare_empirical,
    compare_ratio,
    equivalent,
    make_power,
    pal91_convergence_report,
    qa_means,
    regularize,
    regularize_step,
)
from qam.errors import DomainError, EmptyProjection, SlopeOrderViolation

IVD = Interval(0.5, 2.0)


def desk():
    """Slope 1 up to z = 1, slope 1/2 beyond."""
    return PiecewiseLinearScaled(
        make_power(1, IVD), KinkSpec((Kink(1.0, 1.0, 0.5),))
    )


def same_side_pair():
    """Two kinks at 0.7 and 0.9; the default anchor lands above both."""
    return PiecewiseLinearScaled(
        make_power(1, IVD),
        KinkSpec((Kink(0.7, 1.0, 0.6), Kink(0.9, 1.0, 0.5))),
    )


def straddling_pair():
    """Kinks at 0.8 and 1.5; the default anchor lands between them."""
    return PiecewiseLinearScaled(
        make_power(1, IVD),
        KinkSpec((Kink(0.8, 1.0, 0.6), Kink(1.5, 1.0, 0.5))),
    )


class TestStep:
    def test_upper_heal_of_desk_example_is_exact_identity(self):
        stepped = regularize_step(desk(), z_plus=1.0)
        xs = IVD.grid(401)
        assert np.array_equal(np.asarray(stepped.value(xs)), xs)

    def test_lower_heal_of_desk_example(self):
        stepped = regularize_step(desk(), z_minus=1.0)
        xs = IVD.grid(401)
        assert np.allclose(np.asarray(stepped.value(xs)), 0.5 * (xs + 1.0), atol=1e-15)

    def test_kinkless_unchanged(self):
        g = make_power(2, IVD)
        assert regularize_step(g) is g

    def test_pair_removed_in_one_step(self):
        f = straddling_pair()
        stepped = regularize_step(f, z_minus=0.8, z_plus=1.5)
        assert isinstance(stepped, AffineOf)

    def test_unknown_kink_rejected(self):
        with pytest.raises(DomainError):
            regularize_step(desk(), z_plus=1.3)


class TestRegularize:
    def test_desk_one_step_to_identity(self):
        m, trace = regularize(desk(), "upper")
        assert len(trace.iterates) == 2
        assert trace.kinks_remaining == (1, 0)
        assert equivalent(m, make_power(1, IVD))
        # grid one-sided difference quotients agree at the former kink
        eps = 1e-6 * IVD.span
        left = (m.value(1.0) - m.value(1.0 - eps)) / eps
        right = (m.value(1.0 + eps) - m.value(1.0)) / eps
        assert abs(left - right) <= 1e-6 * abs(left)

    def test_desk_mean_matches_arithmetic(self):
        m, _ = regularize(desk(), "upper")
        vectors = VectorSampler(seed=11, count=1000).sample(IVD)
        got = qa_means(m, vectors)
        expect = np.array([np.mean(v) for v in vectors])
        assert np.max(np.abs(got - expect)) <= 1e-8

    def test_projection_probe(self, sampler):
        f = desk()
        m, _ = regularize(f, "upper")
        p1 = make_power(1, IVD)
        p2 = make_power(2, IVD)
        for g in (p1, p2):
            assert compare_ratio(f, g).relation in (Relation.LEQ, Relation.EQUIV)
        assert compare_ratio(m, p1).relation is Relation.EQUIV
        assert compare_ratio(m, p2).relation is Relation.LEQ

    def test_kinkless_trivial_trace(self):
        g = make_power(2, IVD)
        m, trace = regularize(g, "upper")
        assert m is g
        assert trace.kinks_remaining == (0,)
        assert trace.pal91_distances == (0.0,)

    def test_same_side_two_steps(self):
        m, trace = regularize(same_side_pair(), "upper")
        assert trace.kinks_remaining == (2, 1, 0)
        assert equivalent(m, make_power(1, IVD))

    def test_straddling_single_paired_step(self):
        m, trace = regularize(straddling_pair(), "upper")
        assert trace.kinks_remaining == (2, 0)
        assert equivalent(m, make_power(1, IVD))

    def test_idempotent(self):
        m, _ = regularize(desk(), "upper")
        again, trace = regularize(m, "upper")
        assert again is m
        assert len(trace.iterates) == 1

    def test_slope_order_violation(self):
        with pytest.raises(SlopeOrderViolation):
            regularize(desk(), "lower")

    def test_lower_direction_on_rising_kinks(self):
        f = PiecewiseLinearScaled(
            make_power(1, IVD), KinkSpec((Kink(1.0, 0.5, 1.0),))
        )
        m, trace = regularize(f, "lower")
        assert equivalent(m, make_power(1, IVD))
        with pytest.raises(SlopeOrderViolation):
            regularize(f, "upper")

    def test_both_with_kinks_is_empty_projection(self):
        with pytest.raises(EmptyProjection):
            regularize(desk(), "both")

    def test_both_without_kinks_trivial(self):
        g = make_power(2, IVD)
        m, _ = regularize(g, "both")
        assert m is g

    def test_anchor_must_avoid_kinks(self):
        with pytest.raises(DomainError):
            regularize(desk(), "upper", x0=1.0)


class TestIterationShape:
    @pytest.mark.parametrize("make", [same_side_pair, straddling_pair])
    def test_pointwise_nondecreasing_with_fixed_anchor(self, make):
        m, trace = regularize(make(), "upper")
        xs = IVD.grid(801)
        for a, b in zip(trace.iterates, trace.iterates[1:]):
            va = np.asarray(a.value(xs))
            vb = np.asarray(b.value(xs))
            assert np.all(vb >= va - 1e-12)
            assert abs(b.value(trace.anchor) - a.value(trace.anchor)) <= 1e-13

    def test_mean_growth_each_step(self, sampler):
        _, trace = regularize(same_side_pair(), "upper")
        for a, b in zip(trace.iterates, trace.iterates[1:]):
            v = compare_empirical(a, b, sampler)
            assert v.relation in (Relation.LEQ, Relation.EQUIV)

    def test_gluing_keeps_composition_concave(self):
        # identity dominates the kinked iterates; each heal must keep
        # the composition's secant slopes nonincreasing across the seam
        g = make_power(1, IVD)
        _, trace = regularize(same_side_pair(), "upper")
        for it in trace.iterates:
            assert compare_convexity(it, g).relation in (
                Relation.LEQ, Relation.EQUIV
            )

    def test_processing_order_equivalent_limits(self):
        f = straddling_pair()
        m_mid, _ = regularize(f, "upper")          # paired step
        m_above, ta = regularize(f, "upper", x0=1.9)  # both kinks below anchor
        m_below, tb = regularize(f, "upper", x0=0.6)  # both kinks above anchor
        assert ta.kinks_remaining == (2, 1, 0)
        assert tb.kinks_remaining == (2, 1, 0)
        assert equivalent(m_mid, m_above)
        assert equivalent(m_mid, m_below)


class TestPal91Report:
    def test_one_kink_two_entries(self):
        m, trace = regularize(desk(), "upper")
        report = pal91_convergence_report(trace, m)
        assert len(report) == 2
        assert report[0] > 0.0
        assert report[1] == 0.0

    def test_kinkless_single_zero(self):
        g = make_power(2, IVD)
        m, trace = regularize(g, "upper")
        assert pal91_convergence_report(trace, m) == [0.0]

    def test_two_kinks_three_entries_strictly_decreasing(self):
        m, trace = regularize(same_side_pair(), "upper")
        report = pal91_convergence_report(trace, m)
        assert len(report) == 3
        assert report[-1] == 0.0
        assert all(a > b for a, b in zip(report, report[1:]))

    def test_trace_distances_match_report(self):
        m, trace = regularize(same_side_pair(), "upper")
        assert list(trace.pal91_distances) == pal91_convergence_report(trace, m)
