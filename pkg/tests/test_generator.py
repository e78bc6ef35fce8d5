"""Generator construction, evaluation, inversion, and affine machinery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qam import (
    AffineOf,
    Direction,
    GridFunction,
    GridSampled,
    Interval,
    Kink,
    KinkSpec,
    PiecewiseLinearScaled,
    equivalent,
    generator_from_descriptor,
    make_exponential,
    make_power,
    normalize_affine,
    normalized_distance,
    qa_mean,
)
from qam.errors import (
    InvalidGenerator,
    NonPositiveInterval,
    OutOfDomain,
    OutOfRange,
    SecondDerivativeUnavailable,
)

IV = Interval(1.0, 10.0)


class TestConstruction:
    def test_power_value(self):
        assert make_power(2, IV).value(3.0) == pytest.approx(9.0, abs=0)

    def test_power_zero_is_log(self):
        g = make_power(0, IV)
        assert g.value(np.e) == pytest.approx(1.0, rel=1e-15)
        assert g.descriptor() == {"family": "log"}

    def test_negative_power_decreasing(self):
        assert make_power(-1, IV).direction is Direction.DECREASING

    def test_power_rejects_nonpositive_interval(self):
        with pytest.raises(NonPositiveInterval):
            make_power(2, Interval(-1.0, 10.0))
        with pytest.raises(NonPositiveInterval):
            make_power(0, Interval(0.0, 10.0))

    def test_exponential_any_interval(self):
        g = make_exponential(2, Interval(-3.0, 3.0))
        assert g.value(0.0) == pytest.approx(1.0, abs=0)
        assert make_exponential(-1, IV).direction is Direction.DECREASING

    def test_exponential_zero_rejected(self):
        with pytest.raises(InvalidGenerator):
            make_exponential(0, IV)

    def test_affine_zero_alpha_rejected(self):
        with pytest.raises(InvalidGenerator):
            AffineOf(make_power(2, IV), 0.0, 1.0)

    def test_kink_zero_slope_rejected(self):
        with pytest.raises(InvalidGenerator):
            Kink(2.0, 0.0, 1.0)

    def test_kinks_must_increase(self):
        with pytest.raises(InvalidGenerator):
            KinkSpec((Kink(3.0, 1.0, 0.5), Kink(2.0, 1.0, 0.5)))

    def test_grid_requires_strict_monotonicity(self):
        with pytest.raises(InvalidGenerator):
            GridSampled(GridFunction(IV, np.array([0.0, 1.0, 1.0, 2.0])))


class TestDerivatives:
    def test_power_derivative(self):
        assert make_power(2, IV).derivative(3.0) == pytest.approx(6.0, abs=0)

    def test_log_second_derivative(self):
        assert make_power(0, IV).second_derivative(2.0) == pytest.approx(-0.25, abs=0)

    def test_plain_grid_second_derivative_unavailable(self):
        xs = IV.grid(65)
        g = GridSampled(GridFunction(IV, xs**2))
        assert not g.has_second_derivative
        with pytest.raises(SecondDerivativeUnavailable):
            g.second_derivative(2.0)

    def test_plain_grid_derivative_is_interpolant_slope(self):
        xs = IV.grid(65)
        g = GridSampled(GridFunction(IV, xs**2))
        h = xs[1] - xs[0]
        expected = (xs[1] ** 2 - xs[0] ** 2) / h
        assert g.derivative(xs[0] + 0.5 * h) == pytest.approx(expected, rel=1e-14)

    def test_annotated_grid_derivative_interpolates(self):
        xs = IV.grid(65)
        g = GridSampled(GridFunction(IV, xs**2), derivatives=2.0 * xs)
        assert g.derivative(4.0) == pytest.approx(8.0, rel=1e-12)
        assert g.has_second_derivative
        assert g.second_derivative(4.0) == pytest.approx(2.0, rel=1e-6)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            make_power(2, IV).value(0.5)


class TestInverse:
    def test_sqrt(self):
        assert make_power(2, IV).inverse(25.0) == pytest.approx(5.0, rel=1e-12)

    def test_log_inverse(self):
        assert make_power(0, IV).inverse(0.0) == pytest.approx(1.0, rel=1e-12)

    def test_decreasing_inverse(self):
        assert make_power(-1, IV).inverse(0.5) == pytest.approx(2.0, rel=1e-12)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            make_power(2, IV).inverse(101.0)

    def test_inverse_of_value_is_identity(self, catalog):
        rng = np.random.default_rng(5)
        for name, g in catalog.items():
            xs = rng.uniform(IV.lo, IV.hi, size=100)
            back = g.inverse(np.asarray(g.value(xs)))
            assert np.max(np.abs(back - xs)) <= 1e-12 * IV.hi, name


class TestMonotonicity:
    def test_every_catalog_generator_strictly_monotone_on_1000_grid(self, catalog):
        xs = IV.grid(1000)
        for name, g in catalog.items():
            vals = np.asarray(g.value(xs))
            diffs = np.diff(vals)
            assert np.all(diffs > 0) or np.all(diffs < 0), name


class TestAffine:
    def test_normalize_anchors(self):
        g = normalize_affine(make_power(2, Interval(1.0, 3.0)))
        assert g.value(1.0) == 0.0
        assert g.value(3.0) == pytest.approx(1.0, abs=1e-15)
        # (x^2 - 1) / 8
        assert g.value(2.0) == pytest.approx(3.0 / 8.0, rel=1e-15)

    def test_normalize_identity_already_normalized(self):
        g = normalize_affine(make_power(1, Interval(0.5, 1.5)))
        xs = np.linspace(0.5, 1.5, 11)
        assert np.allclose(np.asarray(g.value(xs)), (xs - 0.5), atol=1e-15)

    def test_normalize_decreasing_same_mean(self):
        iv = Interval(1.0, 2.0)
        harm = make_power(-1, iv)
        norm = normalize_affine(harm)
        assert norm.direction is Direction.INCREASING
        rng = np.random.default_rng(0)
        for _ in range(100):
            v = rng.uniform(1.0, 2.0, size=rng.integers(2, 7))
            oracle = v.size / np.sum(1.0 / v)
            assert qa_mean(norm, v) == pytest.approx(oracle, abs=1e-10)
            assert qa_mean(harm, v) == pytest.approx(oracle, abs=1e-10)

    def test_normalize_idempotent(self):
        g = make_power(2, IV)
        once = normalize_affine(g)
        twice = normalize_affine(once)
        assert normalized_distance(once, twice) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(
        alpha=st.floats(min_value=0.01, max_value=100).flatmap(
            lambda a: st.sampled_from([a, -a])
        ),
        beta=st.floats(min_value=-50, max_value=50),
    )
    def test_affine_images_equivalent(self, alpha, beta):
        g = make_power(2, IV)
        assert equivalent(g, AffineOf(g, alpha, beta))

    def test_affine_related_trivial(self):
        g = make_power(2, IV)
        assert equivalent(g, AffineOf(g, 3.0, -7.0))
        assert equivalent(make_power(0, IV), make_power(0, IV))

    def test_distinct_powers_not_equivalent(self):
        assert not equivalent(make_power(1, IV), make_power(2, IV))
        assert normalized_distance(make_power(1, IV), make_power(2, IV)) > 1e-2


class TestPiecewise:
    def make_desk(self):
        base = make_power(1, Interval(0.5, 2.0))
        return PiecewiseLinearScaled(base, KinkSpec((Kink(1.0, 1.0, 0.5),)))

    def test_desk_values(self):
        f = self.make_desk()
        assert f.value(0.8) == pytest.approx(0.8, abs=0)
        assert f.value(1.0) == pytest.approx(1.0, abs=0)
        assert f.value(1.5) == pytest.approx(1.25, abs=0)
        assert f.value(2.0) == pytest.approx(1.5, abs=0)

    def test_desk_one_sided_slopes(self):
        f = self.make_desk()
        left, right = f.one_sided_slopes(1.0)
        assert left == pytest.approx(1.0, abs=0)
        assert right == pytest.approx(0.5, abs=0)

    def test_kink_must_be_interior(self):
        base = make_power(1, Interval(0.5, 2.0))
        with pytest.raises(InvalidGenerator):
            PiecewiseLinearScaled(base, KinkSpec((Kink(0.5, 1.0, 0.5),)))

    def test_no_second_derivative(self):
        with pytest.raises(SecondDerivativeUnavailable):
            self.make_desk().second_derivative(1.5)

    def test_descriptor_roundtrip_same_mean(self):
        f = self.make_desk()
        g = generator_from_descriptor(f.descriptor(), f.interval)
        assert equivalent(f, g)


class TestDescriptors:
    @pytest.mark.parametrize(
        "desc",
        [
            {"family": "power", "p": 2.0},
            {"family": "log"},
            {"family": "exp", "p": 1.5},
            {"family": "affine", "alpha": 2.0, "beta": -1.0,
             "base": {"family": "power", "p": 2.0}},
        ],
    )
    def test_roundtrip(self, desc):
        g = generator_from_descriptor(desc, IV)
        assert generator_from_descriptor(g.descriptor(), IV).descriptor() == g.descriptor()

    def test_grid_descriptor_carries_interval(self):
        xs = np.linspace(2.0, 5.0, 33)
        desc = {"family": "grid", "lo": 2.0, "hi": 5.0, "values": (xs**3).tolist()}
        g = generator_from_descriptor(desc)
        assert g.interval == Interval(2.0, 5.0)
        assert g.value(3.0) == pytest.approx(27.0, rel=1e-3)
