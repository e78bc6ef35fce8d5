"""Three comparison methods: individual verdicts and cross-method agreement."""

import pytest

from qam import (
    AffineOf,
    GridFunction,
    GridSampled,
    Interval,
    Relation,
    VectorSampler,
    compare_all,
    compare_convexity,
    compare_empirical,
    compare_ratio,
    make_exponential,
    make_power,
    qa_mean,
)
from qam.errors import DerivativeUnavailable, IntervalMismatch

IV = Interval(1.0, 10.0)

POWERS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0)


def power(p, iv=IV):
    return make_power(p, iv)


class TestRatio:
    def test_linear_below_quadratic(self, sampler):
        v = compare_ratio(power(1), power(2))
        assert v.relation is Relation.LEQ
        # brute-force cross-check straight from the definition
        e = compare_empirical(power(1), power(2), sampler)
        assert e.relation in (Relation.LEQ, Relation.EQUIV)

    def test_self_equiv(self):
        f = power(2)
        assert compare_ratio(f, f).relation is Relation.EQUIV

    def test_quadratic_above_log(self):
        assert compare_ratio(power(2), power(0)).relation is Relation.GEQ

    def test_affine_copy_equiv(self):
        f = power(3)
        assert compare_ratio(f, AffineOf(f, 3.0, 1.0)).relation is Relation.EQUIV

    def test_decreasing_operands_canonicalized(self):
        assert compare_ratio(power(-2), power(-1)).relation is Relation.LEQ

    def test_incomparable_with_note(self):
        v = compare_ratio(power(3), make_exponential(1, IV))
        assert v.relation is Relation.INCOMPARABLE
        assert v.margin > 1e-4
        assert "drop" in v.note and "rise" in v.note

    def test_plain_grid_rejected(self):
        xs = IV.grid(65)
        g = GridSampled(GridFunction(IV, xs**2))
        with pytest.raises(DerivativeUnavailable):
            compare_ratio(g, power(1))

    def test_interval_mismatch(self):
        with pytest.raises(IntervalMismatch):
            compare_ratio(power(1), power(1, Interval(1.0, 5.0)))


class TestConvexity:
    def test_log_below_linear(self):
        assert compare_convexity(power(0), power(1)).relation is Relation.LEQ

    def test_identity_composition_equiv(self):
        f = power(2)
        assert compare_convexity(f, f).relation is Relation.EQUIV

    def test_cubic_above_linear(self, sampler):
        v = compare_convexity(power(3), power(1))
        assert v.relation is Relation.GEQ
        e = compare_empirical(power(3), power(1), sampler)
        assert e.relation in (Relation.GEQ, Relation.EQUIV)

    def test_grid_operand_allowed(self):
        xs = IV.grid(4097)
        g = GridSampled(GridFunction(IV, xs**2))
        assert compare_convexity(power(1), g).relation is Relation.LEQ


class TestEmpirical:
    def test_power_mean_inequality_sampled(self, sampler):
        v = compare_empirical(power(1), power(2), sampler)
        assert v.relation is Relation.LEQ
        assert not v.witnesses

    def test_reversed(self, sampler):
        assert compare_empirical(power(2), power(1), sampler).relation is Relation.GEQ

    def test_same_mean_equiv(self, sampler):
        f = power(2)
        v = compare_empirical(f, AffineOf(f, -2.0, 0.0), sampler)
        assert v.relation is Relation.EQUIV
        assert v.margin <= 1e-10

    def test_incomparable_has_two_witnesses(self, sampler):
        f, g = power(3), make_exponential(1, IV)
        v = compare_empirical(f, g, sampler)
        assert v.relation is Relation.INCOMPARABLE
        assert len(v.witnesses) == 2
        w_leq, w_geq = v.witnesses
        assert qa_mean(f, w_leq) > qa_mean(g, w_leq) + 1e-10
        assert qa_mean(f, w_geq) < qa_mean(g, w_geq) - 1e-10


def _pair_catalog(catalog):
    """Comparable pairs: powers, exponentials, mixed, one piecewise."""
    pairs = []
    for i, p in enumerate(POWERS):
        for q in POWERS[i + 1:]:
            name_p = "log" if p == 0 else f"power:{p:g}"
            name_q = "log" if q == 0 else f"power:{q:g}"
            pairs.append((catalog[name_p], catalog[name_q]))
    pairs += [
        (catalog["exp:-1"], catalog["exp:1"]),
        (catalog["exp:1"], catalog["exp:2"]),
        (catalog["exp:-1"], catalog["exp:2"]),
        (catalog["log"], catalog["exp:1"]),
        (catalog["power:1"], catalog["exp:1"]),
        (catalog["power:2"], catalog["exp:2"]),
        (catalog["exp:-1"], catalog["log"]),
        (catalog["piecewise:1"], catalog["power:1"]),
    ]
    return pairs


class TestMethodAgreement:
    def test_no_contradictions_on_catalog_pairs(self, catalog):
        sampler = VectorSampler(seed=7, count=200)
        pairs = _pair_catalog(catalog)
        assert len(pairs) >= 20
        for f, g in pairs:
            merged, results = compare_all(f, g, sampler)  # raises on conflict
            assert merged.relation in (Relation.LEQ, Relation.EQUIV)

    def test_power_order(self, catalog):
        for i, p in enumerate(POWERS):
            for q in POWERS[i + 1:]:
                f = catalog["log" if p == 0 else f"power:{p:g}"]
                g = catalog["log" if q == 0 else f"power:{q:g}"]
                assert compare_ratio(f, g).relation is Relation.LEQ, (p, q)

    def test_transitivity_spot_check(self, catalog, sampler):
        triples = [
            ("power:-1", "log", "power:1"),
            ("power:0.5", "power:1", "power:2"),
            ("log", "power:2", "power:3"),
            ("power:1", "exp:1", "exp:2"),
        ]
        for a, b, c in triples:
            f, g, h = catalog[a], catalog[b], catalog[c]
            assert compare_ratio(f, g).relation is Relation.LEQ
            assert compare_ratio(g, h).relation is Relation.LEQ
            v = compare_empirical(f, h, sampler)
            assert v.relation in (Relation.LEQ, Relation.EQUIV), (a, c)

    def test_merged_prefers_ratio(self, catalog, sampler):
        merged, results = compare_all(catalog["power:1"], catalog["power:2"], sampler)
        assert merged.method.value == "ratio"

    def test_plain_grid_routes_to_convexity(self, sampler):
        xs = IV.grid(4097)
        g = GridSampled(GridFunction(IV, xs**2))
        merged, results = compare_all(power(1), g, sampler)
        assert results[list(results)[0]].relation is Relation.UNKNOWN
        assert merged.method.value == "convexity"
        assert merged.relation is Relation.LEQ


class TestVerdictSerialization:
    def test_json_dict_shape(self, sampler):
        v = compare_empirical(power(3), make_exponential(1, IV), sampler)
        d = v.to_json_dict()
        assert d["relation"] == "INCOMPARABLE"
        assert d["method"] == "empirical"
        assert isinstance(d["margin"], float)
        assert len(d["witness"]) == 2

    def test_no_witness_serializes_null(self):
        v = compare_ratio(power(1), power(2))
        assert v.to_json_dict()["witness"] is None
