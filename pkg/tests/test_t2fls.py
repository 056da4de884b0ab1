"""Fuzzy engine: term geometry, rule base, firing, reduction, and its properties."""

import random
from itertools import permutations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsim.errors import ConfigurationError
from qsim.t2fls import (
    TERM_LABELS,
    InferenceEngine,
    IntervalMembership,
    IntervalTerm,
    Rule,
    RuleBase,
    default_engine,
    default_rule_base,
    default_terms,
    engine_from_config,
    evaluate_pod,
    fire_rule,
    fuzzify,
    make_term,
    trapezoid,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)


def grid_centroid(term, points=101):
    """Independent centroid oracle on the uniform grid."""
    num = den = 0.0
    for i in range(points):
        x = i / (points - 1)
        lo, hi = term.membership(x)
        num += x * (lo + hi) / 2
        den += (lo + hi) / 2
    return num / den


class TestTrapezoid:
    def test_plateau_and_outside(self):
        assert trapezoid(0.5, 0.2, 0.4, 0.6, 0.8) == 1.0
        assert trapezoid(0.1, 0.2, 0.4, 0.6, 0.8) == 0.0
        assert trapezoid(0.9, 0.2, 0.4, 0.6, 0.8) == 0.0

    def test_linear_edges(self):
        assert trapezoid(0.3, 0.2, 0.4, 0.6, 0.8) == pytest.approx(0.5)
        assert trapezoid(0.7, 0.2, 0.4, 0.6, 0.8) == pytest.approx(0.5)

    def test_degenerate_shoulders(self):
        assert trapezoid(0.0, 0.0, 0.0, 0.2, 0.45) == 1.0
        assert trapezoid(1.0, 0.55, 0.8, 1.0, 1.0) == 1.0


class TestTerms:
    def test_interval_containment_on_fine_grid(self):
        for term in default_terms():
            for i in range(1001):
                x = i / 1000
                lo, hi = term.membership(x)
                assert 0.0 <= lo <= hi <= 1.0

    def test_containment_holds_for_shrunk_lower_supports(self):
        term = make_term("medium", 0.2, 0.45, 0.55, 0.8, shrink=0.2, height=0.8)
        for i in range(1001):
            x = i / 1000
            lo, hi = term.membership(x)
            assert lo <= hi + 1e-12

    def test_misordered_shape_rejected(self):
        with pytest.raises(ConfigurationError):
            IntervalTerm(label="bad", upper=(0.5, 0.4, 0.6, 0.8), lower=(0.5, 0.4, 0.6, 0.8))

    def test_lower_exceeding_upper_rejected(self):
        with pytest.raises(ConfigurationError):
            IntervalTerm(label="bad", upper=(0.4, 0.5, 0.5, 0.6), lower=(0.2, 0.5, 0.5, 0.8))

    def test_invalid_height_and_shrink(self):
        with pytest.raises(ConfigurationError):
            make_term("x", 0.0, 0.1, 0.2, 0.3, height=0.0)
        with pytest.raises(ConfigurationError):
            make_term("x", 0.0, 0.1, 0.2, 0.3, shrink=1.0)


class TestFuzzify:
    def test_plateau_with_explicit_height(self):
        term = make_term("high", 0.55, 0.8, 1.0, 1.0, height=0.8)
        m = fuzzify(0.9, term)
        assert (m.lower, m.upper) == (0.8, 1.0)

    def test_outside_support_is_zero_interval(self):
        low = default_terms()[0]
        m = fuzzify(0.9, low)
        assert (m.lower, m.upper) == (0.0, 0.0)

    def test_rising_edge_matches_direct_interpolation(self):
        high = default_terms()[2]
        for x in (0.6, 0.65, 0.7, 0.78):
            g = (x - 0.55) / (0.8 - 0.55)
            m = fuzzify(x, high)
            assert m.upper == pytest.approx(g, abs=1e-12)
            assert m.lower == pytest.approx(0.9 * g, abs=1e-12)

    def test_out_of_range_input_clamped_with_diagnostic(self, caplog):
        low = default_terms()[0]
        with caplog.at_level("WARNING"):
            m = fuzzify(-0.25, low)
        assert m.upper == 1.0
        assert any("clamp" in r.message for r in caplog.records)

    def test_interval_membership_validation(self):
        with pytest.raises(ConfigurationError):
            IntervalMembership(lower=0.5, upper=0.4)
        with pytest.raises(ConfigurationError):
            IntervalMembership(lower=-0.1, upper=0.5)


class TestFireRule:
    RULE = Rule(antecedents=("low", "low", "low"), consequent="low")

    def test_identity(self):
        ones = [IntervalMembership(1.0, 1.0)] * 3
        fired = fire_rule(self.RULE, ones)
        assert (fired.lower, fired.upper) == (1.0, 1.0)

    def test_annihilator(self):
        mems = [IntervalMembership(0.3, 0.6), IntervalMembership(0.0, 0.0), IntervalMembership(0.9, 1.0)]
        fired = fire_rule(self.RULE, mems)
        assert (fired.lower, fired.upper) == (0.0, 0.0)

    def test_componentwise_minimum(self):
        mems = [IntervalMembership(0.2, 0.4), IntervalMembership(0.5, 0.9), IntervalMembership(0.3, 0.6)]
        fired = fire_rule(self.RULE, mems)
        assert (fired.lower, fired.upper) == (0.2, 0.4)

    def test_arity_mismatch(self):
        with pytest.raises(ConfigurationError):
            fire_rule(self.RULE, [IntervalMembership(0.1, 0.2)])


class TestRuleBase:
    def test_default_is_complete_and_monotone(self):
        base = default_rule_base()
        assert len(base) == 27
        combos = {r.antecedents for r in base.rules}
        assert len(combos) == 27

    def test_rank_average_spot_values(self):
        base = default_rule_base()
        assert base.consequent(("low", "low", "low")) == "low"
        assert base.consequent(("medium", "low", "low")) == "low"       # mean 1/3 rounds down
        assert base.consequent(("high", "low", "low")) == "medium"      # mean 2/3 rounds up
        assert base.consequent(("high", "high", "low")) == "medium"     # mean 4/3 rounds down
        assert base.consequent(("high", "high", "medium")) == "high"    # mean 5/3 rounds up
        assert base.consequent(("high", "high", "high")) == "high"

    def test_incomplete_base_rejected(self):
        rules = list(default_rule_base().rules)[:-1]
        with pytest.raises(ConfigurationError, match="incomplete"):
            RuleBase(rules)

    def test_duplicate_rejected(self):
        rules = list(default_rule_base().rules)
        rules.append(rules[0])
        with pytest.raises(ConfigurationError, match="duplicate"):
            RuleBase(rules)

    def test_non_monotone_base_rejected(self):
        table = {r.antecedents: r.consequent for r in default_rule_base().rules}
        table[("high", "high", "high")] = "low"
        with pytest.raises(ConfigurationError, match="monotone"):
            RuleBase(Rule(a, c) for a, c in table.items())

    def test_unknown_label_rejected(self):
        rules = list(default_rule_base().rules)
        rules[0] = Rule(("low", "low", "low"), "enormous")
        with pytest.raises(ConfigurationError, match="unknown term label"):
            RuleBase(rules)


class TestEvaluate:
    def test_all_low_inputs_hit_the_low_centroid(self):
        engine = default_engine()
        expected = grid_centroid(default_terms()[0])
        assert engine.evaluate(0.0, 0.0, 0.0) == pytest.approx(expected, abs=1e-9)
        assert expected <= 0.25

    def test_all_high_inputs_hit_the_high_centroid(self):
        engine = default_engine()
        expected = grid_centroid(default_terms()[2])
        assert engine.evaluate(1.0, 1.0, 1.0) == pytest.approx(expected, abs=1e-9)
        assert expected >= 0.75

    def test_midpoint_inputs_hit_the_medium_centroid(self):
        engine = default_engine()
        expected = grid_centroid(default_terms()[1])
        out = engine.evaluate(0.5, 0.5, 0.5)
        assert out == pytest.approx(expected, abs=1e-9)
        assert abs(out - 0.5) <= 0.05

    def test_zero_firing_mass_yields_zero(self):
        gappy = (
            make_term("low", 0.0, 0.0, 0.1, 0.2),
            make_term("medium", 0.4, 0.45, 0.55, 0.6),
            make_term("high", 0.8, 0.9, 1.0, 1.0),
        )
        engine = InferenceEngine(terms=gappy)
        assert engine.evaluate(0.3, 0.3, 0.3) == 0.0

    def test_permutation_symmetry(self):
        engine = default_engine()
        rng = random.Random(13)
        for _ in range(100):
            triple = tuple(rng.random() for _ in range(3))
            values = {engine.evaluate(*p) for p in permutations(triple)}
            assert max(values) - min(values) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(unit, unit, unit)
    def test_output_always_in_unit_interval(self, a, b, c):
        assert 0.0 <= default_engine().evaluate(a, b, c) <= 1.0

    def test_componentwise_monotonicity_on_sampled_pairs(self):
        engine = default_engine()
        rng = random.Random(0)
        for _ in range(500):
            u = [rng.random() for _ in range(3)]
            w = [x + rng.random() * (1.0 - x) for x in u]
            assert engine.evaluate(*u) <= engine.evaluate(*w) + 1e-9

    def test_type1_degeneration_matches_single_membership_weighted_centroid(self):
        # Zero footprint: lower shape identical to the upper one.
        terms = tuple(
            make_term(t.label, *t.upper, shrink=0.0, height=1.0) for t in default_terms()
        )
        engine = InferenceEngine(terms=terms)
        base = default_rule_base()
        centroids = {t.label: grid_centroid(t) for t in terms}

        def type1(x1, x2, x3):
            num = den = 0.0
            for combo in product(TERM_LABELS, repeat=3):
                firing = min(
                    trapezoid(x, *terms[TERM_LABELS.index(label)].upper)
                    for x, label in zip((x1, x2, x3), combo)
                )
                num += firing * centroids[base.consequent(combo)]
                den += firing
            return 0.0 if den <= 0 else num / den

        rng = random.Random(21)
        for _ in range(300):
            triple = tuple(rng.random() for _ in range(3))
            assert engine.evaluate(*triple) == pytest.approx(type1(*triple), abs=1e-9)

    def test_evaluate_pod_wrapper(self):
        assert evaluate_pod((0.5, 0.5, 0.5)) == default_engine().evaluate(0.5, 0.5, 0.5)
        with pytest.raises(ConfigurationError):
            evaluate_pod((0.5, 0.5))

    def test_engine_validates_construction(self):
        with pytest.raises(ConfigurationError):
            InferenceEngine(terms=default_terms()[:2])
        with pytest.raises(ConfigurationError):
            InferenceEngine(grid_points=1)


class TestEngineFromConfig:
    def test_term_and_rule_overrides(self):
        spec = {
            "terms": {"high": {"upper": [0.5, 0.7, 1.0, 1.0], "height": 0.8, "shrink": 0.05}},
            "rules": [{"antecedents": ["medium", "low", "low"], "consequent": "medium"}],
        }
        engine = engine_from_config(spec)
        assert engine.terms[2].upper == (0.5, 0.7, 1.0, 1.0)
        assert engine.terms[2].height == 0.8
        assert engine.rules.consequent(("medium", "low", "low")) == "medium"
        # untouched terms stay at the defaults
        assert engine.terms[0].upper == default_terms()[0].upper

    def test_non_monotone_override_rejected(self):
        spec = {"rules": [{"antecedents": ["high", "high", "high"], "consequent": "low"}]}
        with pytest.raises(ConfigurationError):
            engine_from_config(spec)

    def test_malformed_term_rejected(self):
        with pytest.raises(ConfigurationError):
            engine_from_config({"terms": {"low": {"upper": [0.1, 0.2]}}})

    def test_unknown_term_label_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown term labels"):
            engine_from_config({"terms": {"enormous": {"upper": [0.5, 0.7, 1.0, 1.0]}}})
