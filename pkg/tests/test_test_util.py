"""Test for testing utility functions from ``tests/util.py``."""

import random

import pytest

from noxlogic.builder import build
from noxlogic.network import Value
from noxlogic.rules import EncodingPolicy, parse_rules

from .util import count_tokens, oracle, random_rule_base


class TestCountTokens:
    def test_empty_text_counts_nothing(self):
        assert count_tokens("") == (0, 0, 0, 0)

    def test_counts_things_rules_negations_and_clauses(self):
        text = "if a, not b then c\n# comment\n\nif c unless (d and a) then e\n"
        assert count_tokens(text) == (5, 2, 1, 1)

    def test_repeated_rule_is_counted_once(self):
        assert count_tokens("if a then b\nif a then b\n").rules == 1

    def test_keywords_are_case_insensitive(self):
        assert count_tokens("IF a AND NOT b THEN c").things == 3


class TestRandomRuleBase:
    @pytest.mark.parametrize("policy", list(EncodingPolicy))
    def test_same_seed_gives_same_rules(self, policy: EncodingPolicy):
        first = random_rule_base(random.Random(7), policy)
        second = random_rule_base(random.Random(7), policy)
        assert first == second

    @pytest.mark.parametrize("policy", list(EncodingPolicy))
    def test_rule_bases_build_without_conflicts(self, policy: EncodingPolicy):
        rng = random.Random(11)
        for _ in range(50):
            build(random_rule_base(rng, policy), policy)

    def test_respects_limits(self):
        rng = random.Random(3)
        for _ in range(50):
            rules = random_rule_base(
                rng, EncodingPolicy.AS_INHIBITOR, max_things=5, max_rules=6
            )
            assert len(rules) <= 6
            assert len({t for rule in rules for t in rule.things}) <= 5

    def test_without_negated_heads(self):
        rng = random.Random(5)
        for _ in range(50):
            rules = random_rule_base(
                rng, EncodingPolicy.AS_INHIBITOR, negated_heads=False
            )
            assert not any(rule.head.negated for rule in rules)


class TestOracle:
    def test_chains_rules(self):
        rules = list(parse_rules("if a then b\nif b then c\n"))
        values = oracle(rules, {"a": True}, EncodingPolicy.AS_INHIBITOR)
        assert values == {"a": Value.TRUE, "b": Value.TRUE, "c": Value.TRUE}

    def test_negation_as_inhibitor_needs_only_not_true(self):
        rules = list(parse_rules("if a, not b then c\n"))
        values = oracle(rules, {"a": True}, EncodingPolicy.AS_INHIBITOR)
        assert values is not None
        assert values["c"] is Value.TRUE

    def test_negation_as_terminal_needs_false(self):
        rules = list(parse_rules("if a, not b then c\n"))
        unknown_b = oracle(rules, {"a": True}, EncodingPolicy.AS_TERMINAL)
        false_b = oracle(rules, {"a": True, "b": False}, EncodingPolicy.AS_TERMINAL)
        assert unknown_b is not None and false_b is not None
        assert unknown_b["c"] is Value.UNKNOWN
        assert false_b["c"] is Value.TRUE

    def test_lower_stratum_blocks_before_upper_fires(self):
        rules = list(parse_rules("if x then b\nif a, not b then c\n"))
        values = oracle(rules, {"a": True, "x": True}, EncodingPolicy.AS_INHIBITOR)
        assert values is not None
        assert values["c"] is Value.UNKNOWN

    def test_unless_clause_blocks_when_all_true(self):
        rules = list(parse_rules("if a unless (b and d) then c\n"))
        partial = oracle(rules, {"a": True, "b": True}, EncodingPolicy.AS_INHIBITOR)
        full = oracle(
            rules, {"a": True, "b": True, "d": True}, EncodingPolicy.AS_INHIBITOR
        )
        assert partial is not None and full is not None
        assert partial["c"] is Value.TRUE
        assert full["c"] is Value.UNKNOWN

    def test_negative_cycle_is_not_stratified(self):
        rules = list(parse_rules("if a, not c then b\nif b then c\n"))
        assert oracle(rules, {}, EncodingPolicy.AS_INHIBITOR) is None
