"""Tests for module ``noxlogic.builder``."""

import random

import pytest

from noxlogic.builder import (
    RuleConflictError,
    RuleNotFoundError,
    add_rule,
    build,
    compile_rule,
    remove_rule,
)
from noxlogic.library import ANIMAL_RULES, ANIMAL_RULES_TEXT, R7_RULES
from noxlogic.network import Network, NetworkStats, Polarity, same_structure
from noxlogic.readout import readout
from noxlogic.rules import EncodingPolicy, Literal, parse_rule, parse_rules

from .util import count_tokens, random_rule_base

XOR_TEXT = "if a, not b then c\nif b, not a then c\n"


class TestCompileRule:
    def test_negation_becomes_inhibitor(self):
        compiled = compile_rule(parse_rule("if a, not b then c"))
        assert compiled.terminals == (Literal("a"),)
        assert compiled.inhibitors == {frozenset({"b"})}

    def test_negation_stays_terminal(self):
        compiled = compile_rule(
            parse_rule("if a, not b then c"), EncodingPolicy.AS_TERMINAL
        )
        assert compiled.terminals == (Literal("a"), Literal("b", negated=True))
        assert compiled.inhibitors == frozenset()

    def test_all_negative_body_falls_back_to_terminals(self):
        compiled = compile_rule(parse_rule("if not a, not b then c"))
        assert compiled.terminals == (
            Literal("a", negated=True),
            Literal("b", negated=True),
        )
        assert compiled.inhibitors == frozenset()

    def test_unless_clause_becomes_composite_inhibitor(self):
        compiled = compile_rule(parse_rule("if a unless (b and d) then c"))
        assert compiled.inhibitors == {frozenset({"b", "d"})}


class TestBuild:
    def test_empty_rule_base(self):
        assert build([]).stats() == NetworkStats(0, 0, 0)

    def test_r7_rules(self):
        net = build(R7_RULES.values())
        assert net.stats() == NetworkStats(7, 4, 0)
        assert all(len(link.terminals) >= 3 for link in net.elinks())

    def test_xor_under_inhibitor_policy(self):
        net = build(parse_rules(XOR_TEXT))
        assert net.stats() == NetworkStats(3, 2, 2)

    def test_xor_under_terminal_policy(self):
        net = build(parse_rules(XOR_TEXT), EncodingPolicy.AS_TERMINAL)
        assert net.stats() == NetworkStats(3, 2, 0)
        negatives = [
            t
            for link in net.elinks()
            for t in link.terminals
            if t.polarity is Polarity.NEGATIVE
        ]
        assert len(negatives) == 2

    def test_animal_counts_match_token_walk(self):
        counts = count_tokens(ANIMAL_RULES_TEXT)
        assert build(ANIMAL_RULES).stats() == NetworkStats(
            counts.things, counts.rules, counts.negations + counts.clauses
        )

    def test_negated_head(self):
        net = build([parse_rule("if b then not c")])
        (link,) = net.elinks()
        assert link.head.polarity is Polarity.NEGATIVE

    def test_duplicated_rule_base_builds_same_network(self):
        rules = list(ANIMAL_RULES)
        assert build(rules + rules) == build(rules)

    def test_rule_order_does_not_change_structure(self):
        rules = list(ANIMAL_RULES)
        shuffled = rules[:]
        random.Random(1).shuffle(shuffled)
        assert same_structure(build(rules), build(shuffled))
        assert readout(build(rules)) == readout(build(shuffled))

    def test_policies_agree_on_positive_rules(self):
        rules = parse_rules("if a, b then c\nif c then d\n")
        assert build(rules, EncodingPolicy.AS_INHIBITOR) == build(
            rules, EncodingPolicy.AS_TERMINAL
        )

    def test_conflicting_exceptions_are_rejected(self):
        rules = [parse_rule("if a, not b then c"), parse_rule("if a then c")]
        with pytest.raises(RuleConflictError):
            build(rules)

    def test_equal_rules_in_other_spelling_share_link(self):
        net = Network()
        first = add_rule(net, parse_rule("if a, not b then c"))
        second = add_rule(net, parse_rule("if a unless (b) then c"))
        assert first == second
        assert net.stats() == NetworkStats(3, 1, 1)


class TestAddRemoveRule:
    def test_add_then_remove_keeps_neurons(self):
        net = Network()
        rule = parse_rule("if a, not b unless (d and e) then c")
        add_rule(net, rule)
        remove_rule(net, rule)
        assert net.stats() == NetworkStats(5, 0, 0)
        assert net.audit() == []

    def test_remove_never_added_rule(self):
        net = build(ANIMAL_RULES)
        with pytest.raises(RuleNotFoundError):
            remove_rule(net, parse_rule("if hair then bird"))

    def test_remove_with_other_exceptions_is_not_found(self):
        net = build([parse_rule("if a, not b then c")])
        with pytest.raises(RuleNotFoundError):
            remove_rule(net, parse_rule("if a then c"))

    def test_remove_leaves_other_rules(self):
        net = build(R7_RULES.values())
        remove_rule(net, R7_RULES["R7.1"])
        assert net.stats() == NetworkStats(7, 3, 0)
        assert readout(net) == readout(
            build(rule for label, rule in R7_RULES.items() if label != "R7.1")
        )

    @pytest.mark.parametrize("policy", list(EncodingPolicy))
    def test_add_then_remove_restores_links(self, policy: EncodingPolicy):
        rng = random.Random(21)
        for _ in range(100):
            rules = random_rule_base(rng, policy)
            if not rules:
                continue
            net = build(rules[:-1], policy)
            before = (net.elinks(), net.ilinks())
            try:
                add_rule(net, rules[-1], policy)
            except RuleConflictError:
                continue
            if (net.elinks(), net.ilinks()) == before:
                continue
            remove_rule(net, rules[-1], policy)
            assert (net.elinks(), net.ilinks()) == before
            assert net.audit() == []
