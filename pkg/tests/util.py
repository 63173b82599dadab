"""Utility functions used only in tests."""

import random
import re
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Set

from noxlogic.builder import RuleConflictError, add_rule
from noxlogic.network import Network, Value
from noxlogic.rules import EncodingPolicy, Literal, Rule

_WORD = re.compile(r"[A-Za-z0-9_=\-]+")
_KEYWORDS = {"if", "then", "not", "and", "unless"}


class TokenCounts(NamedTuple):
    things: int
    rules: int
    negations: int
    clauses: int


def count_tokens(text: str) -> TokenCounts:
    """Counts things, rules, negated literals and unless-clauses of a rule file by
    walking its words, without the rule parser.

    Repeated rules are counted once."""
    things: Set[str] = set()
    rules: Set[str] = set()
    negations = clauses = 0
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or line in rules:
            continue
        rules.add(line)
        words = _WORD.findall(line)
        negations += sum(1 for word in words if word.lower() == "not")
        clauses += sum(1 for word in words if word.lower() == "unless")
        things.update(word for word in words if word.lower() not in _KEYWORDS)
    return TokenCounts(len(things), len(rules), negations, clauses)


def random_rule(
    rng: random.Random,
    things: Sequence[str],
    negated_heads: bool = True,
    max_clauses: int = 2,
) -> Rule:
    """Draws one valid rule over ``things``."""
    head = rng.choice(things)
    others = [t for t in things if t != head]
    body_things = rng.sample(others, rng.randint(1, min(3, len(others))))
    body = tuple(Literal(t, rng.random() < 0.3) for t in body_things)
    unless = tuple(
        tuple(rng.sample(things, rng.randint(1, min(2, len(things)))))
        for _ in range(rng.randint(0, max_clauses))
        if rng.random() < 0.5
    )
    return Rule(body, Literal(head, negated_heads and rng.random() < 0.2), unless)


def random_rule_base(
    rng: random.Random,
    policy: EncodingPolicy,
    max_things: int = 8,
    max_rules: int = 10,
    negated_heads: bool = True,
) -> List[Rule]:
    """Draws a rule base that builds without conflicting exceptions under ``policy``."""
    things = [f"t{i}" for i in range(rng.randint(2, max_things))]
    net = Network()
    rules: List[Rule] = []
    for _ in range(rng.randint(0, max_rules)):
        rule = random_rule(rng, things, negated_heads)
        try:
            add_rule(net, rule, policy)
        except RuleConflictError:
            continue
        rules.append(rule)
    return rules


def _strata(rules: Sequence[Rule], policy: EncodingPolicy) -> Optional[Dict[str, int]]:
    """Assigns strata so that a head is at least as high as its positive conditions
    and strictly higher than the things that can block it. ``None`` when a cycle runs
    through a blocking thing."""
    things = {t for rule in rules for t in rule.things}
    stratum = {t: 0 for t in things}
    limit = len(things) + 1
    changed = True
    while changed:
        changed = False
        for rule in rules:
            head = rule.head.thing
            needed = stratum[head]
            for lit in rule.body:
                if _blocks(rule, lit, policy):
                    needed = max(needed, stratum[lit.thing] + 1)
                else:
                    needed = max(needed, stratum[lit.thing])
            for clause in rule.unless:
                for thing in clause:
                    needed = max(needed, stratum[thing] + 1)
            if needed > stratum[head]:
                if needed > limit:
                    return None
                stratum[head] = needed
                changed = True
    return stratum


def _blocks(rule: Rule, lit: Literal, policy: EncodingPolicy) -> bool:
    return (
        lit.negated
        and policy is EncodingPolicy.AS_INHIBITOR
        and rule.has_positive_body
    )


def _holds(
    rule: Rule, values: Mapping[str, Value], policy: EncodingPolicy
) -> bool:
    for lit in rule.body:
        value = values.get(lit.thing, Value.UNKNOWN)
        if _blocks(rule, lit, policy):
            if value is Value.TRUE:
                return False
        elif lit.negated:
            if value is not Value.FALSE:
                return False
        elif value is not Value.TRUE:
            return False
    return not any(
        all(values.get(t, Value.UNKNOWN) is Value.TRUE for t in clause)
        for clause in rule.unless
    )


def oracle(
    rules: Sequence[Rule], facts: Mapping[str, bool], policy: EncodingPolicy
) -> Optional[Dict[str, Value]]:
    """Naive stratified forward chaining straight over the rules.

    Rules are applied stratum by stratum until nothing changes. ``not x`` read as an
    inhibitor holds while ``x`` is not True; read as a terminal it needs ``x`` False.

    Returns:
        Optional[Dict[str, Value]]: Value of every thing, or ``None`` if the rules
            cannot be stratified.
    """
    strata = _strata(rules, policy)
    if strata is None:
        return None
    values = {t: Value.UNKNOWN for t in strata}
    values.update({t: Value.from_bool(v) for t, v in facts.items()})

    for level in sorted(set(strata.values())):
        layer = [r for r in rules if strata[r.head.thing] == level]
        changed = True
        while changed:
            changed = False
            for rule in layer:
                head = rule.head.thing
                if values[head] is Value.UNKNOWN and _holds(rule, values, policy):
                    values[head] = Value.from_bool(not rule.head.negated)
                    changed = True
    return values
