"""Compilation of rules into network structure.

Every rule becomes exactly one excitatory link. Positive body literals are its Positive
terminals and the head literal is its head terminal. Negative body literals become
Negative terminals under ``AS_TERMINAL``; under ``AS_INHIBITOR`` each one becomes a
simple inhibitory link from the thing onto the rule's link, unless the rule has no
positive body literal at all, in which case they stay Negative terminals. Every
unless-clause becomes one composite inhibitory link onto the rule's link.
"""

import logging

from typing import FrozenSet, Iterable, NamedTuple, Optional, Tuple

from noxlogic.network import Network, Polarity, Terminal
from noxlogic.rules import DEFAULT_POLICY, EncodingPolicy, Literal, Rule

logger = logging.getLogger(__name__)


class RuleNotFoundError(KeyError):
    """Raised when removing a rule whose structure is not in the network."""


class RuleConflictError(ValueError):
    """Raised when a rule would share its excitatory link with a rule whose
    exceptions differ."""


class CompiledRule(NamedTuple):
    """Structure of a rule expressed with thing names."""

    terminals: Tuple[Literal, ...]
    head: Literal
    inhibitors: FrozenSet[FrozenSet[str]]


def _polarity(literal: Literal) -> Polarity:
    return Polarity.NEGATIVE if literal.negated else Polarity.POSITIVE


def compile_rule(rule: Rule, policy: EncodingPolicy = DEFAULT_POLICY) -> CompiledRule:
    """Returns the link structure ``rule`` compiles to under ``policy``."""
    inhibitors = {frozenset(clause) for clause in rule.unless}
    if policy is EncodingPolicy.AS_TERMINAL or not rule.has_positive_body:
        terminals = rule.body
    else:
        terminals = tuple(lit for lit in rule.body if not lit.negated)
        inhibitors.update(frozenset({lit.thing}) for lit in rule.body if lit.negated)
    return CompiledRule(terminals, rule.head, frozenset(inhibitors))


def _terminals(net: Network, literals: Iterable[Literal]) -> FrozenSet[Terminal]:
    return frozenset(
        Terminal(net.neuron_id(lit.thing), _polarity(lit)) for lit in literals
    )


def _attached_inhibitors(net: Network, link_id: int) -> FrozenSet[FrozenSet[str]]:
    return frozenset(
        frozenset(net.thing(t.neuron) for t in ilink.terminals)
        for ilink in net.inhibitors_of(link_id)
    )


def _find_link(net: Network, compiled: CompiledRule) -> Optional[int]:
    names = [lit.thing for lit in compiled.terminals] + [compiled.head.thing]
    if any(name not in net for name in names):
        return None
    return net.find_excitatory_link(
        _terminals(net, compiled.terminals),
        Terminal(net.neuron_id(compiled.head.thing), _polarity(compiled.head)),
    )


def add_rule(net: Network, rule: Rule, policy: EncodingPolicy = DEFAULT_POLICY) -> int:
    """Adds the structure of ``rule`` to ``net``.

    Adding a rule that is already stored changes nothing.

    Returns:
        int: Id of the rule's excitatory link, which serves as the rule handle.

    Raises:
        RuleConflictError: If the rule's excitatory link is already stored with a
            different set of inhibitory links.
    """
    compiled = compile_rule(rule, policy)

    existing = _find_link(net, compiled)
    if existing is not None:
        if _attached_inhibitors(net, existing) != compiled.inhibitors:
            raise RuleConflictError(
                f"Rule '{rule}' shares excitatory link {existing} with a rule "
                "that has different exceptions"
            )
        return existing

    for thing in rule.things:
        net.add_neuron(thing)

    link_id = net.add_excitatory_link(
        _terminals(net, compiled.terminals),
        Terminal(net.neuron_id(compiled.head.thing), _polarity(compiled.head)),
    )
    for clause in sorted(compiled.inhibitors, key=sorted):
        net.add_inhibitory_link(
            frozenset(Terminal(net.neuron_id(thing)) for thing in clause), link_id
        )
    logger.debug(
        "Compiled '%s' to elink %d with %d inhibitors",
        rule,
        link_id,
        len(compiled.inhibitors),
    )
    return link_id


def remove_rule(
    net: Network, rule: Rule, policy: EncodingPolicy = DEFAULT_POLICY
) -> None:
    """Removes the excitatory link of ``rule`` and, with it, its inhibitory links.

    Neurons stay in the network. Structure of other rules is untouched.

    Raises:
        RuleNotFoundError: If the structure of ``rule`` is not in ``net``.
    """
    compiled = compile_rule(rule, policy)
    link_id = _find_link(net, compiled)
    if link_id is None or _attached_inhibitors(net, link_id) != compiled.inhibitors:
        raise RuleNotFoundError(f"Rule '{rule}' is not stored in the network")
    net.remove_excitatory_link(link_id)


def build(rules: Iterable[Rule], policy: EncodingPolicy = DEFAULT_POLICY) -> Network:
    """Compiles ``rules`` into a new network.

    Raises:
        RuleConflictError: If two rules share an excitatory link but not exceptions.
    """
    net = Network()
    count = 0
    for rule in rules:
        add_rule(net, rule, policy)
        count += 1
    logger.info("Built %r from %d rules (%s policy)", net, count, policy.value)
    return net
