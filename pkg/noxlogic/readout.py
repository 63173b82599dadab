"""Reading stored rules back out of a network, and bounded semantic comparison of rule
bases."""

import itertools
import logging
from dataclasses import dataclass

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from noxlogic.builder import build
from noxlogic.inference import Engine, NeuronState
from noxlogic.network import Network, Polarity
from noxlogic.rules import (
    DEFAULT_POLICY,
    EncodingPolicy,
    Literal,
    Rule,
    RuleBase,
    canonicalize,
)

logger = logging.getLogger(__name__)

DEFAULT_THING_BOUND = 12


class BoundExceededError(ValueError):
    """Raised when an exhaustive comparison is asked for too many things."""


def _literal(net: Network, neuron: int, polarity: Polarity) -> Literal:
    return Literal(net.thing(neuron), negated=polarity is Polarity.NEGATIVE)


def readout(net: Network, policy: EncodingPolicy = DEFAULT_POLICY) -> RuleBase:
    """Returns the canonical rule base stored in ``net``.

    Each excitatory link is one rule. Its terminals are the body and its head terminal
    is the head. A composite inhibitory link on it is an ``unless`` clause. A simple
    inhibitory link is read as ``not x`` when ``policy`` is ``AS_INHIBITOR``, the link
    has a Positive terminal and ``x`` is neither a terminal nor the head; otherwise it
    is ``unless (x)``.
    """
    rules: List[Rule] = []
    for link in net.elinks():
        body = [_literal(net, t.neuron, t.polarity) for t in link.terminals]
        head = _literal(net, link.head.neuron, link.head.polarity)
        used = {t.neuron for t in link.terminals} | {link.head.neuron}
        reads_negation = policy is EncodingPolicy.AS_INHIBITOR and any(
            t.polarity is Polarity.POSITIVE for t in link.terminals
        )

        unless: List[Tuple[str, ...]] = []
        for ilink in net.inhibitors_of(link.id):
            if len(ilink.terminals) == 1 and reads_negation:
                (terminal,) = ilink.terminals
                if terminal.neuron not in used:
                    body.append(Literal(net.thing(terminal.neuron), negated=True))
                    continue
            unless.append(tuple(sorted(net.thing(t.neuron) for t in ilink.terminals)))

        rules.append(Rule(tuple(body), head, tuple(unless)))
    return canonicalize(rules, policy)


@dataclass(frozen=True)
class EquivalenceResult:
    """Outcome of ``equivalent``. Truthy when no differing assignment was found."""

    equal: bool
    witness: Optional[Dict[str, bool]] = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.equal


def _observed(
    engine: Engine, facts: Dict[str, bool], things: Iterable[str]
) -> Dict[str, NeuronState]:
    states = engine.infer(facts, auto_create=True).states
    return {thing: states.get(thing, NeuronState()) for thing in things}


def equivalent(
    rules_a: Iterable[Rule],
    rules_b: Iterable[Rule],
    things: Sequence[str],
    policy: EncodingPolicy = DEFAULT_POLICY,
    bound: int = DEFAULT_THING_BOUND,
) -> EquivalenceResult:
    """Compares two rule bases by inference over every assignment to ``things``.

    Each thing is True, False or absent, so ``3 ** len(things)`` assignments are run
    in order, True first. The states of every thing known to either network are
    compared, value and contradiction flag alike.

    Returns:
        EquivalenceResult: ``equal`` and, if they differ, the first differing
            assignment (absent things omitted) as ``witness``.

    Raises:
        BoundExceededError: If there are more than ``bound`` things.
    """
    if len(things) > bound:
        raise BoundExceededError(
            f"{len(things)} things exceed the exhaustive comparison bound of {bound}"
        )

    net_a, net_b = build(rules_a, policy), build(rules_b, policy)
    engine_a, engine_b = Engine(net_a), Engine(net_b)
    observed = sorted(
        {t for _, t in net_a.neurons()} | {t for _, t in net_b.neurons()} | set(things)
    )

    checked = 0
    for values in itertools.product((True, False, None), repeat=len(things)):
        facts = {t: v for t, v in zip(things, values) if v is not None}
        checked += 1
        if _observed(engine_a, facts, observed) != _observed(engine_b, facts, observed):
            logger.info("Rule bases differ under %s", facts)
            return EquivalenceResult(False, facts, checked)
    return EquivalenceResult(True, None, checked)
