"""Activation propagation over a network.

Inference runs in simultaneous rounds. In every round each link whose terminals are all
satisfied by the states at the start of the round is *triggered*; an excitatory link
*fires* when it is triggered and no triggered inhibitory link targets it. Each firing
asserts the value of its head terminal on the head neuron:

- an Unknown neuron takes the asserted value,
- an agreeing assertion changes nothing,
- a disagreeing assertion (also against an input fact) flags the neuron contradictory.

A contradictory neuron keeps its first value and satisfies no terminal afterwards. The
run stops after the first round that changes nothing. Links that fired but whose
inhibitors are triggered in the final state are reported as unstable, not retracted.
"""

import difflib
import logging
from dataclasses import dataclass, field

from typing import (
    Dict,
    FrozenSet,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Set,
    Tuple,
)

import networkx as nx

from noxlogic.network import Network, Polarity, Value, validate_thing

logger = logging.getLogger(__name__)

_FACT_VALUES = ["true", "false"]


class UnknownThingError(KeyError):
    """Raised when a fact or an explained thing is not represented in the network."""


class FactsFormatError(ValueError):
    """Raised for malformed lines in a facts file."""


@dataclass(frozen=True)
class NeuronState:
    value: Value = Value.UNKNOWN
    contradictory: bool = False

    def __str__(self) -> str:
        if self.contradictory:
            return f"{self.value.value} (contradictory)"
        return self.value.value


class TraceEntry(NamedTuple):
    round: int
    link: int
    thing: str
    value: Value


@dataclass
class InferenceResult:
    """Outcome of one inference run. States are keyed by thing name.

    Attributes:
        states (Dict[str, NeuronState]): Final state of every neuron.
        facts (Dict[str, bool]): Input facts the run started from.
        fired (Set[int]): Excitatory links that fired in any round.
        blocked (Dict[int, Set[int]]): Triggered excitatory links that were blocked,
            mapped to the inhibitory links that blocked them.
        contradictions (Set[str]): Things whose neurons were flagged contradictory.
        unstable (Set[int]): Fired links whose inhibitors are triggered at the end.
        trace (List[TraceEntry]): Assertions that changed a neuron, in round order.
        rounds (int): Rounds executed, including the final quiet one.
    """

    network: Network
    states: Dict[str, NeuronState]
    facts: Dict[str, bool]
    fired: Set[int] = field(default_factory=set)
    blocked: Dict[int, Set[int]] = field(default_factory=dict)
    contradictions: Set[str] = field(default_factory=set)
    unstable: Set[int] = field(default_factory=set)
    trace: List[TraceEntry] = field(default_factory=list)
    rounds: int = 0

    def value(self, thing: str) -> Value:
        return self.states[thing].value

    def is_true(self, thing: str) -> bool:
        """``True`` if ``thing`` is True and not contradictory."""
        state = self.states.get(thing)
        return (
            state is not None
            and state.value is Value.TRUE
            and not state.contradictory
        )


class _CompiledLink(NamedTuple):
    id: int
    positive: FrozenSet[int]
    negative: FrozenSet[int]
    head: int
    value: Value
    inhibitors: Tuple[int, ...]


class Engine:
    """Read-only compiled view of a network for repeated inference.

    The view reflects the network at construction time; build a new engine after
    mutating the network. Several engines may share one unchanging network.
    """

    def __init__(self, net: Network) -> None:
        self.network = net
        self._things = dict(net.neurons())
        self._links: List[_CompiledLink] = []
        for link in net.elinks():
            self._links.append(
                _CompiledLink(
                    link.id,
                    frozenset(
                        t.neuron
                        for t in link.terminals
                        if t.polarity is Polarity.POSITIVE
                    ),
                    frozenset(
                        t.neuron
                        for t in link.terminals
                        if t.polarity is Polarity.NEGATIVE
                    ),
                    link.head.neuron,
                    link.head.polarity.asserted_value,
                    tuple(i.id for i in net.inhibitors_of(link.id)),
                )
            )
        self._inhibitors: List[Tuple[int, FrozenSet[int]]] = [
            (ilink.id, frozenset(t.neuron for t in ilink.terminals))
            for ilink in net.ilinks()
        ]

    def infer(
        self, facts: Mapping[str, bool], *, auto_create: bool = False
    ) -> InferenceResult:
        """Runs inference from ``facts`` to a fixpoint.

        Args:
            facts (Mapping[str, bool]): Perceived things and their truth values.
            auto_create (bool, optional): If ``True`` facts about things the network
                does not represent are kept as isolated neurons of the result instead
                of raising. The network itself is not modified. Defaults to ``False``.

        Raises:
            UnknownThingError: If a fact names a thing not in the network and
                ``auto_create`` is ``False``.
        """
        neuron_ids = {thing: i for i, thing in self._things.items()}
        states: Dict[int, Value] = {i: Value.UNKNOWN for i in self._things}
        isolated: Dict[str, bool] = {}
        for thing, value in facts.items():
            neuron = neuron_ids.get(thing)
            if neuron is not None:
                states[neuron] = Value.from_bool(value)
            elif auto_create:
                validate_thing(thing)
                isolated[thing] = value
            else:
                raise UnknownThingError(f"No neuron represents {thing!r}")

        contradictory: Set[int] = set()
        result = InferenceResult(self.network, {}, dict(facts))
        limit = 2 * len(states) + 1
        triggered_inhibitors: Set[int] = set()

        while True:
            result.rounds += 1
            true_set = {
                i
                for i, v in states.items()
                if v is Value.TRUE and i not in contradictory
            }
            false_set = {
                i
                for i, v in states.items()
                if v is Value.FALSE and i not in contradictory
            }

            triggered_inhibitors = {
                ilink_id
                for ilink_id, terminals in self._inhibitors
                if terminals <= true_set
            }

            assertions: Dict[int, List[Tuple[int, Value]]] = {}
            for link in self._links:
                if not (link.positive <= true_set and link.negative <= false_set):
                    continue
                blockers = [i for i in link.inhibitors if i in triggered_inhibitors]
                if blockers:
                    result.blocked.setdefault(link.id, set()).update(blockers)
                    continue
                result.fired.add(link.id)
                assertions.setdefault(link.head, []).append((link.id, link.value))

            changed = False
            for neuron in sorted(assertions):
                if neuron in contradictory:
                    continue
                asserted = assertions[neuron]
                current = states[neuron]
                values = {value for _, value in asserted}

                if len(values) > 1 or (
                    current is not Value.UNKNOWN and current not in values
                ):
                    if current is Value.UNKNOWN:
                        states[neuron] = asserted[0][1]
                    contradictory.add(neuron)
                    changed = True
                    logger.warning(
                        "Contradiction on %r in round %d",
                        self._things[neuron],
                        result.rounds,
                    )
                elif current is Value.UNKNOWN:
                    states[neuron] = asserted[0][1]
                    changed = True
                else:
                    continue

                for link_id, value in asserted:
                    result.trace.append(
                        TraceEntry(result.rounds, link_id, self._things[neuron], value)
                    )

            logger.debug("Round %d: %d links fired", result.rounds, len(assertions))
            if not changed:
                break
            if result.rounds >= limit:
                raise RuntimeError(f"Inference did not settle in {limit} rounds")

        for link in self._links:
            if link.id in result.fired and any(
                i in triggered_inhibitors for i in link.inhibitors
            ):
                result.unstable.add(link.id)
        if result.unstable:
            logger.warning("Unstable firings: %s", sorted(result.unstable))

        result.states = {
            self._things[i]: NeuronState(value, i in contradictory)
            for i, value in states.items()
        }
        for thing, value in isolated.items():
            result.states[thing] = NeuronState(Value.from_bool(value))
        result.contradictions = {self._things[i] for i in contradictory}
        return result


def infer(
    net: Network, facts: Mapping[str, bool], *, auto_create: bool = False
) -> InferenceResult:
    """Runs inference on ``net`` from ``facts``. See ``Engine.infer``."""
    return Engine(net).infer(facts, auto_create=auto_create)


# Stratification


class StratificationViolation(NamedTuple):
    ilink: int
    target: int
    things: Tuple[str, ...]


@dataclass
class StratificationReport:
    violations: List[StratificationViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(
            f"ilink {v.ilink} on elink {v.target}: {', '.join(v.things)} reachable "
            "from the head of its target"
            for v in self.violations
        )


def stratification_check(net: Network) -> StratificationReport:
    """Reports inhibitory links whose terminal neurons can be derived from the head
    neuron of the link they inhibit (its head neuron itself included).

    Such links may fire or block depending on the round a conclusion arrives in.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(i for i, _ in net.neurons())
    for link in net.elinks():
        graph.add_edges_from((t.neuron, link.head.neuron) for t in link.terminals)

    report = StratificationReport()
    for ilink in net.ilinks():
        head = net.elink(ilink.target).head.neuron
        reachable = nx.descendants(graph, head) | {head}
        offending = sorted(
            net.thing(t.neuron) for t in ilink.terminals if t.neuron in reachable
        )
        if offending:
            report.violations.append(
                StratificationViolation(ilink.id, ilink.target, tuple(offending))
            )
    return report


# Explanations


def describe_link(net: Network, link_id: int) -> str:
    """Returns ``e<id>: a, not b => c`` for an excitatory link."""
    link = net.elink(link_id)

    def spell(neuron: int, polarity: Polarity) -> str:
        thing = net.thing(neuron)
        return f"not {thing}" if polarity is Polarity.NEGATIVE else thing

    body = ", ".join(
        sorted(spell(t.neuron, t.polarity) for t in link.terminals)
    )
    return f"e{link_id}: {body} => {spell(link.head.neuron, link.head.polarity)}"


def _justification(result: InferenceResult, thing: str) -> Optional[TraceEntry]:
    for entry in result.trace:
        if entry.thing == thing:
            return entry
    return None


def _explain_lines(
    result: InferenceResult, thing: str, depth: int, lines: List[str]
) -> None:
    indent = "  " * depth
    state = result.states[thing]

    if thing in result.facts:
        suffix = " (contradictory)" if state.contradictory else ""
        lines.append(f"{indent}{thing} = {state.value.value} (given){suffix}")
        return

    if state.value is Value.UNKNOWN:
        net = result.network
        blocked = []
        if thing in net:
            neuron = net.neuron_id(thing)
            blocked = [
                (link_id, ilinks)
                for link_id, ilinks in sorted(result.blocked.items())
                if net.elink(link_id).head.neuron == neuron
            ]
        if not blocked:
            lines.append(f"{indent}{thing} = unknown; no triggered links")
            return
        lines.append(f"{indent}{thing} = unknown; triggered links were blocked")
        for link_id, ilinks in blocked:
            inhibitors = ", ".join(f"i{i}" for i in sorted(ilinks))
            lines.append(
                f"{indent}  {describe_link(net, link_id)} blocked by {inhibitors}"
            )
        return

    entry = _justification(result, thing)
    assert entry is not None
    suffix = " (contradictory)" if state.contradictory else ""
    lines.append(
        f"{indent}{thing} = {state.value.value}{suffix} by "
        f"{describe_link(result.network, entry.link)} (round {entry.round})"
    )
    link = result.network.elink(entry.link)
    terminals = sorted(result.network.thing(t.neuron) for t in link.terminals)
    for terminal_thing in terminals:
        _explain_lines(result, terminal_thing, depth + 1, lines)


def explain(result: InferenceResult, thing: str) -> str:
    """Returns the derivation tree of ``thing`` as indented text.

    A derived thing shows the link that first set it and, one level deeper, the
    justification of each of the link's terminals down to the given facts. An Unknown
    thing lists the links concluding it that were triggered but blocked.

    Raises:
        UnknownThingError: If ``thing`` has no state in ``result``.
    """
    if thing not in result.states:
        raise UnknownThingError(f"No neuron represents {thing!r}")
    lines: List[str] = []
    _explain_lines(result, thing, 0, lines)
    return "\n".join(lines) + "\n"


# Text formats


def parse_facts(text: str) -> Dict[str, bool]:
    """Parses a facts file: one ``thing=true`` or ``thing=false`` per line.

    A line holding only a thing name means ``true``. A line whose text after the last
    ``=`` is no value word is a thing name itself, so ``gender=woman`` is the fact
    ``gender=woman=true``. ``#`` starts a comment.

    Raises:
        FactsFormatError: For ``unknown`` or misspelled values such as ``ture``,
            invalid things or a thing given twice.
    """
    facts: Dict[str, bool] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        thing, separator, given = line.rpartition("=")
        thing, value = thing.strip(), given.strip().lower()
        if not separator:
            thing, value = line, "true"
        elif value not in _FACT_VALUES:
            if value == Value.UNKNOWN.value or difflib.get_close_matches(
                value, _FACT_VALUES, n=1, cutoff=0.7
            ):
                raise FactsFormatError(
                    f"line {number}: {thing!r} needs 'true' or 'false', "
                    f"not {given.strip()!r}"
                )
            logger.debug("Facts line %d: %r taken as a thing name", number, line)
            thing, value = line, "true"
        try:
            validate_thing(thing)
        except ValueError as e:
            raise FactsFormatError(f"line {number}: {e}") from e
        if thing in facts:
            raise FactsFormatError(f"line {number}: {thing!r} given twice")
        facts[thing] = value == "true"
    return facts


def format_states(result: InferenceResult) -> str:
    return "".join(
        f"{thing}={state}\n" for thing, state in sorted(result.states.items())
    )


def format_trace(result: InferenceResult) -> str:
    """Returns the trace as tab-separated ``round, link, thing, value`` lines."""
    return "".join(
        f"{e.round}\t{e.link}\t{e.thing}\t{e.value.value}\n" for e in result.trace
    )
