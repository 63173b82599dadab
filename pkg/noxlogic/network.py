"""This module contains the network structure of a logical neural network: neurons
representing things, excitatory links concluding things and inhibitory links blocking
excitatory links.

A neuron represents exactly one *thing* (a named proposition). Links carry all of the
logical relations, so the network never contains hidden neurons. Both kinds of links are
composite in general: an excitatory link is a conjunction of polarity-tagged terminals
pointing at a polarity-tagged head, and an inhibitory link is a conjunction of positive
terminals pointing at an excitatory link it blocks.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum

from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Set,
    Tuple,
)

logger = logging.getLogger(__name__)

THING_PATTERN = re.compile(r"[A-Za-z0-9_=\-]+")

KEYWORDS = frozenset({"if", "then", "not", "and", "unless"})


class InvalidThingError(ValueError):
    """Raised for thing names that are empty, rule keywords or hold bad characters."""


class DanglingReferenceError(KeyError):
    """Raised when a neuron or link id does not resolve in the network."""


class LinkShapeError(ValueError):
    """Raised for links with an empty body, repeated neurons or a self-loop."""


class Value(Enum):
    """Tri-state truth value held by a neuron."""

    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def from_bool(cls, value: bool) -> "Value":
        return cls.TRUE if value else cls.FALSE


class Polarity(Enum):
    """Sign of a link terminal. Positive is satisfied by True, Negative by False."""

    POSITIVE = "pos"
    NEGATIVE = "neg"

    def is_satisfied_by(self, value: Value) -> bool:
        if self is Polarity.POSITIVE:
            return value is Value.TRUE
        return value is Value.FALSE

    @property
    def asserted_value(self) -> Value:
        """Value written to a head neuron by a firing link with this polarity."""
        return Value.TRUE if self is Polarity.POSITIVE else Value.FALSE


@dataclass(frozen=True)
class Terminal:
    """A ``(neuron, polarity)`` endpoint of a link."""

    neuron: int
    polarity: Polarity = Polarity.POSITIVE

    def sort_key(self) -> Tuple[int, str]:
        return (self.neuron, self.polarity.value)


def sorted_terminals(terminals: Iterable[Terminal]) -> Tuple[Terminal, ...]:
    """Returns ``terminals`` ordered by neuron id (the serialization order)."""
    return tuple(sorted(terminals, key=Terminal.sort_key))


@dataclass(frozen=True)
class ExcitatoryLink:
    """Composite excitatory link. Fires its head when every terminal is satisfied.

    With a single terminal this is the simple positive (PEL) or negative (NEL) link.
    """

    id: int
    terminals: FrozenSet[Terminal]
    head: Terminal


@dataclass(frozen=True)
class InhibitoryLink:
    """Composite inhibitory link. Blocks ``target`` while every terminal thing is True.

    Terminals of a network's inhibitory links are always positive.
    """

    id: int
    terminals: FrozenSet[Terminal]
    target: int


class NetworkStats(NamedTuple):
    neuron_count: int
    elink_count: int
    ilink_count: int


class NetworkSignature(NamedTuple):
    """Id-free description of a network.

    Two networks with equal signatures are identical up to id renumbering.
    """

    things: FrozenSet[str]
    links: FrozenSet[
        Tuple[
            FrozenSet[Tuple[str, Polarity]],
            Tuple[str, Polarity],
            FrozenSet[FrozenSet[Tuple[str, Polarity]]],
        ]
    ]


def validate_thing(name: str) -> str:
    """Returns ``name`` if it is a valid thing name.

    Raises:
        InvalidThingError: If ``name`` is empty, has characters other than letters,
            digits, ``_``, ``-`` and ``=`` or is a rule keyword in any letter case.
    """
    if not isinstance(name, str) or not name:
        raise InvalidThingError("Thing name must be a non-empty string")
    if THING_PATTERN.fullmatch(name) is None:
        raise InvalidThingError(f"Invalid thing name {name!r}")
    if name.lower() in KEYWORDS:
        raise InvalidThingError(f"Thing name {name!r} is a rule keyword")
    return name


class Network:
    """Logical neural network with value-deduplicated links.

    Neurons, excitatory links and inhibitory links each get ids from their own counter
    starting at 0. Ids of removed links are not reused. Neurons are never removed.
    """

    def __init__(self) -> None:
        self._things: Dict[int, str] = {}
        self._neuron_ids: Dict[str, int] = {}
        self._elinks: Dict[int, ExcitatoryLink] = {}
        self._ilinks: Dict[int, InhibitoryLink] = {}
        self._elink_index: Dict[Tuple[FrozenSet[Terminal], Terminal], int] = {}
        self._ilink_index: Dict[Tuple[FrozenSet[Terminal], int], int] = {}
        self._inhibitors: Dict[int, Set[int]] = {}

        self._next_neuron = 0
        self._next_elink = 0
        self._next_ilink = 0

    # Mutation

    def add_neuron(self, thing: str) -> int:
        """Returns the id of the neuron representing ``thing``, creating it if needed.

        Raises:
            InvalidThingError: If ``thing`` is not a valid thing name.
        """
        validate_thing(thing)
        existing = self._neuron_ids.get(thing)
        if existing is not None:
            return existing

        neuron_id = self._next_neuron
        self._next_neuron += 1
        self._things[neuron_id] = thing
        self._neuron_ids[thing] = neuron_id
        return neuron_id

    def add_excitatory_link(self, terminals: Iterable[Terminal], head: Terminal) -> int:
        """Returns the id of the excitatory link ``terminals -> head``.

        An identical link already in the network is returned instead of a new one.

        Raises:
            DanglingReferenceError: If a referenced neuron does not exist.
            LinkShapeError: If ``terminals`` is empty, repeats a neuron or contains the
                head neuron.
        """
        body = self._checked_terminals(terminals)
        self._require_neuron(head.neuron)
        if head.neuron in {t.neuron for t in body}:
            raise LinkShapeError(
                f"Head neuron {head.neuron} appears among the link terminals"
            )

        key = (body, head)
        existing = self._elink_index.get(key)
        if existing is not None:
            return existing

        link = ExcitatoryLink(self._next_elink, body, head)
        self._next_elink += 1
        self._place_elink(link)
        return link.id

    def add_inhibitory_link(self, terminals: Iterable[Terminal], target: int) -> int:
        """Returns the id of the inhibitory link from ``terminals`` onto ``target``.

        Raises:
            DanglingReferenceError: If ``target`` or a referenced neuron does not exist.
            LinkShapeError: If ``terminals`` is empty, repeats a neuron or has a
                negative terminal.
        """
        if target not in self._elinks:
            raise DanglingReferenceError(f"No excitatory link with id {target}")
        body = self._checked_inhibitor_terminals(terminals)

        key = (body, target)
        existing = self._ilink_index.get(key)
        if existing is not None:
            return existing

        link = InhibitoryLink(self._next_ilink, body, target)
        self._next_ilink += 1
        self._place_ilink(link)
        return link.id

    def remove_excitatory_link(self, link_id: int) -> List[int]:
        """Removes an excitatory link together with every inhibitory link targeting it.

        Returns:
            List[int]: Ids of the removed inhibitory links in ascending order.

        Raises:
            DanglingReferenceError: If there is no excitatory link with ``link_id``.
        """
        link = self._elinks.pop(link_id, None)
        if link is None:
            raise DanglingReferenceError(f"No excitatory link with id {link_id}")
        del self._elink_index[(link.terminals, link.head)]

        cascade = sorted(self._inhibitors.pop(link_id))
        for ilink_id in cascade:
            ilink = self._ilinks.pop(ilink_id)
            del self._ilink_index[(ilink.terminals, ilink.target)]

        logger.debug(
            "Removed excitatory link %d with %d inhibitory links", link_id, len(cascade)
        )
        return cascade

    def remove_inhibitory_link(self, link_id: int) -> None:
        """Removes a single inhibitory link.

        Raises:
            DanglingReferenceError: If there is no inhibitory link with ``link_id``.
        """
        link = self._ilinks.pop(link_id, None)
        if link is None:
            raise DanglingReferenceError(f"No inhibitory link with id {link_id}")
        del self._ilink_index[(link.terminals, link.target)]
        self._inhibitors[link.target].discard(link_id)

    @classmethod
    def from_parts(
        cls,
        neurons: Iterable[Tuple[int, str]],
        elinks: Iterable[ExcitatoryLink],
        ilinks: Iterable[InhibitoryLink],
    ) -> "Network":
        """Builds a network keeping the given ids.

        Raises:
            InvalidThingError, DanglingReferenceError, LinkShapeError: If the parts do
                not form a consistent network. Duplicated ids and duplicated link
                contents are reported as ``LinkShapeError``.
        """
        net = cls()
        for neuron_id, thing in neurons:
            validate_thing(thing)
            if neuron_id in net._things or thing in net._neuron_ids:
                raise LinkShapeError(f"Duplicate neuron {neuron_id} ({thing!r})")
            net._things[neuron_id] = thing
            net._neuron_ids[thing] = neuron_id
            net._next_neuron = max(net._next_neuron, neuron_id + 1)

        for elink in elinks:
            if elink.id in net._elinks:
                raise LinkShapeError(f"Duplicate excitatory link id {elink.id}")
            net._checked_terminals(elink.terminals)
            net._require_neuron(elink.head.neuron)
            if elink.head.neuron in {t.neuron for t in elink.terminals}:
                raise LinkShapeError(f"Excitatory link {elink.id} is a self-loop")
            if (elink.terminals, elink.head) in net._elink_index:
                raise LinkShapeError(f"Excitatory link {elink.id} is a duplicate")
            net._place_elink(elink)
            net._next_elink = max(net._next_elink, elink.id + 1)

        for ilink in ilinks:
            if ilink.id in net._ilinks:
                raise LinkShapeError(f"Duplicate inhibitory link id {ilink.id}")
            if ilink.target not in net._elinks:
                raise DanglingReferenceError(
                    f"Inhibitory link {ilink.id} targets missing excitatory link "
                    f"{ilink.target}"
                )
            net._checked_terminals(ilink.terminals)
            if any(t.polarity is Polarity.NEGATIVE for t in ilink.terminals):
                raise LinkShapeError(
                    f"Inhibitory link {ilink.id} has a negative terminal"
                )
            if (ilink.terminals, ilink.target) in net._ilink_index:
                raise LinkShapeError(f"Inhibitory link {ilink.id} is a duplicate")
            net._place_ilink(ilink)
            net._next_ilink = max(net._next_ilink, ilink.id + 1)

        return net

    def _place_elink(self, link: ExcitatoryLink) -> None:
        self._elinks[link.id] = link
        self._elink_index[(link.terminals, link.head)] = link.id
        self._inhibitors[link.id] = set()

    def _place_ilink(self, link: InhibitoryLink) -> None:
        self._ilinks[link.id] = link
        self._ilink_index[(link.terminals, link.target)] = link.id
        self._inhibitors[link.target].add(link.id)

    def _require_neuron(self, neuron_id: int) -> None:
        if neuron_id not in self._things:
            raise DanglingReferenceError(f"No neuron with id {neuron_id}")

    def _checked_terminals(self, terminals: Iterable[Terminal]) -> FrozenSet[Terminal]:
        body = frozenset(terminals)
        if not body:
            raise LinkShapeError("A link needs at least one terminal")
        for terminal in body:
            self._require_neuron(terminal.neuron)
        if len({t.neuron for t in body}) != len(body):
            raise LinkShapeError("Two terminals of one link share a neuron")
        return body

    def _checked_inhibitor_terminals(
        self, terminals: Iterable[Terminal]
    ) -> FrozenSet[Terminal]:
        body = self._checked_terminals(terminals)
        negative = sorted(t.neuron for t in body if t.polarity is Polarity.NEGATIVE)
        if negative:
            raise LinkShapeError(
                f"Inhibitory link terminals must be positive, neuron {negative[0]} "
                "is negative"
            )
        return body

    # Queries

    def stats(self) -> NetworkStats:
        return NetworkStats(len(self._things), len(self._elinks), len(self._ilinks))

    def __contains__(self, thing: object) -> bool:
        return thing in self._neuron_ids

    def neuron_id(self, thing: str) -> int:
        """Returns the id of the neuron representing ``thing``.

        Raises:
            DanglingReferenceError: If no neuron represents ``thing``.
        """
        try:
            return self._neuron_ids[thing]
        except KeyError:
            raise DanglingReferenceError(f"No neuron represents {thing!r}")

    def thing(self, neuron_id: int) -> str:
        self._require_neuron(neuron_id)
        return self._things[neuron_id]

    def neurons(self) -> Iterator[Tuple[int, str]]:
        """Yields ``(id, thing)`` pairs in ascending id order."""
        for neuron_id in sorted(self._things):
            yield neuron_id, self._things[neuron_id]

    def elinks(self) -> List[ExcitatoryLink]:
        return [self._elinks[i] for i in sorted(self._elinks)]

    def ilinks(self) -> List[InhibitoryLink]:
        return [self._ilinks[i] for i in sorted(self._ilinks)]

    def elink(self, link_id: int) -> ExcitatoryLink:
        try:
            return self._elinks[link_id]
        except KeyError:
            raise DanglingReferenceError(f"No excitatory link with id {link_id}")

    def ilink(self, link_id: int) -> InhibitoryLink:
        try:
            return self._ilinks[link_id]
        except KeyError:
            raise DanglingReferenceError(f"No inhibitory link with id {link_id}")

    def inhibitors_of(self, elink_id: int) -> List[InhibitoryLink]:
        """Returns the inhibitory links targeting ``elink_id`` in ascending id order."""
        if elink_id not in self._elinks:
            raise DanglingReferenceError(f"No excitatory link with id {elink_id}")
        return [self._ilinks[i] for i in sorted(self._inhibitors[elink_id])]

    def find_excitatory_link(
        self, terminals: Iterable[Terminal], head: Terminal
    ) -> Optional[int]:
        return self._elink_index.get((frozenset(terminals), head))

    # Structure

    def _named(self, terminals: Iterable[Terminal]) -> FrozenSet[Tuple[str, Polarity]]:
        return frozenset((self._things[t.neuron], t.polarity) for t in terminals)

    def signature(self) -> NetworkSignature:
        links = frozenset(
            (
                self._named(link.terminals),
                (self._things[link.head.neuron], link.head.polarity),
                frozenset(
                    self._named(self._ilinks[i].terminals)
                    for i in self._inhibitors[link.id]
                ),
            )
            for link in self._elinks.values()
        )
        return NetworkSignature(frozenset(self._neuron_ids), links)

    def audit(self) -> List[str]:
        """Returns a description of every referential-integrity violation found."""
        problems: List[str] = []
        for thing, neuron_id in self._neuron_ids.items():
            if self._things.get(neuron_id) != thing:
                problems.append(f"neuron index out of sync for {thing!r}")

        for link in self._elinks.values():
            for terminal in link.terminals | {link.head}:
                if terminal.neuron not in self._things:
                    problems.append(
                        f"elink {link.id} references missing neuron {terminal.neuron}"
                    )
            if self._elink_index.get((link.terminals, link.head)) != link.id:
                problems.append(f"elink {link.id} missing from the dedup index")

        for ilink in self._ilinks.values():
            if ilink.target not in self._elinks:
                problems.append(
                    f"ilink {ilink.id} targets missing elink {ilink.target}"
                )
            elif ilink.id not in self._inhibitors[ilink.target]:
                problems.append(f"ilink {ilink.id} not registered on its target")
            for terminal in ilink.terminals:
                if terminal.neuron not in self._things:
                    problems.append(
                        f"ilink {ilink.id} references missing neuron {terminal.neuron}"
                    )

        for target, registered in self._inhibitors.items():
            if target not in self._elinks:
                problems.append(f"inhibitor registry keeps removed elink {target}")
            for ilink_id in registered:
                if ilink_id not in self._ilinks:
                    problems.append(f"inhibitor registry keeps stale ilink {ilink_id}")

        if len(self._elink_index) != len(self._elinks):
            problems.append("elink dedup index size differs from elink count")
        if len(self._ilink_index) != len(self._ilinks):
            problems.append("ilink dedup index size differs from ilink count")
        return problems

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self._things == other._things
            and self._elinks == other._elinks
            and self._ilinks == other._ilinks
        )

    def __repr__(self) -> str:
        neurons, elinks, ilinks = self.stats()
        return (
            f"{self.__class__.__name__}(neurons={neurons}, elinks={elinks}, "
            f"ilinks={ilinks})"
        )


def same_structure(first: Network, second: Network) -> bool:
    """Returns ``True`` if the networks are identical up to id renumbering."""
    return first.signature() == second.signature()
