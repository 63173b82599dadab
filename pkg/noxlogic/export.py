"""Serialization of networks to the JSON network file and export to Graphviz DOT.

Both outputs are deterministic: every array is ordered by id and terminals by neuron id,
so serializing the same network twice gives byte-identical text.
"""

import json
import logging
from pathlib import Path

from typing import Any, Dict, FrozenSet, Iterable, List, Set, Union

from noxlogic.network import (
    DanglingReferenceError,
    ExcitatoryLink,
    InhibitoryLink,
    InvalidThingError,
    LinkShapeError,
    Network,
    Polarity,
    Terminal,
    sorted_terminals,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

PathLike = Union[str, Path]


class NetworkFormatError(ValueError):
    """Raised when a network document violates the schema or referential integrity."""


def _terminal_document(terminal: Terminal) -> Dict[str, Any]:
    return {"neuron": terminal.neuron, "polarity": terminal.polarity.value}


def to_document(net: Network) -> Dict[str, Any]:
    """Returns the JSON-compatible document describing ``net``."""
    return {
        "version": FORMAT_VERSION,
        "neurons": [{"id": i, "thing": thing} for i, thing in net.neurons()],
        "elinks": [
            {
                "id": link.id,
                "terminals": [
                    _terminal_document(t) for t in sorted_terminals(link.terminals)
                ],
                "head": _terminal_document(link.head),
            }
            for link in net.elinks()
        ],
        "ilinks": [
            {
                "id": link.id,
                "terminals": [
                    _terminal_document(t) for t in sorted_terminals(link.terminals)
                ],
                "target": link.target,
            }
            for link in net.ilinks()
        ],
    }


def serialize(net: Network) -> str:
    return json.dumps(to_document(net), indent=2, ensure_ascii=False) + "\n"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise NetworkFormatError(message)


def _is_id(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def _parse_terminal(raw: Any, where: str) -> Terminal:
    _require(isinstance(raw, dict), f"{where}: terminal must be an object")
    _require(_is_id(raw.get("neuron")), f"{where}: terminal neuron must be an id")
    try:
        polarity = Polarity(raw.get("polarity"))
    except ValueError:
        raise NetworkFormatError(f"{where}: polarity must be 'pos' or 'neg'")
    return Terminal(raw["neuron"], polarity)


def _parse_terminals(raw: Any, where: str) -> FrozenSet[Terminal]:
    _require(isinstance(raw, list), f"{where}: terminals must be a list")
    terminals = [_parse_terminal(t, where) for t in raw]
    seen: Set[int] = set()
    for t in terminals:
        _require(t.neuron not in seen, f"{where}: neuron {t.neuron} listed twice")
        seen.add(t.neuron)
    return frozenset(terminals)


def _section(document: Dict[str, Any], name: str) -> List[Any]:
    section = document.get(name)
    _require(isinstance(section, list), f"Section {name!r} must be a list")
    return section


def from_document(document: Any) -> Network:
    """Builds a network from a parsed network document.

    Raises:
        NetworkFormatError: If the document is malformed or references an id that does
            not resolve. The message names the offending id.
    """
    _require(isinstance(document, dict), "Network document must be an object")
    _require(
        document.get("version") == FORMAT_VERSION,
        f"Unsupported network format version {document.get('version')!r}",
    )

    neurons = []
    for raw in _section(document, "neurons"):
        _require(isinstance(raw, dict), "neuron entries must be objects")
        _require(_is_id(raw.get("id")), f"neuron id {raw.get('id')!r} is not an id")
        _require(
            isinstance(raw.get("thing"), str), f"neuron {raw['id']}: missing thing"
        )
        neurons.append((raw["id"], raw["thing"]))

    elinks = []
    for raw in _section(document, "elinks"):
        _require(isinstance(raw, dict), "elink entries must be objects")
        _require(_is_id(raw.get("id")), f"elink id {raw.get('id')!r} is not an id")
        where = f"elink {raw['id']}"
        elinks.append(
            ExcitatoryLink(
                raw["id"],
                _parse_terminals(raw.get("terminals"), where),
                _parse_terminal(raw.get("head"), where),
            )
        )

    ilinks = []
    for raw in _section(document, "ilinks"):
        _require(isinstance(raw, dict), "ilink entries must be objects")
        _require(_is_id(raw.get("id")), f"ilink id {raw.get('id')!r} is not an id")
        where = f"ilink {raw['id']}"
        _require(_is_id(raw.get("target")), f"{where}: target must be an id")
        ilinks.append(
            InhibitoryLink(
                raw["id"],
                _parse_terminals(raw.get("terminals"), where),
                raw["target"],
            )
        )

    try:
        return Network.from_parts(neurons, elinks, ilinks)
    except (DanglingReferenceError, LinkShapeError, InvalidThingError) as e:
        message = e.args[0] if e.args else str(e)
        raise NetworkFormatError(message) from e


def deserialize(text: str) -> Network:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetworkFormatError(f"Network file is not valid JSON: {e}") from e
    return from_document(document)


def dump(net: Network, path: PathLike) -> None:
    Path(path).write_text(serialize(net), encoding="utf-8")
    logger.info("Wrote network %r to %s", net, path)


def load(path: PathLike) -> Network:
    return deserialize(Path(path).read_text(encoding="utf-8"))


def _edge_attributes(polarity: Polarity, extra: Iterable[str] = ()) -> str:
    attributes = list(extra)
    if polarity is Polarity.NEGATIVE:
        attributes.append('label="not"')
    return f" [{', '.join(attributes)}]" if attributes else ""


def to_dot(net: Network, name: str = "network") -> str:
    """Returns a Graphviz digraph of ``net``.

    Neurons are ellipses named ``n<id>``. Every excitatory link is a junction point
    ``e<id>`` with edges from its terminals and one edge to its head. An inhibitory link
    with one terminal is a dashed, tee-headed edge into the junction of its target; a
    composite one gets its own dashed junction ``i<id>`` first. Negative terminals and
    heads are labelled ``not``.
    """
    lines = [f'digraph "{name}" {{', "\trankdir=LR;"]
    for neuron_id, thing in net.neurons():
        lines.append(f'\tn{neuron_id} [label="{thing}", shape=ellipse];')

    for link in net.elinks():
        lines.append(f'\te{link.id} [label="", shape=point, width=0.08];')
        for t in sorted_terminals(link.terminals):
            lines.append(
                f"\tn{t.neuron} -> e{link.id}"
                + _edge_attributes(t.polarity, ["arrowhead=none"])
                + ";"
            )
        lines.append(
            f"\te{link.id} -> n{link.head.neuron}"
            + _edge_attributes(link.head.polarity)
            + ";"
        )

    inhibitory_style = "style=dashed, arrowhead=tee, color=red"
    junction_style = "style=dashed, arrowhead=none, color=red"
    for ilink in net.ilinks():
        terminals = sorted_terminals(ilink.terminals)
        if len(terminals) == 1:
            source = terminals[0].neuron
            lines.append(f"\tn{source} -> e{ilink.target} [{inhibitory_style}];")
            continue

        lines.append(
            f'\ti{ilink.id} [label="", shape=point, width=0.08, color=red];'
        )
        for t in terminals:
            lines.append(f"\tn{t.neuron} -> i{ilink.id} [{junction_style}];")
        lines.append(f"\ti{ilink.id} -> e{ilink.target} [{inhibitory_style}];")

    lines.append("}")
    return "\n".join(lines) + "\n"
