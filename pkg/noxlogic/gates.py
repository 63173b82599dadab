"""Two-input logic gates built from neurons and links only.

Every gate is a network over the inputs ``A`` and ``B`` and the output ``C`` with no
further neurons. A gate signals a true output by concluding ``C`` and a false output by
leaving it Unknown.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum

from typing import Callable, Dict, List, NamedTuple, Optional

from noxlogic.builder import add_rule
from noxlogic.inference import Engine
from noxlogic.network import Network, Terminal, Value
from noxlogic.rules import EncodingPolicy, parse_rules

logger = logging.getLogger(__name__)

INPUTS = ("A", "B")
OUTPUT = "C"

# A classic layered network needs this many neurons and layers for XOR.
LNN1_XOR_NEURONS = 7
LNN1_XOR_LAYERS = 3


class Gate(Enum):
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    NAND = "NAND"
    NOR = "NOR"
    XNOR = "XNOR"


_TRUTH: Dict[Gate, Callable[[bool, bool], bool]] = {
    Gate.AND: lambda a, b: a and b,
    Gate.OR: lambda a, b: a or b,
    Gate.XOR: lambda a, b: a != b,
    Gate.NAND: lambda a, b: not (a and b),
    Gate.NOR: lambda a, b: not (a or b),
    Gate.XNOR: lambda a, b: a == b,
}

_CONSTRUCTIONS: Dict[Gate, str] = {
    Gate.AND: "if A, B then C",
    Gate.OR: "if A then C\nif B then C",
    Gate.XOR: "if A, not B then C\nif B, not A then C",
    Gate.NAND: "if not A then C\nif not B then C",
    Gate.NOR: "if not A, not B then C",
    Gate.XNOR: "if A, B then C\nif not A, not B then C",
}


def gate_value(kind: Gate, a: bool, b: bool) -> bool:
    """Boolean value of gate ``kind`` on inputs ``a`` and ``b``."""
    return _TRUTH[kind](a, b)


def gate_network(kind: Gate) -> Network:
    """Returns the network of gate ``kind``.

    XOR pairs each input's excitatory link with a simple inhibitory link from the other
    input. NAND uses one negative link per input, NOR one composite negative link and
    XNOR the AND and NOR links together.
    """
    net = Network()
    for thing in INPUTS + (OUTPUT,):
        net.add_neuron(thing)
    for rule in parse_rules(_CONSTRUCTIONS[kind]):
        add_rule(net, rule, EncodingPolicy.AS_INHIBITOR)
    return net


def corrupted_xor() -> Network:
    """XOR without the inhibitory link from ``B`` onto the link ``A -> C``."""
    net = gate_network(Gate.XOR)
    a, b = net.neuron_id("A"), net.neuron_id("B")
    for ilink in net.ilinks():
        target = net.elink(ilink.target)
        if ilink.terminals == {Terminal(b)} and target.terminals == {Terminal(a)}:
            net.remove_inhibitory_link(ilink.id)
    return net


class TruthTableRow(NamedTuple):
    a: bool
    b: bool
    output: Value
    expected: Value

    @property
    def ok(self) -> bool:
        return self.output is self.expected


@dataclass
class TruthTableReport:
    kind: Gate
    rows: List[TruthTableRow] = field(default_factory=list)
    neuron_count: int = 0

    @property
    def failing_row(self) -> Optional[TruthTableRow]:
        return next((row for row in self.rows if not row.ok), None)

    @property
    def passed(self) -> bool:
        return self.failing_row is None


def truth_table_check(kind: Gate, net: Optional[Network] = None) -> TruthTableReport:
    """Runs all four full assignments of ``A`` and ``B`` through a gate network.

    ``C`` must be True on the rows where the gate is true and Unknown elsewhere.

    Args:
        kind (Gate): Gate whose Boolean function is the expectation.
        net (Network, optional): Network to check. Defaults to ``gate_network(kind)``.
    """
    net = net if net is not None else gate_network(kind)
    engine = Engine(net)
    report = TruthTableReport(kind, neuron_count=net.stats().neuron_count)
    for a, b in itertools.product((True, False), repeat=2):
        result = engine.infer({"A": a, "B": b})
        expected = Value.TRUE if gate_value(kind, a, b) else Value.UNKNOWN
        report.rows.append(TruthTableRow(a, b, result.value(OUTPUT), expected))

    if not report.passed:
        logger.warning("Gate %s fails on row %s", kind.value, report.failing_row)
    return report


def _cell(value: bool) -> str:
    return "true" if value else "false"


def format_truth_table(report: TruthTableReport) -> str:
    lines = [
        f"{report.kind.value}: {report.neuron_count} neurons, no hidden layers "
        f"(LNN1 XOR: {LNN1_XOR_NEURONS} neurons, {LNN1_XOR_LAYERS} layers)",
        "A\tB\tC\texpected",
    ]
    for row in report.rows:
        lines.append(
            f"{_cell(row.a)}\t{_cell(row.b)}\t{row.output.value}\t{row.expected.value}"
        )
    lines.append(f"{report.kind.value}: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def crosstalk_network(inhibited: bool = False) -> Network:
    """Per-literal encoding of ``{A, B -> D; A, C -> E}`` with simple links only.

    Without correction, ``A`` and ``B`` together also conclude ``E``. With
    ``inhibited`` an inhibitory link from ``B`` onto the link ``A -> E`` stops that.
    """
    net = Network()
    ids = {thing: net.add_neuron(thing) for thing in "ABCDE"}
    net.add_excitatory_link([Terminal(ids["A"])], Terminal(ids["D"]))
    net.add_excitatory_link([Terminal(ids["B"])], Terminal(ids["D"]))
    a_to_e = net.add_excitatory_link([Terminal(ids["A"])], Terminal(ids["E"]))
    net.add_excitatory_link([Terminal(ids["C"])], Terminal(ids["E"]))
    if inhibited:
        net.add_inhibitory_link([Terminal(ids["B"])], a_to_e)
    return net


def format_crosstalk() -> str:
    lines = []
    for inhibited in (False, True):
        result = Engine(crosstalk_network(inhibited)).infer({"A": True, "B": True})
        concluded = [t for t in ("D", "E") if result.is_true(t)]
        label = "with B -| (A -> E)" if inhibited else "simple links only"
        lines.append(f"{label}: facts A, B conclude {', '.join(concluded)}")
    return "\n".join(lines) + "\n"
