"""Adaline-style neurules, the numeric baseline the graph model is compared with.

A neurule has a bias and one significance factor per condition. Conditions take ``1``
(True), ``-1`` (False) or ``0`` (Unknown); the neurule concludes when the weighted sum
is strictly positive.

Definition file format, one neurule per line (``#`` starts a comment)::

    R7 bias -9.7 : antinflam-none@antinflam 12.4, night-pain@pain 12.3 then malignant

``@attribute`` is optional and groups conditions that are values of one attribute: when
a symbolic rule sets one value of an attribute, the other values of it count as False.
"""

import logging
import re
from dataclasses import dataclass, replace

from typing import (
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np

from noxlogic.builder import build, remove_rule
from noxlogic.inference import Engine
from noxlogic.network import validate_thing
from noxlogic.rules import DEFAULT_POLICY, EncodingPolicy, Rule

logger = logging.getLogger(__name__)

_INPUT_VALUES = (-1, 0, 1)


class ArityError(ValueError):
    """Raised when an input does not provide exactly one value per condition."""


class NeuruleFormatError(ValueError):
    """Raised for malformed neurule definitions."""


class Condition(NamedTuple):
    label: str
    factor: float
    attribute: Optional[str] = None


@dataclass(frozen=True)
class Neurule:
    label: str
    bias: float
    conditions: Tuple[Condition, ...]
    conclusion: str

    def __post_init__(self) -> None:
        labels = [c.label for c in self.conditions]
        if len(set(labels)) != len(labels):
            raise NeuruleFormatError(f"Neurule {self.label} repeats a condition")

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(c.label for c in self.conditions)

    @property
    def factors(self) -> np.ndarray:
        return np.array([c.factor for c in self.conditions], dtype=float)

    def with_bias(self, bias: float) -> "Neurule":
        return replace(self, bias=bias)

    def with_factor(self, label: str, factor: float) -> "Neurule":
        if label not in self.labels:
            raise KeyError(f"Neurule {self.label} has no condition {label!r}")
        return replace(
            self,
            conditions=tuple(
                c._replace(factor=factor) if c.label == label else c
                for c in self.conditions
            ),
        )


class NeuruleOutput(NamedTuple):
    sum: float
    output: bool


def evaluate(neurule: Neurule, inputs: Sequence[int]) -> NeuruleOutput:
    """Returns the weighted sum ``bias + sum(sf_i * x_i)`` and whether it is positive.

    Raises:
        ArityError: If ``inputs`` does not have one value per condition or holds a
            value other than ``1``, ``-1`` and ``0``.
    """
    if len(inputs) != len(neurule.conditions):
        raise ArityError(
            f"Neurule {neurule.label} takes {len(neurule.conditions)} inputs, "
            f"got {len(inputs)}"
        )
    if any(x not in _INPUT_VALUES for x in inputs):
        raise ArityError(f"Inputs must be 1, -1 or 0, got {list(inputs)}")

    x = np.array(inputs, dtype=float)
    total = neurule.bias + float(np.dot(neurule.factors, x))
    return NeuruleOutput(total, total > 0)


def input_for(neurule: Neurule, true_conditions: Iterable[str]) -> Tuple[int, ...]:
    """Returns the input vector of a symbolic rule whose body holds ``true_conditions``.

    A listed condition is ``1``. A condition sharing its attribute with a listed one is
    ``-1``. Every other condition is ``0``.
    """
    true_set = set(true_conditions)
    unknown = true_set - set(neurule.labels)
    if unknown:
        raise ArityError(f"Neurule {neurule.label} has no conditions {sorted(unknown)}")
    set_attributes = {
        c.attribute
        for c in neurule.conditions
        if c.label in true_set and c.attribute is not None
    }
    return tuple(
        1
        if c.label in true_set
        else -1
        if c.attribute is not None and c.attribute in set_attributes
        else 0
        for c in neurule.conditions
    )


# Definition files

_NEURULE_PATTERN = re.compile(
    r"^\s*(?P<label>\S+)\s+bias\s+(?P<bias>\S+)\s*:\s*(?P<conditions>.+?)"
    r"\s+then\s+(?P<conclusion>\S+)\s*$"
)
_CONDITION_PATTERN = re.compile(
    r"^\s*(?P<label>[^\s@]+)(?:@(?P<attribute>\S+))?\s+(?P<factor>\S+)\s*$"
)


def _number(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise NeuruleFormatError(f"line {line}: {text!r} is not a number")


def parse_neurule(text: str, line: int = 1) -> Neurule:
    match = _NEURULE_PATTERN.match(text)
    if match is None:
        raise NeuruleFormatError(f"line {line}: expected '<label> bias <b> : ... then'")

    conditions = []
    for raw in match.group("conditions").split(","):
        condition = _CONDITION_PATTERN.match(raw)
        if condition is None:
            raise NeuruleFormatError(f"line {line}: bad condition {raw.strip()!r}")
        try:
            validate_thing(condition.group("label"))
        except ValueError as e:
            raise NeuruleFormatError(f"line {line}: {e}") from e
        conditions.append(
            Condition(
                condition.group("label"),
                _number(condition.group("factor"), line),
                condition.group("attribute"),
            )
        )

    return Neurule(
        match.group("label"),
        _number(match.group("bias"), line),
        tuple(conditions),
        match.group("conclusion"),
    )


def parse_neurules(text: str) -> Dict[str, Neurule]:
    neurules: Dict[str, Neurule] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        neurule = parse_neurule(line, number)
        if neurule.label in neurules:
            raise NeuruleFormatError(f"line {number}: {neurule.label} defined twice")
        neurules[neurule.label] = neurule
    return neurules


def format_neurule(neurule: Neurule) -> str:
    conditions = ", ".join(
        f"{c.label}{'@' + c.attribute if c.attribute else ''} {c.factor:g}"
        for c in neurule.conditions
    )
    return (
        f"{neurule.label} bias {neurule.bias:g} : {conditions} "
        f"then {neurule.conclusion}"
    )


R7_DEFINITION = (
    "R7 bias -9.7 : antinflam-none@antinflam 12.4, night-pain@pain 12.3, "
    "continuous-pain@pain 11.9, patient-21-35@patient-class 8.8, "
    "patient-0-20@patient-class 8.4, no-fever@fever 4.5 then primary-malignant"
)

R7 = parse_neurule(R7_DEFINITION)

ADJUSTED_BIAS = -17.0
ADJUSTED_FACTOR = ("night-pain", 19.6)


# Adjustment experiment


class VariantResult(NamedTuple):
    name: str
    neurule: Neurule
    sums: Dict[str, float]
    represented: Dict[str, bool]

    @property
    def failing(self) -> List[str]:
        return [label for label, ok in self.represented.items() if not ok]


@dataclass
class AdjustmentReport:
    variants: List[VariantResult]
    graph_removal: Dict[str, bool]
    removed: str

    def variant(self, name: str) -> VariantResult:
        for variant in self.variants:
            if variant.name == name:
                return variant
        raise KeyError(name)


def graph_removal_check(
    rules: Mapping[str, Rule],
    removed: str,
    policy: EncodingPolicy = DEFAULT_POLICY,
) -> Dict[str, bool]:
    """Removes rule ``removed`` from the graph encoding of ``rules`` and reports, per
    remaining rule, whether its conditions still conclude its head."""
    net = build(rules.values(), policy)
    remove_rule(net, rules[removed], policy)
    engine = Engine(net)
    outcome = {}
    for label, rule in rules.items():
        if label == removed:
            continue
        facts = {lit.thing: not lit.negated for lit in rule.body}
        outcome[label] = engine.infer(facts).is_true(rule.head.thing)
    return outcome


def adjustment_experiment(
    neurule: Neurule,
    rules: Mapping[str, Rule],
    removed: Optional[str] = None,
    bias: float = ADJUSTED_BIAS,
    factor: Tuple[str, float] = ADJUSTED_FACTOR,
) -> AdjustmentReport:
    """Evaluates the symbolic rules of ``neurule`` under the original parameters and
    under the two single-parameter adjustments meant to stop it representing
    ``removed`` (the first rule by default), next to plain link removal in the graph.
    """
    removed = removed if removed is not None else next(iter(rules))
    inputs = {
        label: input_for(neurule, (lit.thing for lit in rule.body if not lit.negated))
        for label, rule in rules.items()
    }
    candidates = [
        ("original", neurule),
        (f"bias {bias:g}", neurule.with_bias(bias)),
        (f"{factor[0]} {factor[1]:g}", neurule.with_factor(*factor)),
    ]

    variants = []
    for name, candidate in candidates:
        outputs = {label: evaluate(candidate, x) for label, x in inputs.items()}
        variants.append(
            VariantResult(
                name,
                candidate,
                {label: out.sum for label, out in outputs.items()},
                {label: out.output for label, out in outputs.items()},
            )
        )
        logger.debug("Neurule variant %s: %s", name, variants[-1].sums)

    return AdjustmentReport(variants, graph_removal_check(rules, removed), removed)


def format_adjustment_report(report: AdjustmentReport) -> str:
    lines = []
    for variant in report.variants:
        lines.append(f"{variant.name}: {format_neurule(variant.neurule)}")
        for label, total in variant.sums.items():
            verdict = "represents" if variant.represented[label] else "FAILS"
            lines.append(f"  {label}: S={total:.1f} {verdict}")
    lines.append(f"graph model after removing {report.removed}:")
    for label, ok in report.graph_removal.items():
        lines.append(f"  {label}: {'represents' if ok else 'FAILS'}")
    return "\n".join(lines) + "\n"
