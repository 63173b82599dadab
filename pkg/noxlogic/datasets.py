"""UCI dataset loading and incremental memorization.

Every record becomes one rule: its attribute values are the body and its class is the
head. ``memorize`` adds the rules one at a time and after each addition replays every
record seen so far against the grown network.
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from typing import (
    Dict,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import pandas as pd

from noxlogic.builder import add_rule
from noxlogic.inference import Engine, InferenceResult
from noxlogic.network import THING_PATTERN, Network, Value
from noxlogic.rules import DEFAULT_POLICY, EncodingPolicy, Literal, Rule

logger = logging.getLogger(__name__)

PathType = Union[str, Path]

DEFAULT_SEED = 0

MUSHROOM_ATTRIBUTES = (
    "cap-shape",
    "cap-surface",
    "cap-color",
    "bruises",
    "odor",
    "gill-attachment",
    "gill-spacing",
    "gill-size",
    "gill-color",
    "stalk-shape",
    "stalk-root",
    "stalk-surface-above-ring",
    "stalk-surface-below-ring",
    "stalk-color-above-ring",
    "stalk-color-below-ring",
    "veil-type",
    "veil-color",
    "ring-number",
    "ring-type",
    "spore-print-color",
    "population",
    "habitat",
)
MUSHROOM_CLASSES = {"e": "edible", "p": "poisonous"}
MUSHROOM_MISSING = "missing"

SPECT_FEATURES = tuple(f"F{i}" for i in range(1, 23))
SPECT_CLASSES = {"0": "normal", "1": "abnormal"}


class DatasetFormatError(ValueError):
    """Raised for malformed dataset rows. ``row`` is the 1-based line number."""

    def __init__(self, message: str, row: int) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class Record:
    attributes: Tuple[Tuple[str, str], ...]
    class_label: str
    class_attribute: str = "class"
    source_row: int = 0

    def __post_init__(self) -> None:
        names = [name for name, _ in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError(f"Record from row {self.source_row} repeats an attribute")

    @property
    def things(self) -> Tuple[str, ...]:
        return tuple(f"{name}={value}" for name, value in self.attributes)

    @property
    def class_thing(self) -> str:
        return f"{self.class_attribute}={self.class_label}"


class SpectData(NamedTuple):
    records: List[Record]
    dropped: int


_FIELD_COUNT_ERROR = re.compile(r"Expected \d+ fields in line (\d+), saw (\d+)")


def _read_rows(path: PathType, columns: Sequence[str]) -> pd.DataFrame:
    """Reads a headerless comma-separated file into ``columns`` and a ``row`` column
    holding the 1-based line number. Blank lines are skipped.

    Raises:
        DatasetFormatError: On the first row without exactly one field per column.
    """
    width = len(columns)
    try:
        raw = pd.read_csv(
            path,
            header=None,
            names=list(range(width + 1)),
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
            engine="python",
        )
    except pd.errors.EmptyDataError:
        raw = pd.DataFrame()
    except pd.errors.ParserError as e:
        match = _FIELD_COUNT_ERROR.search(str(e))
        if match is None:
            raise DatasetFormatError(str(e), 0) from e
        raise DatasetFormatError(
            f"expected {width} columns, found {match.group(2)}", int(match.group(1))
        ) from e

    raw = raw.reset_index(drop=True)
    raw.index = raw.index + 1
    cells = raw.fillna("").apply(lambda column: column.str.strip())
    filled = (cells != "").any(axis=1)
    if not filled.any():
        return pd.DataFrame(columns=["row", *columns])

    counts = raw.notna().sum(axis=1)[filled]
    wrong = counts[counts != width]
    if not wrong.empty:
        raise DatasetFormatError(
            f"expected {width} columns, found {wrong.iloc[0]}", int(wrong.index[0])
        )

    frame = cells.loc[filled, cells.columns[:width]].copy()
    frame.columns = list(columns)
    frame.insert(0, "row", frame.index)
    return frame.reset_index(drop=True)


def _first_bad_cell(
    frame: pd.DataFrame, bad: pd.DataFrame
) -> Optional[Tuple[int, str, str]]:
    """Returns line number, column and value of the first cell flagged in ``bad``."""
    rows = bad.any(axis=1)
    if not rows.any():
        return None
    position = int(rows.to_numpy().argmax())
    column = str(bad.iloc[position].idxmax())
    return int(frame["row"].iloc[position]), column, frame[column].iloc[position]


def load_mushroom(
    path: PathType,
    n_attrs: int = len(MUSHROOM_ATTRIBUTES),
    n_records: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[Record]:
    """Loads records from a UCI mushroom file (class letter, then 22 attribute letters).

    A ``?`` value becomes ``missing``.

    Args:
        path (PathType): Comma-separated data file.
        n_attrs (int, optional): Number of leading attribute columns kept.
        n_records (int, optional): Number of records kept. Defaults to all of them.
        seed (int, optional): If given, rows are shuffled with this seed before the
            first ``n_records`` are taken. Defaults to file order.

    Raises:
        DatasetFormatError: On a wrong column count, an unknown class letter or a
            value that cannot be part of a thing name.
        ValueError: If ``n_attrs`` is not between 1 and 22.
    """
    if not 1 <= n_attrs <= len(MUSHROOM_ATTRIBUTES):
        raise ValueError(f"n_attrs must be between 1 and {len(MUSHROOM_ATTRIBUTES)}")

    frame = _read_rows(path, ["class", *MUSHROOM_ATTRIBUTES])
    labels = frame["class"].map(MUSHROOM_CLASSES)
    unknown = _first_bad_cell(frame, labels.isna().to_frame("class"))
    if unknown is not None:
        row, _, letter = unknown
        raise DatasetFormatError(f"unknown class {letter!r}", row)
    frame["class"] = labels

    attributes = list(MUSHROOM_ATTRIBUTES)
    frame[attributes] = frame[attributes].replace("?", MUSHROOM_MISSING)
    valid = frame[attributes].apply(
        lambda column: column.str.fullmatch(THING_PATTERN.pattern)
    )
    invalid = _first_bad_cell(frame, ~valid.astype(bool))
    if invalid is not None:
        row, name, value = invalid
        raise DatasetFormatError(f"invalid value {value!r} for {name}", row)

    if seed is not None:
        frame = frame.sample(frac=1, random_state=seed)
    if n_records is not None:
        frame = frame.head(n_records)

    kept = MUSHROOM_ATTRIBUTES[:n_attrs]
    records = [
        Record(
            tuple(zip(kept, values[2 : 2 + n_attrs])),
            values[1],
            "class",
            int(values[0]),
        )
        for values in frame.itertuples(index=False, name=None)
    ]
    logger.info(
        "Loaded %d mushroom records with %d attributes from %s",
        len(records),
        n_attrs,
        path,
    )
    return records


def load_spect(path: PathType, drop_indecisive: bool = True) -> SpectData:
    """Loads records from a UCI SPECT file (class bit, then 22 feature bits).

    Records whose feature vector also appears with the other class are indecisive; with
    ``drop_indecisive`` every copy of them is dropped.

    Raises:
        DatasetFormatError: On a wrong column count or a token other than 0 and 1.
    """
    frame = _read_rows(path, ["heart", *SPECT_FEATURES])
    tokens = frame[["heart", *SPECT_FEATURES]]
    bad = _first_bad_cell(frame, ~tokens.isin(list(SPECT_CLASSES)))
    if bad is not None:
        row, _, token = bad
        raise DatasetFormatError(f"non-binary token {token!r}", row)
    frame["heart"] = frame["heart"].map(SPECT_CLASSES)

    dropped = 0
    if drop_indecisive and not frame.empty:
        classes = frame.groupby(list(SPECT_FEATURES))["heart"].transform("nunique")
        indecisive = classes > 1
        dropped = int(indecisive.sum())
        frame = frame[~indecisive]
        if dropped:
            logger.info("Dropped %d indecisive SPECT records", dropped)

    records = [
        Record(
            tuple(zip(SPECT_FEATURES, values[2:])),
            values[1],
            "heart",
            int(values[0]),
        )
        for values in frame.itertuples(index=False, name=None)
    ]
    logger.info("Loaded %d SPECT records from %s", len(records), path)
    return SpectData(records, dropped)


def record_to_rule(record: Record) -> Rule:
    return Rule(
        tuple(Literal(thing) for thing in record.things),
        Literal(record.class_thing),
    )


def conflicting_records(records: Sequence[Record]) -> List[Tuple[Record, Record]]:
    """Returns every pair of records with equal attributes and different classes."""
    groups: Dict[Tuple[Tuple[str, str], ...], List[Record]] = {}
    for record in records:
        groups.setdefault(record.attributes, []).append(record)

    pairs = []
    for group in groups.values():
        for i, first in enumerate(group):
            for second in group[i + 1 :]:
                if first.class_thing != second.class_thing:
                    pairs.append((first, second))
    return pairs


class MemorizationStep(NamedTuple):
    step: int
    recalled: int
    total: int
    contradictions: int
    neurons: int
    elinks: int


class ClassConflict(NamedTuple):
    step: int
    record: Record
    concluded: Tuple[str, ...]


@dataclass
class MemorizationReport:
    """Per-step outcome of ``memorize``.

    Attributes:
        records (List[Record]): Memorized records in order.
        steps (List[MemorizationStep]): One entry per added record.
        conflicts (List[ClassConflict]): Replays that concluded more than one class or
            left a contradictory neuron, first occurrence per record.
        final_recalled (List[bool]): Whether each record is recalled after the last
            step.
    """

    records: List[Record] = field(default_factory=list)
    steps: List[MemorizationStep] = field(default_factory=list)
    conflicts: List[ClassConflict] = field(default_factory=list)
    final_recalled: List[bool] = field(default_factory=list)

    @property
    def recall(self) -> float:
        if not self.steps:
            return 1.0
        last = self.steps[-1]
        return last.recalled / last.total

    @property
    def conflicting_records(self) -> List[Tuple[Record, Record]]:
        return conflicting_records(self.records)

    @property
    def consistent_recall(self) -> float:
        """Final recall over the records not involved in a conflicting pair."""
        involved: Set[int] = {
            id(record) for pair in self.conflicting_records for record in pair
        }
        kept = [
            ok
            for record, ok in zip(self.records, self.final_recalled)
            if id(record) not in involved
        ]
        return sum(kept) / len(kept) if kept else 1.0


def _concluded_classes(result: InferenceResult, class_things: Set[str]) -> List[str]:
    return sorted(
        thing
        for thing in class_things
        if thing in result.states and result.states[thing].value is Value.TRUE
    )


def memorize(
    records: Sequence[Record], policy: EncodingPolicy = DEFAULT_POLICY
) -> MemorizationReport:
    """Adds ``records`` one by one and replays all earlier records after each step.

    A record is recalled when its class thing is True and not contradictory and no
    other class thing is True.
    """
    report = MemorizationReport(records=list(records))
    net = Network()
    class_things: Set[str] = set()
    reported: Set[int] = set()

    for step, record in enumerate(report.records, start=1):
        add_rule(net, record_to_rule(record), policy)
        class_things.add(record.class_thing)
        engine = Engine(net)

        outcome = []
        contradictions = 0
        for index, earlier in enumerate(report.records[:step]):
            result = engine.infer({thing: True for thing in earlier.things})
            concluded = _concluded_classes(result, class_things)
            ok = result.is_true(earlier.class_thing) and concluded == [
                earlier.class_thing
            ]
            if len(concluded) > 1 or result.contradictions:
                contradictions += 1
                if index not in reported:
                    reported.add(index)
                    report.conflicts.append(
                        ClassConflict(step, earlier, tuple(concluded))
                    )
                    logger.warning(
                        "Record from row %d concludes %s at step %d",
                        earlier.source_row,
                        ", ".join(concluded),
                        step,
                    )
            outcome.append(ok)

        neurons, elinks, _ = net.stats()
        report.steps.append(
            MemorizationStep(step, sum(outcome), step, contradictions, neurons, elinks)
        )
        report.final_recalled = outcome
        logger.debug("Memorization step %d: %s", step, report.steps[-1])

    logger.info(
        "Memorized %d records, final recall %.3f", len(report.records), report.recall
    )
    return report


def format_report(report: MemorizationReport) -> str:
    lines = []
    for step in report.steps:
        lines.append(
            f"step {step.step}: recalled {step.recalled}/{step.total}, "
            f"contradictions {step.contradictions}, neurons {step.neurons}, "
            f"elinks {step.elinks}"
        )

    if report.steps:
        last = report.steps[-1]
        verdict = " (all)" if last.recalled == last.total else ""
        lines.append(f"final recall: {last.recalled}/{last.total}{verdict}")
    else:
        lines.append("final recall: 0/0")

    pairs = report.conflicting_records
    if pairs:
        for first, second in pairs:
            lines.append(
                f"conflicting records: rows {first.source_row} and "
                f"{second.source_row} ({first.class_thing} vs {second.class_thing})"
            )
        lines.append(f"consistent recall: {report.consistent_recall:.3f}")
    else:
        lines.append("conflicting records: none")
    return "\n".join(lines) + "\n"


def report_table(report: MemorizationReport) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.step, s.recalled, s.total, s.contradictions) for s in report.steps],
        columns=["step", "recalled", "total", "contradictions"],
    )


def report_csv(report: MemorizationReport, path: Optional[PathType] = None) -> str:
    """Renders the per-step table as CSV and writes it to ``path`` if given."""
    text = report_table(report).to_csv(index=False)
    if path is not None:
        Path(path).write_text(text)
    return text
