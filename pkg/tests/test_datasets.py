"""Tests for module ``noxlogic.datasets``."""

import logging
import random
from pathlib import Path

from typing import List, Set, Tuple

import pytest

from noxlogic.datasets import (
    MUSHROOM_ATTRIBUTES,
    MUSHROOM_MISSING,
    SPECT_FEATURES,
    DatasetFormatError,
    Record,
    conflicting_records,
    format_report,
    load_mushroom,
    load_spect,
    memorize,
    record_to_rule,
    report_csv,
    report_table,
)
from noxlogic.rules import EncodingPolicy, parse_rule

MUSHROOM_LINES = [
    "p,x,s,n,t,p,f,c,n,k,e,e,s,s,w,w,p,w,o,p,k,s,u",
    "e,x,s,y,t,a,f,c,b,k,e,c,s,s,w,w,p,w,o,p,n,n,g",
    "e,b,s,w,t,l,f,c,b,n,e,c,s,s,w,w,p,w,o,p,n,n,m",
    "p,x,y,w,t,p,f,c,n,n,e,e,s,s,w,w,p,w,o,p,k,s,u",
    "e,x,s,g,f,n,f,w,b,k,t,?,s,s,w,w,p,w,o,e,n,a,g",
    "e,x,y,y,t,a,f,c,b,n,e,c,s,s,w,w,p,w,o,p,k,n,g",
]


def _spect_line(label: str, bits: str) -> str:
    return ",".join([label, *bits])


SPECT_LINES = [
    _spect_line("1", "0" * 21 + "1"),
    _spect_line("1", "1" * 22),
    _spect_line("0", "0" * 22),
    _spect_line("1", "0" * 22),
    _spect_line("0", "10" * 11),
]


def synthetic_mushroom_lines(count: int, seed: int = 7) -> List[str]:
    """Distinct records whose class depends on the first attribute only."""
    rng = random.Random(seed)
    rows: Set[Tuple[str, ...]] = set()
    while len(rows) < count:
        rows.add(tuple(rng.choice("abcdefgh") for _ in MUSHROOM_ATTRIBUTES))
    return [
        ",".join(["p" if values[0] in "abcd" else "e", *values])
        for values in sorted(rows)
    ]


def synthetic_spect_lines(count: int, indecisive: int, seed: int = 11) -> List[str]:
    """Distinct feature vectors classed by majority of the first three bits, followed
    by ``indecisive`` vectors that appear with both classes."""
    rng = random.Random(seed)
    lines = []
    for vector in rng.sample(range(2 ** len(SPECT_FEATURES)), count):
        bits = format(vector, f"0{len(SPECT_FEATURES)}b")
        label = "1" if bits[:3].count("1") >= 2 else "0"
        lines.append(_spect_line(label, bits))
    for line in lines[:indecisive]:
        flipped = "0" if line[0] == "1" else "1"
        lines.append(flipped + line[1:])
    return lines


def _write(tmp_path: Path, name: str, lines: List[str]) -> Path:
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def mushroom_file(tmp_path: Path) -> Path:
    return _write(tmp_path, "agaricus-lepiota.data", MUSHROOM_LINES)


@pytest.fixture
def spect_file(tmp_path: Path) -> Path:
    return _write(tmp_path, "SPECT.train", SPECT_LINES)


def _record(values: str, label: str, row: int = 0) -> Record:
    names = ("a", "b", "c")
    return Record(tuple(zip(names, values)), label, "class", row)


class TestLoadMushroom:
    def test_loads_every_record_in_file_order(self, mushroom_file: Path):
        records = load_mushroom(mushroom_file)
        assert len(records) == len(MUSHROOM_LINES)
        first = records[0]
        assert first.class_label == "poisonous"
        assert first.class_thing == "class=poisonous"
        assert first.source_row == 1
        assert first.things[:2] == ("cap-shape=x", "cap-surface=s")
        assert len(first.attributes) == len(MUSHROOM_ATTRIBUTES)

    def test_question_mark_is_missing_value(self, mushroom_file: Path):
        record = load_mushroom(mushroom_file)[4]
        assert dict(record.attributes)["stalk-root"] == MUSHROOM_MISSING

    def test_attribute_prefix(self, mushroom_file: Path):
        records = load_mushroom(mushroom_file, n_attrs=2)
        assert [name for name, _ in records[0].attributes] == [
            "cap-shape",
            "cap-surface",
        ]

    @pytest.mark.parametrize("n_attrs", [0, 23])
    def test_attribute_count_out_of_range(self, mushroom_file: Path, n_attrs: int):
        with pytest.raises(ValueError):
            load_mushroom(mushroom_file, n_attrs=n_attrs)

    def test_record_count(self, mushroom_file: Path):
        assert load_mushroom(mushroom_file, n_records=0) == []
        assert len(load_mushroom(mushroom_file, n_records=2)) == 2

    def test_seeded_shuffle_is_deterministic(self, mushroom_file: Path):
        first = load_mushroom(mushroom_file, seed=3)
        second = load_mushroom(mushroom_file, seed=3)
        assert first == second
        rows = sorted(record.source_row for record in first)
        assert rows == list(range(1, len(MUSHROOM_LINES) + 1))

    def test_wrong_column_count_reports_row(self, tmp_path: Path):
        path = _write(tmp_path, "bad.data", [MUSHROOM_LINES[0], "p,x,s"])
        with pytest.raises(DatasetFormatError) as info:
            load_mushroom(path)
        assert info.value.row == 2
        assert str(info.value).startswith("row 2: ")

    def test_unknown_class_reports_row(self, tmp_path: Path):
        path = _write(tmp_path, "bad.data", ["x" + MUSHROOM_LINES[0][1:]])
        with pytest.raises(DatasetFormatError, match="row 1"):
            load_mushroom(path)

    def test_extra_column_reports_row(self, tmp_path: Path):
        lines = [MUSHROOM_LINES[0], MUSHROOM_LINES[1], MUSHROOM_LINES[2] + ",x"]
        with pytest.raises(DatasetFormatError) as info:
            load_mushroom(_write(tmp_path, "bad.data", lines))
        assert info.value.row == 3
        assert "found 24" in str(info.value)

    def test_empty_value_reports_column(self, tmp_path: Path):
        line = "p,," + MUSHROOM_LINES[0][4:]
        with pytest.raises(DatasetFormatError, match="row 1: invalid value '' for"):
            load_mushroom(_write(tmp_path, "bad.data", [line]))

    def test_blank_lines_keep_line_numbers(self, tmp_path: Path):
        lines = [MUSHROOM_LINES[0], "", "  ", MUSHROOM_LINES[1]]
        records = load_mushroom(_write(tmp_path, "gaps.data", lines))
        assert [record.source_row for record in records] == [1, 4]
        assert records[1].class_label == "edible"


class TestLoadSpect:
    def test_indecisive_records_are_dropped(self, spect_file: Path):
        data = load_spect(spect_file)
        assert data.dropped == 2
        assert [record.source_row for record in data.records] == [1, 2, 5]
        assert data.records[0].class_thing == "heart=abnormal"
        assert data.records[0].things[-1] == "F22=1"

    def test_indecisive_records_can_be_kept(self, spect_file: Path):
        data = load_spect(spect_file, drop_indecisive=False)
        assert data.dropped == 0
        assert len(data.records) == len(SPECT_LINES)

    def test_non_binary_token(self, tmp_path: Path):
        path = _write(tmp_path, "bad.train", [SPECT_LINES[0], "2," + "0," * 21 + "0"])
        with pytest.raises(DatasetFormatError) as info:
            load_spect(path)
        assert info.value.row == 2

    def test_empty_file(self, tmp_path: Path):
        data = load_spect(_write(tmp_path, "empty.train", []))
        assert data.records == []
        assert data.dropped == 0


class TestRecords:
    def test_record_to_rule(self):
        rule = record_to_rule(_record("xy", "edible"))
        assert rule == parse_rule("if a=x, b=y then class=edible")

    def test_repeated_attribute_is_rejected(self):
        with pytest.raises(ValueError):
            Record((("a", "x"), ("a", "y")), "edible")

    def test_conflicting_records(self):
        records = [
            _record("xyz", "edible", 1),
            _record("xyz", "poisonous", 2),
            _record("xyy", "edible", 3),
            _record("xyz", "edible", 4),
        ]
        pairs = conflicting_records(records)
        assert [(a.source_row, b.source_row) for a, b in pairs] == [(1, 2), (2, 4)]


class TestMemorize:
    @pytest.mark.parametrize("policy", list(EncodingPolicy))
    def test_consistent_records_are_all_recalled(
        self, mushroom_file: Path, policy: EncodingPolicy
    ):
        records = load_mushroom(mushroom_file)
        report = memorize(records, policy)
        assert report.recall == 1.0
        assert all(step.recalled == step.step for step in report.steps)
        assert all(step.contradictions == 0 for step in report.steps)
        assert report.conflicts == []
        assert report.steps[-1].elinks == len(records)

    def test_network_grows_with_new_values(self):
        report = memorize([_record("xyz", "edible"), _record("xyw", "poisonous")])
        assert [step.neurons for step in report.steps] == [4, 6]
        assert [step.elinks for step in report.steps] == [1, 2]

    def test_duplicate_record_adds_no_link(self):
        report = memorize([_record("xyz", "edible"), _record("xyz", "edible")])
        assert report.steps[-1].elinks == 1
        assert report.recall == 1.0

    def test_conflict_lowers_recall(self, caplog):
        records = [
            _record("xyz", "edible", 1),
            _record("xyw", "edible", 2),
            _record("xyz", "poisonous", 3),
        ]
        with caplog.at_level(logging.WARNING, logger="noxlogic.datasets"):
            report = memorize(records)

        assert report.recall == pytest.approx(1 / 3)
        assert report.steps[-1].contradictions == 2
        assert report.final_recalled == [False, True, False]
        assert [(c.step, c.record.source_row) for c in report.conflicts] == [
            (3, 1),
            (3, 3),
        ]
        assert report.conflicts[0].concluded == ("class=edible", "class=poisonous")
        assert report.consistent_recall == 1.0
        assert "concludes class=edible, class=poisonous at step 3" in caplog.text

    def test_attribute_prefix_can_create_conflicts(self, mushroom_file: Path):
        records = load_mushroom(mushroom_file, n_attrs=1)
        report = memorize(records)
        assert report.conflicting_records
        assert report.recall < 1.0

    def test_no_records(self):
        report = memorize([])
        assert report.recall == 1.0
        assert report.steps == []

    @pytest.mark.parametrize(
        ("n_attrs", "n_records"), [(10, 25), (15, 50), (20, 75), (22, 80)]
    )
    def test_mushroom_slices_are_recalled(
        self, tmp_path: Path, n_attrs: int, n_records: int
    ):
        path = _write(tmp_path, "mushroom.data", synthetic_mushroom_lines(80))
        records = load_mushroom(path, n_attrs, n_records, seed=5)
        assert len(records) == n_records
        assert all(len(record.attributes) == n_attrs for record in records)

        report = memorize(records)
        assert report.recall == 1.0
        assert all(step.contradictions == 0 for step in report.steps)
        assert report.conflicts == []
        assert report.conflicting_records == []

    def test_seeded_slice_is_reproducible(self, tmp_path: Path):
        path = _write(tmp_path, "mushroom.data", synthetic_mushroom_lines(80))
        first = load_mushroom(path, 15, 50, seed=5)
        assert load_mushroom(path, 15, 50, seed=5) == first
        assert load_mushroom(path, 15, 50, seed=6) != first

    def test_spect_sized_file(self, tmp_path: Path):
        lines = synthetic_spect_lines(257, indecisive=10)
        data = load_spect(_write(tmp_path, "SPECT.train", lines))
        assert len(lines) == 267
        assert data.dropped == 20
        assert len(data.records) == 247

        report = memorize(data.records)
        assert report.recall == 1.0
        assert all(step.contradictions == 0 for step in report.steps)
        assert report.conflicts == []


class TestReport:
    def test_text_report(self):
        report = memorize([_record("xyz", "edible", 1), _record("xyw", "edible", 2)])
        assert format_report(report) == (
            "step 1: recalled 1/1, contradictions 0, neurons 4, elinks 1\n"
            "step 2: recalled 2/2, contradictions 0, neurons 5, elinks 2\n"
            "final recall: 2/2 (all)\n"
            "conflicting records: none\n"
        )

    def test_text_report_with_conflict(self):
        report = memorize([_record("xyz", "edible", 1), _record("xyz", "poison", 5)])
        lines = format_report(report).splitlines()
        assert lines[-3] == "final recall: 0/2"
        assert lines[-2] == (
            "conflicting records: rows 1 and 5 (class=edible vs class=poison)"
        )
        assert lines[-1] == "consistent recall: 1.000"

    def test_table_and_csv(self, tmp_path: Path):
        report = memorize([_record("xyz", "edible"), _record("xyw", "edible")])
        table = report_table(report)
        assert list(table.columns) == ["step", "recalled", "total", "contradictions"]
        assert table["recalled"].tolist() == [1, 2]

        path = tmp_path / "report.csv"
        text = report_csv(report, path)
        assert text.splitlines()[0] == "step,recalled,total,contradictions"
        assert text.splitlines()[1] == "1,1,1,0"
        assert path.read_text() == text
