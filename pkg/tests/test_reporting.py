import json
import math

import pytest

import reporting
from repeater.common import ConfigError

RECORDS = [
    {"check": "hom", "value": 0.0, "passed": True},
    {"check": "swap", "value": 1.23456789, "passed": False},
]
COLUMNS = ("check", "value", "passed")


def test_csv_header_and_rows():
    lines = reporting.render_csv(RECORDS, COLUMNS).splitlines()
    assert lines[0] == "check,value,passed"
    assert lines[2] == "swap,1.23456789,False"


def test_csv_blank_for_missing():
    text = reporting.render_csv([{"check": "x", "value": None}], COLUMNS)
    assert text.splitlines()[1] == "x,,"


def test_json_nulls_non_finite():
    rows = json.loads(reporting.render_json([{"check": "t", "value": math.inf, "passed": True}], COLUMNS))
    assert rows == [{"check": "t", "value": None, "passed": True}]


def test_pretty_aligns_columns():
    lines = reporting.render_pretty(RECORDS, COLUMNS).splitlines()
    assert lines[0].split() == ["check", "value", "passed"]
    assert set(lines[1].replace(" ", "")) == {"-"}
    assert lines[3].split() == ["swap", "1.23457", "no"]
    assert lines[0].index("value") == lines[2].index("0")


def test_unknown_format():
    with pytest.raises(ConfigError, match="output"):
        reporting.render_records(RECORDS, COLUMNS, "xml")


def test_write_records_to_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    reporting.write_records(RECORDS, COLUMNS, "csv", str(path))
    assert path.read_text().startswith("check,value,passed")
    assert capsys.readouterr().out == ""


def test_write_records_to_stdout(capsys):
    reporting.write_records(RECORDS, COLUMNS, "json")
    assert json.loads(capsys.readouterr().out)[0]["check"] == "hom"
