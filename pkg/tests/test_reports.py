"""CSV 与 JSON 报告写入"""

import json
import math

import pytest

from gfcalc.handlers.reports import (
    SAMPLE_COLUMNS,
    SUP_COLUMNS,
    companion_path,
    format_float,
    samples_csv,
    sup_csv,
    sup_rows,
    to_json_text,
    write_json,
    write_text,
)
from gfcalc.models import Verdict, VerdictReport
from gfcalc.services.asymptotics import Net, default_grid
from gfcalc.utils.exceptions import ReportWriteError


def test_format_float_round_trips():
    value = 1.0 / 3.0
    assert float(format_float(value)) == value
    assert format_float(math.inf) == "inf"
    assert format_float(-math.inf) == "-inf"
    assert format_float(math.nan) == "nan"


def test_json_text_is_sorted_with_trailing_newline():
    text = to_json_text({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')


def test_json_text_from_model():
    report = VerdictReport(operation="moderate_on", verdict=Verdict.YES)
    payload = json.loads(to_json_text(report))
    assert payload["verdict"] == "Yes"
    assert payload["operation"] == "moderate_on"


def test_samples_csv_columns():
    samples = Net.power(-1.0, -2.0).samples(default_grid(1, 8))
    lines = samples_csv(samples).splitlines()
    assert lines[0] == ",".join(SAMPLE_COLUMNS)
    eps, sign, log_abs = lines[1].split(",")
    assert float(eps) == 0.5
    assert int(sign) == -1
    assert float(log_abs) == pytest.approx(math.log(4.0))


def test_sup_rows_and_csv():
    samples = Net.constant(0.0).samples(default_grid(1, 8))
    rows = sup_rows(samples, alpha=1)
    assert rows[0][2] == 1
    assert rows[0][3] == 0.0
    text = sup_csv(rows)
    assert text.splitlines()[0] == ",".join(SUP_COLUMNS)
    assert text.splitlines()[1].endswith(",-inf")


def test_write_text_is_atomic_replace(tmp_path):
    target = tmp_path / "out" / "report.json"
    write_text(str(target), "first\n")
    write_text(str(target), "second\n")
    assert target.read_text(encoding="utf-8") == "second\n"
    assert [p.name for p in target.parent.iterdir()] == ["report.json"]


def test_write_json_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    payload = {"z": 1.5, "a": {"y": [1, 2], "x": None}}
    write_json(str(a), payload)
    write_json(str(b), payload)
    assert a.read_bytes() == b.read_bytes()


def test_write_into_file_path_fails(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    with pytest.raises(ReportWriteError):
        write_text(str(blocker / "report.json"), "{}")


def test_companion_path():
    assert companion_path("/tmp/run/report.json", "sup", ".csv") == "/tmp/run/report.sup.csv"
    assert companion_path("psi.json", "report") == "psi.report.json"
