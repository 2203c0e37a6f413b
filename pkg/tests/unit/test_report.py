"""Evaluation report aggregation, persistence and tables."""

import json

import pytest
from pydantic import ValidationError
from rich.console import Console

from evaluation import REFERENCE_RESULTS, EvalReport, PairRecord, reference_table, render_table


def _records():
    return [
        PairRecord(pair_id="p0", nmse_percent=2.0, csim=0.9),
        PairRecord(pair_id="p1", error="DetectionError: no face"),
        PairRecord(pair_id="p2", nmse_percent=4.0, csim=0.7),
    ]


def _render(table) -> str:
    console = Console(width=160, record=True)
    console.print(table)
    return console.export_text()


def test_aggregates_skip_failed_pairs():
    report = EvalReport.from_records("many-to-many", _records(), fid=12.5)
    assert report.mean_nmse == pytest.approx(3.0)
    assert report.mean_csim == pytest.approx(0.8)
    assert report.sample_count == 2
    assert report.failures == 1
    assert [r.pair_id for r in report.records] == ["p0", "p1", "p2"]


def test_json_round_trip(tmp_path):
    report = EvalReport.from_records("one-to-one", _records(), fid=3.25)
    path = report.save(tmp_path / "out" / "report.json")
    assert EvalReport.load(path) == report


def test_inconsistent_count_is_rejected():
    with pytest.raises(ValidationError, match="sample_count"):
        EvalReport(scenario="x", records=_records(), sample_count=3)


@pytest.mark.parametrize("field, value", [("mean_nmse", 99.0), ("mean_csim", 0.1), ("mean_nmse", None)])
def test_edited_means_are_rejected_on_load(tmp_path, field, value):
    path = EvalReport.from_records("many-to-many", _records(), fid=1.0).save(tmp_path / "report.json")
    data = json.loads(path.read_text())
    data[field] = value
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError, match=field):
        EvalReport.load(path)


def test_means_without_successful_records_are_rejected():
    with pytest.raises(ValidationError, match="mean_nmse"):
        EvalReport(scenario="x", records=[PairRecord(pair_id="p", error="boom")], mean_nmse=1.0)


def test_fid_needs_two_pairs():
    with pytest.raises(ValidationError, match="fid"):
        EvalReport.from_records("x", _records()[:2], fid=1.0)


def test_all_failed():
    report = EvalReport.from_records("x", [PairRecord(pair_id="p", error="boom")])
    assert report.mean_nmse is None and report.mean_csim is None
    assert "-" in _render(render_table(report))


def test_tables_render():
    text = _render(render_table(EvalReport.from_records("self", _records(), fid=0.0)))
    assert "3.00%" in text and "0.80" in text and "2/3" in text

    reference = _render(reference_table())
    for rows in REFERENCE_RESULTS.values():
        for row in rows:
            assert f"{row.fid:.2f}" in reference
    assert "29.97" in reference and "0.45" in reference
