import json

import numpy as np
import pytest

from spineml.errors import CorruptFileError, VersionMismatchError
from spineml.experiment import ExperimentConfig, run_matrix
from spineml.report import (
    emit_report,
    load_results,
    matrix_from_dict,
    matrix_to_dict,
    render_table4,
    render_table5,
    render_table5_text,
    results_json_text,
)


@pytest.fixture(scope="module")
def matrix():
    cfg = ExperimentConfig(
        synthetic={"n": 244, "seed": 7, "signal": 0.8},
        groups=("I", "II", "IV"),
        models=("GaussianNB", "ComplementNB", "KNN", "DT"),
    )
    return run_matrix(cfg)


@pytest.fixture(scope="module")
def full_matrix():
    cfg = ExperimentConfig(
        synthetic={"n": 80, "seed": 5, "signal": 0.5},
        models=("GaussianNB", "KNN", "DT"),
        n_folds=4,
    )
    return run_matrix(cfg)


def test_emit_report_file_manifest(matrix, tmp_path):
    files = emit_report(matrix, tmp_path / "out")
    names = sorted(p.name for p in files.values())
    assert names == ["fig2a.svg", "fig2b.svg", "results.json", "table4.csv", "table5.csv"]
    for p in files.values():
        assert p.exists() and p.stat().st_size > 0


def test_table4_layout(matrix):
    lines = render_table4(matrix).strip().split("\n")
    assert lines[0] == "Model,I,II,IV"
    assert len(lines) == 1 + 2 * len(matrix.models)
    assert lines[1].startswith("GaussianNB (Acc),")
    assert lines[2].startswith("GaussianNB (F1),")
    # two decimals, best value per row starred
    for line in lines[1:]:
        cells = line.split(",")[1:]
        starred = [c for c in cells if c.endswith("*")]
        assert starred, line
        values = [float(c.rstrip("*")) for c in cells]
        assert max(values) == float(starred[0].rstrip("*"))
        for c in cells:
            body = c.rstrip("*")
            assert len(body.split(".")[1]) == 2


def test_full_table4_has_16_rows(full_matrix):
    # with all 8 models the layout is 8 models x 2 metrics over 7 groups
    cfg_models = full_matrix.models
    lines = render_table4(full_matrix).strip().split("\n")
    assert len(lines) == 1 + 2 * len(cfg_models)
    assert lines[0] == "Model," + ",".join(full_matrix.groups)


def test_table5_layout(matrix):
    lines = render_table5(matrix).strip().split("\n")
    assert lines[0] == "group,mean_acc,sd_acc,mean_f1,sd_f1"
    assert len(lines) == 1 + len(matrix.groups)
    for line in lines[1:]:
        fields = line.split(",")
        assert fields[0] in matrix.groups
        for value in fields[1:]:
            float(value)


def test_table5_text_mentions_group_names(matrix):
    text = render_table5_text(matrix)
    assert "Pre-surgical" in text
    assert "Analytical" in text


def test_results_json_round_trip(matrix, tmp_path):
    path = tmp_path / "results.json"
    path.write_text(results_json_text(matrix))
    back = load_results(path)
    assert back.groups == matrix.groups
    assert back.models == matrix.models
    for key, cell in matrix.cells.items():
        other = back.cells[key]
        assert other.accuracy == cell.accuracy
        assert other.f1 == cell.f1
        assert other.confusion == cell.confusion
    # aggregates recomputable from reloaded cells
    for g in back.groups:
        accs = [back.cells[(g, m)].accuracy for m in back.models]
        assert abs(back.group_stats[g]["mean_acc"] - np.mean(accs)) < 1e-12


def test_results_json_full_precision(matrix):
    raw = json.loads(results_json_text(matrix))
    cell = raw["cells"][0]
    assert cell["accuracy"] == matrix.cells[(raw["cells"][0]["group"], cell["model"])].accuracy


def test_results_json_deterministic_bytes(matrix):
    a = results_json_text(matrix)
    b = results_json_text(matrix)
    assert a == b


def test_load_results_version_and_corruption(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(CorruptFileError):
        load_results(bad)
    versioned = tmp_path / "v99.json"
    versioned.write_text(json.dumps({"format_version": 99}))
    with pytest.raises(VersionMismatchError):
        load_results(versioned)
    incomplete = tmp_path / "inc.json"
    incomplete.write_text(json.dumps({"format_version": 1, "cells": []}))
    with pytest.raises(CorruptFileError):
        load_results(incomplete)


def test_matrix_dict_round_trip(matrix):
    again = matrix_from_dict(matrix_to_dict(matrix))
    assert results_json_text(again) == results_json_text(matrix)


def test_svg_charts_have_axis_and_values(matrix, tmp_path):
    files = emit_report(matrix, tmp_path / "svg")
    fig2a = files["fig2a"].read_text()
    assert fig2a.startswith("<svg")
    for tick in ("0.0", "0.5", "1.0"):
        assert f">{tick}</text>" in fig2a
    fig2b = files["fig2b"].read_text()
    assert "GaussianNB" in fig2b
    assert "Accuracy" in fig2b and "F1" in fig2b


def test_emit_report_catches_aggregate_drift(matrix, tmp_path):
    broken = matrix_from_dict(matrix_to_dict(matrix))
    broken.group_stats[matrix.groups[0]]["mean_acc"] = 0.123456
    with pytest.raises(AssertionError):
        emit_report(broken, tmp_path / "broken")
