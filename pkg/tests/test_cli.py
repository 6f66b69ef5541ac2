import json

import pytest

from spineml.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_generate_writes_header_plus_rows(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, stdout, _ = _run(capsys, "generate", "--n", "244", "--seed", "7",
                           "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 245
    assert "n=244" in stdout
    assert "success=" in stdout


def test_generate_rejects_small_n(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "5", "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2
    assert "n must be ≥ 20" in capsys.readouterr().err


def test_generate_deterministic_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _run(capsys, "generate", "--n", "50", "--seed", "3", "--out", str(a))
    _run(capsys, "generate", "--n", "50", "--seed", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_run_with_config_file(tmp_path, capsys):
    cfg = {
        "data": {"synthetic": {"n": 80, "seed": 5, "signal": 0.6}},
        "groups": ["I"],
        "models": ["GaussianNB", "KNN"],
        "n_folds": 4,
        "out_dir": str(tmp_path / "reports"),
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    code, stdout, _ = _run(capsys, "run", "--config", str(cfg_path))
    assert code == 0
    out_dir = tmp_path / "reports"
    for name in ("table4.csv", "table5.csv", "fig2a.svg", "fig2b.svg", "results.json"):
        assert (out_dir / name).exists()
    assert "mean_acc" in stdout


def test_run_inline_flags_restrict_cells(tmp_path, capsys):
    code, stdout, _ = _run(
        capsys, "run", "--n", "80", "--data-seed", "5", "--signal", "0.6",
        "--groups", "I", "--models", "KNN,DT", "--folds", "4",
        "--out", str(tmp_path / "r"),
    )
    assert code == 0
    results = json.loads((tmp_path / "r" / "results.json").read_text())
    assert len(results["cells"]) == 2
    ids = {(c["group"], c["model"]) for c in results["cells"]}
    assert ids == {("I", "KNN"), ("I", "DT")}


def test_run_rejects_unknown_group(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--groups", "VIII", "--out", str(tmp_path / "r")])
    assert exc.value.code == 2
    assert "VIII" in capsys.readouterr().err


def test_run_rejects_unknown_config_key(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"data": {"synthetic": {"n": 50}}, "oops": 1}))
    code, _, stderr = _run(capsys, "run", "--config", str(cfg_path))
    assert code == 1
    assert "oops" in stderr


def test_run_save_models_writes_model_files(tmp_path, capsys):
    code, _, _ = _run(
        capsys, "run", "--n", "80", "--data-seed", "2", "--groups", "I",
        "--models", "KNN", "--folds", "4", "--save-models",
        "--out", str(tmp_path / "r"),
    )
    assert code == 0
    assert (tmp_path / "r" / "models" / "KNN__I.json").exists()


def test_run_default_seed_is_reproducible(tmp_path, capsys):
    args = ["run", "--n", "60", "--groups", "IV", "--models", "GaussianNB", "--folds", "4"]
    _run(capsys, *args, "--out", str(tmp_path / "r1"))
    _run(capsys, *args, "--out", str(tmp_path / "r2"))
    a = json.loads((tmp_path / "r1" / "results.json").read_text())
    b = json.loads((tmp_path / "r2" / "results.json").read_text())
    a["provenance"]["timestamp"] = b["provenance"]["timestamp"] = None
    assert a == b


def test_report_rerenders_without_recompute(tmp_path, capsys):
    _run(capsys, "run", "--n", "80", "--data-seed", "4", "--groups", "I",
         "--models", "KNN,DT", "--folds", "4", "--out", str(tmp_path / "r"))
    code, _, _ = _run(capsys, "report", "--results", str(tmp_path / "r" / "results.json"),
                      "--out", str(tmp_path / "again"))
    assert code == 0
    assert (tmp_path / "again" / "table4.csv").read_bytes() == (
        tmp_path / "r" / "table4.csv"
    ).read_bytes()
    assert not (tmp_path / "again" / "results.json").exists()


def _make_model(tmp_path, capsys):
    _run(capsys, "run", "--n", "80", "--data-seed", "3", "--groups", "II",
         "--models", "KNN", "--folds", "4", "--save-models",
         "--out", str(tmp_path / "r"))
    return tmp_path / "r" / "models" / "KNN__II.json"


def test_predict_inline_record(tmp_path, capsys):
    model = _make_model(tmp_path, capsys)
    record = json.dumps({"GEN": 1, "AGE": 50, "EMP_ST": 3})
    code, stdout, _ = _run(capsys, "predict", "--model", str(model), "--record", record)
    assert code == 0
    payload = json.loads(stdout.strip().split("\n")[-1])
    assert set(payload) == {"label", "score"}
    assert payload["label"] in ("success", "no-success")


def test_predict_record_file_and_trace(tmp_path, capsys):
    model = _make_model(tmp_path, capsys)
    rec_path = tmp_path / "rec.json"
    rec_path.write_text(json.dumps({"GEN": 0, "AGE": 61, "EMP_ST": 7}))
    code, stdout, _ = _run(capsys, "predict", "--model", str(model),
                           "--record", str(rec_path), "--trace")
    assert code == 0
    payload = json.loads(stdout.strip().split("\n")[-1])
    assert set(payload) == {"label", "score", "trace"}
    assert {t["name"] for t in payload["trace"]} == {"GEN", "AGE", "EMP_ST"}


def test_predict_missing_feature_exits_1(tmp_path, capsys):
    model = _make_model(tmp_path, capsys)
    code, _, stderr = _run(capsys, "predict", "--model", str(model),
                           "--record", json.dumps({"GEN": 1, "EMP_ST": 3}))
    assert code == 1
    assert "missing feature: AGE" in stderr


def test_predict_version_mismatch_exits_1(tmp_path, capsys):
    model = _make_model(tmp_path, capsys)
    raw = json.loads(model.read_text())
    raw["format_version"] = 9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    code, _, stderr = _run(capsys, "predict", "--model", str(bad),
                           "--record", json.dumps({"GEN": 1, "AGE": 50, "EMP_ST": 3}))
    assert code == 1
    assert "version" in stderr.lower()


@pytest.mark.parametrize("command", ["generate", "run", "report", "predict"])
def test_help_exits_zero(command, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out.lower()


def test_predict_output_is_strict_json(tmp_path, capsys):
    model = _make_model(tmp_path, capsys)
    record = json.dumps({"GEN": 1, "AGE": 44, "EMP_ST": 1})
    _, stdout, _ = _run(capsys, "predict", "--model", str(model), "--record", record)
    line = stdout.strip().split("\n")[-1]
    json.loads(line)  # must parse strictly
